#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace linda {

// Empirical quantile with type-7 interpolation: h = (n-1)p + 1 on the
// sorted sample, linearly interpolated. Matches the common statistical
// default. data need not be sorted; p in [0,1].
double quantile_type7(std::vector<double> data, double p);

// Interquartile range from type-7 quartiles.
double iqr_type7(const std::vector<double>& data);

double mean(const std::vector<double>& data);
// Sample standard deviation (divisor n-1); 0 for n < 2.
double sample_sd(const std::vector<double>& data);

// Lower tail CDF of Student's t with df > 0. df may be non-integral.
double t_cdf(double x, double df);
// Two-sided tail probability 2*F_df(-|t|).
double t_two_sided_p(double t, double df);
// Upper quantile: value q with P(T <= q) = p.
double t_quantile(double p, double df);

// Upper tail probability of the F distribution with (df1, df2).
double f_sf(double x, double df1, double df2);

// FNV-1a 64-bit digest, used for manifest fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

} // namespace linda

#include "linda/stats.hpp"

#include "linda/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace linda {

double quantile_type7(std::vector<double> data, double p) {
    if (data.empty())
        throw ValidationError("quantile of empty sample");
    if (p < 0.0 || p > 1.0)
        throw ValidationError("quantile level must lie in [0,1]");
    std::sort(data.begin(), data.end());
    const std::size_t n = data.size();
    if (n == 1)
        return data[0];
    const double h = (static_cast<double>(n) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n)
        return data[n - 1];
    const double frac = h - static_cast<double>(lo);
    return data[lo] + frac * (data[lo + 1] - data[lo]);
}

double iqr_type7(const std::vector<double>& data) {
    std::vector<double> copy(data);
    std::sort(copy.begin(), copy.end());
    const std::size_t n = copy.size();
    auto at = [&](double p) {
        const double h = (static_cast<double>(n) - 1.0) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        if (lo + 1 >= n)
            return copy[n - 1];
        return copy[lo] + (h - static_cast<double>(lo)) * (copy[lo + 1] - copy[lo]);
    };
    if (n == 0)
        throw ValidationError("IQR of empty sample");
    return at(0.75) - at(0.25);
}

double mean(const std::vector<double>& data) {
    if (data.empty())
        return 0.0;
    return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

double sample_sd(const std::vector<double>& data) {
    const std::size_t n = data.size();
    if (n < 2)
        return 0.0;
    const double m = mean(data);
    double ss = 0.0;
    for (double v : data) {
        const double d = v - m;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double t_cdf(double x, double df) {
    boost::math::students_t dist(df);
    return boost::math::cdf(dist, x);
}

double t_two_sided_p(double t, double df) {
    if (!std::isfinite(t))
        return std::isnan(t) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    boost::math::students_t dist(df);
    double p = 2.0 * boost::math::cdf(dist, -std::fabs(t));
    return std::min(1.0, p);
}

double t_quantile(double p, double df) {
    boost::math::students_t dist(df);
    return boost::math::quantile(dist, p);
}

double f_sf(double x, double df1, double df2) {
    if (x <= 0.0)
        return 1.0;
    boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, x));
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

} // namespace linda

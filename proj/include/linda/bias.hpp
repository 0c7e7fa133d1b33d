#pragma once

#include "linda/ols.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace linda {

// Kernel-mode bias estimate over the sqrt(n)-scaled coefficients.
// mode_location estimates -sqrt(n) * alpha_bar; alpha_tilde_shift is the
// additive correction on the coefficient scale (-mode_location / sqrt(n)),
// so corrected[i] = alpha_tilde[i] + alpha_tilde_shift.
struct BiasEstimate {
    double alpha_tilde_shift = 0.0;
    double bandwidth = 0.0; // 0 on the degenerate all-identical path
    double grid_lo = 0.0;
    double grid_hi = 0.0;
    int grid_points = 512;
    double mode_location = 0.0;
};

// Silverman: 0.9 * min(sd, IQR/1.349) * m^(-1/5); falls back to sd when
// IQR = 0; nullopt when all points coincide (caller uses the common value).
std::optional<double> select_bandwidth(const std::vector<double>& points);

// Gaussian-KDE argmax over a uniform grid spanning [min-3h, max+3h].
// Density ties break toward smallest |x|, then smallest x. Constant input
// returns the common value for any h.
double estimate_mode(const std::vector<double>& points, double h, int grid_points = 512);

// points = {sqrt(n) * alpha_tilde_i} over all taxa, degenerate included.
std::pair<std::vector<double>, BiasEstimate>
debias_coefficients(const std::vector<double>& alpha_tilde, int n_samples,
                    std::optional<double> bandwidth_override = {}, int grid_points = 512);

std::pair<std::vector<double>, BiasEstimate>
debias(const std::vector<TaxonFit>& fits, int n_samples,
       std::optional<double> bandwidth_override = {}, int grid_points = 512);

} // namespace linda

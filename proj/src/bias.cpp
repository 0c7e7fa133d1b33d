#include "linda/bias.hpp"

#include "linda/common.hpp"
#include "linda/stats.hpp"

#include <algorithm>
#include <cmath>

namespace linda {

std::optional<double> select_bandwidth(const std::vector<double>& points) {
    const std::size_t m = points.size();
    if (m < 3)
        throw ValidationError("bandwidth selection needs at least 3 points");
    const double sd = sample_sd(points);
    if (sd == 0.0)
        return std::nullopt;
    const double iqr = iqr_type7(points);
    double spread = sd;
    if (iqr > 0.0)
        spread = std::min(sd, iqr / 1.349);
    const double h = 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
    if (!(h > 0.0))
        return std::nullopt;
    return h;
}

double estimate_mode(const std::vector<double>& points, double h, int grid_points) {
    if (points.empty())
        throw ValidationError("mode estimation on empty input");
    if (!(h > 0.0))
        throw ValidationError("mode estimation needs a positive bandwidth");
    if (grid_points < 2)
        throw ValidationError("KDE grid needs at least 2 points");

    const auto [lo_it, hi_it] = std::minmax_element(points.begin(), points.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (lo == hi)
        return lo; // point mass: the mode is the common value for any h

    const double grid_lo = lo - 3.0 * h;
    const double grid_hi = hi + 3.0 * h;
    const double step = (grid_hi - grid_lo) / static_cast<double>(grid_points - 1);
    const double inv_h = 1.0 / h;

    double best_density = -1.0;
    double best_x = grid_lo;
    for (int k = 0; k < grid_points; ++k) {
        const double x = grid_lo + static_cast<double>(k) * step;
        double density = 0.0;
        for (const double pt : points) {
            const double z = (x - pt) * inv_h;
            density += std::exp(-0.5 * z * z);
        }
        const bool better =
            density > best_density ||
            (density == best_density &&
             (std::fabs(x) < std::fabs(best_x) ||
              (std::fabs(x) == std::fabs(best_x) && x < best_x)));
        if (better) {
            best_density = density;
            best_x = x;
        }
    }
    return best_x;
}

std::pair<std::vector<double>, BiasEstimate>
debias_coefficients(const std::vector<double>& alpha_tilde, int n_samples,
                    std::optional<double> bandwidth_override, int grid_points) {
    const std::size_t m = alpha_tilde.size();
    if (m < 3)
        throw ValidationError("insufficient taxa for mode estimation (need at least 3)");
    if (n_samples < 1)
        throw ValidationError("invalid sample count for debiasing");

    const double root_n = std::sqrt(static_cast<double>(n_samples));
    std::vector<double> points(m);
    for (std::size_t i = 0; i < m; ++i)
        points[i] = root_n * alpha_tilde[i];

    BiasEstimate est;
    est.grid_points = grid_points;
    std::optional<double> h = bandwidth_override ? bandwidth_override : select_bandwidth(points);
    if (!h) {
        // All coefficients coincide; the mode is their common value.
        est.bandwidth = 0.0;
        est.mode_location = points[0];
        est.grid_lo = est.grid_hi = points[0];
    } else {
        est.bandwidth = *h;
        est.mode_location = estimate_mode(points, *h, grid_points);
        const auto [lo_it, hi_it] = std::minmax_element(points.begin(), points.end());
        est.grid_lo = *lo_it - 3.0 * est.bandwidth;
        est.grid_hi = *hi_it + 3.0 * est.bandwidth;
    }
    est.alpha_tilde_shift = -est.mode_location / root_n;

    std::vector<double> corrected(m);
    for (std::size_t i = 0; i < m; ++i)
        corrected[i] = alpha_tilde[i] + est.alpha_tilde_shift;
    return {std::move(corrected), est};
}

std::pair<std::vector<double>, BiasEstimate>
debias(const std::vector<TaxonFit>& fits, int n_samples,
       std::optional<double> bandwidth_override, int grid_points) {
    std::vector<double> alpha(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i)
        alpha[i] = fits[i].alpha_tilde;
    return debias_coefficients(alpha, n_samples, bandwidth_override, grid_points);
}

} // namespace linda

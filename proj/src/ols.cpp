#include "linda/ols.hpp"

#include "linda/common.hpp"
#include "linda/parallel.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace linda {

DesignSummary compute_design_summary(const DesignMatrix& design) {
    const Eigen::Index n = design.n();
    const int p = design.p();
    if (n <= p)
        throw ValidationError("need n > d + 2 samples for OLS");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.Z, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    // Condition number of Z'Z, the matrix actually inverted.
    if (smin <= 0.0 || (smax / smin) * (smax / smin) > 1e12)
        throw NumericError("ill-conditioned design matrix (condition number above 1e12)");

    DesignSummary summary;
    const Eigen::VectorXd inv_s2 = sv.array().square().inverse();
    summary.gram_inverse =
        static_cast<double>(n) * svd.matrixV() * inv_s2.asDiagonal() * svd.matrixV().transpose();
    summary.rho_hat = summary.gram_inverse(0, 0);
    if (!(summary.rho_hat > 0.0))
        throw NumericError("non-positive rho_hat from the design Gram inverse");
    return summary;
}

std::vector<TaxonFit> fit_ols_all(const ClrMatrix& W, const DesignMatrix& design, int threads) {
    const Eigen::Index n = design.n();
    const int p = design.p();
    if (W.W.cols() != n)
        throw ValidationError("CLR matrix columns do not match design rows");
    if (n <= p)
        throw ValidationError("need n > d + 2 samples for OLS");
    const auto m = static_cast<std::size_t>(W.W.rows());
    const int df = static_cast<int>(n) - p;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design.Z);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(p).template triangularView<Eigen::Upper>();

    std::vector<TaxonFit> fits(m);
    // Per-taxon products (not one big GEMM) keep each row's arithmetic
    // identical for every thread count.
    parallel_for(m, threads, [&](std::size_t i) {
        const auto row = W.W.row(static_cast<Eigen::Index>(i));
        const Eigen::VectorXd qtw = Q.transpose() * row.transpose();
        const Eigen::VectorXd theta = R.triangularView<Eigen::Upper>().solve(qtw);
        const Eigen::VectorXd resid = row.transpose() - design.Z * theta;
        const double rss = resid.squaredNorm();

        TaxonFit& fit = fits[i];
        fit.alpha_tilde = theta(0);
        fit.beta_tilde = theta.tail(p - 1);
        fit.sigma2_hat = rss / static_cast<double>(df);
        fit.df = df;
        const double scale = row.squaredNorm() / static_cast<double>(n);
        fit.degenerate = fit.sigma2_hat < 1e-12 * scale + 1e-300;
    });
    return fits;
}

} // namespace linda

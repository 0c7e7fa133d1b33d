#include "linda/lmm.hpp"

#include "linda/common.hpp"
#include "linda/ols.hpp"
#include "linda/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace linda {

namespace {

constexpr double log_lambda_lo = -12.0;
constexpr double log_lambda_hi = 12.0;
constexpr double brent_tol = 1e-8;
constexpr int brent_max_iter = 200;

// Bounded Brent minimization on [a, b]; never evaluates the endpoints.
template <typename F>
double brent_minimize(F f, double a, double b, double tol, int max_iter, bool& converged,
                      double& fmin) {
    const double gold = 0.3819660112501051;
    double x = a + gold * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * (std::fabs(x) + 1.0);
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) {
            converged = true;
            break;
        }
        bool use_parabola = false;
        if (std::fabs(e) > tol1) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0)
                p = -p;
            q = std::fabs(q);
            const double etemp = e;
            e = d;
            if (!(std::fabs(p) >= std::fabs(0.5 * q * etemp) || p <= q * (a - x) ||
                  p >= q * (b - x))) {
                use_parabola = true;
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2)
                    d = xm >= x ? tol1 : -tol1;
            }
        }
        if (!use_parabola) {
            e = x >= xm ? a - x : b - x;
            d = gold * e;
        }
        const double u = std::fabs(d) >= tol1 ? x + d : x + (d >= 0.0 ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u >= x)
                a = x;
            else
                b = x;
            v = w;
            w = x;
            x = u;
            fv = fw;
            fw = fx;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                w = u;
                fv = fw;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    fmin = fx;
    return x;
}

} // namespace

GroupedDesign precompute_grouped(const DesignMatrix& design) {
    if (!design.has_groups())
        throw ValidationError("mixed-model fit requires a grouping variable");
    GroupedDesign gd;
    gd.Z = design.Z;
    gd.ZtZ = design.Z.transpose() * design.Z;
    gd.n = static_cast<int>(design.n());
    gd.p = design.p();
    gd.G = design.group_count();
    if (gd.G < 2)
        throw ValidationError("mixed-model fit requires at least 2 groups");
    gd.members.assign(static_cast<std::size_t>(gd.G), {});
    for (int s = 0; s < gd.n; ++s) {
        const int g = design.group_index[static_cast<std::size_t>(s)];
        if (g < 0 || g >= gd.G)
            throw ValidationError("group index out of range");
        gd.members[static_cast<std::size_t>(g)].push_back(s);
    }
    gd.group_sizes.resize(static_cast<std::size_t>(gd.G));
    gd.Zt1.setZero(gd.p, gd.G);
    for (int g = 0; g < gd.G; ++g) {
        const auto& idx = gd.members[static_cast<std::size_t>(g)];
        if (idx.empty())
            throw ValidationError("empty group level in design");
        gd.group_sizes[static_cast<std::size_t>(g)] = static_cast<double>(idx.size());
        for (const int s : idx)
            gd.Zt1.col(g) += design.Z.row(s).transpose();
    }
    gd.u_varies_within = false;
    for (int g = 0; g < gd.G && !gd.u_varies_within; ++g) {
        const auto& idx = gd.members[static_cast<std::size_t>(g)];
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (design.Z(idx[k], 0) != design.Z(idx[0], 0)) {
                gd.u_varies_within = true;
                break;
            }
    }
    const int d = gd.p - 2;
    gd.df_fit = gd.u_varies_within ? static_cast<double>(gd.n - gd.G - d - 1)
                                   : static_cast<double>(gd.G - d - 2);
    gd.df_ols = static_cast<double>(gd.n - d - 2);
    return gd;
}

LmmProfile eval_reml_profile(const GroupedDesign& gd, const Eigen::VectorXd& w, double lambda) {
    const int p = gd.p;
    const int n = gd.n;

    Eigen::MatrixXd A = gd.ZtZ;
    Eigen::VectorXd b = gd.Z.transpose() * w;
    double wVw = w.squaredNorm();
    double logdet_v = 0.0;
    for (int g = 0; g < gd.G; ++g) {
        const double ng = gd.group_sizes[static_cast<std::size_t>(g)];
        const double c = lambda / (1.0 + lambda * ng);
        double sg = 0.0;
        for (const int s : gd.members[static_cast<std::size_t>(g)])
            sg += w(s);
        if (c != 0.0) {
            A.noalias() -= c * gd.Zt1.col(g) * gd.Zt1.col(g).transpose();
            b.noalias() -= c * sg * gd.Zt1.col(g);
            wVw -= c * sg * sg;
        }
        logdet_v += std::log1p(lambda * ng);
    }

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericError("singular generalized least-squares system in mixed-model fit");
    const Eigen::VectorXd theta = llt.solve(b);
    double logdet_a = 0.0;
    for (int j = 0; j < p; ++j)
        logdet_a += 2.0 * std::log(llt.matrixLLT()(j, j));

    const double rss_v = std::max(0.0, wVw - theta.dot(b));
    const double nu = static_cast<double>(n - p);
    const double sigma2 = rss_v / nu;

    LmmProfile profile;
    profile.theta = theta;
    profile.sigma2 = sigma2;
    if (sigma2 > 0.0) {
        profile.loglik = -0.5 * (nu * (1.0 + std::log(2.0 * M_PI)) + nu * std::log(sigma2) +
                                 logdet_v + logdet_a);
    } else {
        profile.loglik = std::numeric_limits<double>::infinity();
    }
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(p);
    e0(0) = 1.0;
    const Eigen::VectorXd a_inv_e0 = llt.solve(e0);
    profile.se_alpha = std::sqrt(std::max(0.0, sigma2 * a_inv_e0(0)));
    return profile;
}

std::vector<LmmFit> fit_lmm_all(const ClrMatrix& W, const DesignMatrix& design, int threads) {
    const auto m = static_cast<std::size_t>(W.W.rows());
    const Eigen::Index n = design.n();
    if (W.W.cols() != n)
        throw ValidationError("CLR matrix columns do not match design rows");
    if (n <= design.p())
        throw ValidationError("need n > d + 2 samples for the mixed-model fit");

    // Variance components are unidentifiable when every group is a
    // singleton: V = (1 + lambda) I absorbs into sigma^2.
    bool any_replicated = false;
    if (design.has_groups()) {
        std::vector<int> sizes(static_cast<std::size_t>(design.group_count()), 0);
        for (const int g : design.group_index)
            ++sizes[static_cast<std::size_t>(g)];
        for (const int c : sizes)
            if (c >= 2)
                any_replicated = true;
    }
    if (!design.has_groups() || design.group_count() < 2 || !any_replicated) {
        const auto ols = fit_ols_all(W, design, threads);
        const auto summary = compute_design_summary(design);
        std::vector<LmmFit> fits(m);
        for (std::size_t i = 0; i < m; ++i) {
            fits[i].alpha_tilde = ols[i].alpha_tilde;
            fits[i].beta_tilde = ols[i].beta_tilde;
            fits[i].sigma2_resid = ols[i].sigma2_hat;
            fits[i].tau2_group = 0.0;
            fits[i].lambda = 0.0;
            fits[i].se_alpha =
                std::sqrt(summary.rho_hat * ols[i].sigma2_hat / static_cast<double>(n));
            fits[i].df = static_cast<double>(ols[i].df);
            fits[i].groups = design.group_count();
            fits[i].degenerate = ols[i].degenerate;
            fits[i].ols_fallback = true;
        }
        return fits;
    }

    const GroupedDesign gd = precompute_grouped(design);
    std::vector<LmmFit> fits(m);
    parallel_for(m, threads, [&](std::size_t i) {
        const Eigen::VectorXd w = W.W.row(static_cast<Eigen::Index>(i)).transpose();
        LmmFit& fit = fits[i];
        fit.groups = gd.G;

        bool converged = false;
        double neg_best = 0.0;
        auto objective = [&](double x) { return -eval_reml_profile(gd, w, std::exp(x)).loglik; };
        const double x_hat = brent_minimize(objective, log_lambda_lo, log_lambda_hi, brent_tol,
                                            brent_max_iter, converged, neg_best);

        const LmmProfile at_zero = eval_reml_profile(gd, w, 0.0);
        double lambda = std::exp(x_hat);
        LmmProfile best = eval_reml_profile(gd, w, lambda);
        // Collapse to the boundary when it matches or beats the interior
        // optimum; the model then degenerates to OLS, df included.
        if (at_zero.loglik >= best.loglik - 1e-10 || x_hat <= log_lambda_lo + 1e-6) {
            lambda = 0.0;
            best = at_zero;
            fit.df = gd.df_ols;
            // A boundary fit is the fixed-effects model, so report its
            // variance on the OLS divisor (n - p - 1) rather than the REML
            // profile divisor (n - p); this keeps the collapsed fit
            // identical to a plain least-squares analysis.
            if (gd.df_ols >= 1.0) {
                const double rescale = static_cast<double>(gd.n - gd.p) / gd.df_ols;
                best.sigma2 *= rescale;
                best.se_alpha *= std::sqrt(rescale);
            }
        } else {
            fit.df = gd.df_fit;
        }

        fit.converged = converged;
        fit.lambda = lambda;
        fit.alpha_tilde = best.theta(0);
        fit.beta_tilde = best.theta.tail(gd.p - 1);
        fit.sigma2_resid = best.sigma2;
        fit.tau2_group = lambda * best.sigma2;
        fit.se_alpha = best.se_alpha;

        const double scale = w.squaredNorm() / static_cast<double>(gd.n);
        if (!converged || !(fit.se_alpha > 0.0) || fit.df < 1.0 ||
            best.sigma2 < 1e-12 * scale + 1e-300 || !std::isfinite(best.loglik))
            fit.degenerate = true;
    });
    return fits;
}

} // namespace linda

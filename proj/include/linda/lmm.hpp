#pragma once

#include "linda/design.hpp"
#include "linda/preprocess.hpp"

#include <Eigen/Core>

#include <vector>

namespace linda {

// Random-intercept fit for one taxon. tau2_group is the group variance,
// lambda = tau2/sigma2 profiled by REML. ols_fallback marks designs where
// the variance components are unidentifiable (all groups singletons).
struct LmmFit {
    double alpha_tilde = 0.0;
    Eigen::VectorXd beta_tilde;
    double sigma2_resid = 0.0;
    double tau2_group = 0.0;
    double lambda = 0.0;
    double se_alpha = 0.0;
    double df = 0.0;
    int groups = 0;
    bool degenerate = false;
    bool ols_fallback = false;
    bool converged = true;
};

// Shared per-design quantities for the block-diagonal REML profile.
struct GroupedDesign {
    Eigen::MatrixXd Z;
    Eigen::MatrixXd ZtZ;
    std::vector<std::vector<int>> members; // sample indices per group
    std::vector<double> group_sizes;
    Eigen::MatrixXd Zt1; // p x G, column g = sum of z_s over group g
    int n = 0;
    int p = 0;
    int G = 0;
    bool u_varies_within = false;
    double df_fit = 0.0; // containment df for lambda > 0
    double df_ols = 0.0; // collapse df for lambda = 0
};

GroupedDesign precompute_grouped(const DesignMatrix& design);

// Restricted log-likelihood profile at a fixed variance ratio lambda,
// with sigma^2 profiled out (divisor n - p).
struct LmmProfile {
    double loglik = 0.0;
    Eigen::VectorXd theta;
    double sigma2 = 0.0;
    double se_alpha = 0.0;
};

LmmProfile eval_reml_profile(const GroupedDesign& gd, const Eigen::VectorXd& w, double lambda);

// Per-taxon REML over log lambda in [-12, 12] (Brent, tol 1e-8, 200
// iterations). A profile maximized at the lambda = 0 boundary collapses to
// the OLS fit, including df = n - d - 2.
std::vector<LmmFit> fit_lmm_all(const ClrMatrix& W, const DesignMatrix& design, int threads = 1);

} // namespace linda

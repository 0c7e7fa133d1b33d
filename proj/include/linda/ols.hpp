#pragma once

#include "linda/design.hpp"
#include "linda/preprocess.hpp"

#include <Eigen/Core>

#include <vector>

namespace linda {

// Per-taxon OLS fit of W_i on (u, 1, c). df = n - d - 2. degenerate marks
// an (numerically) exact fit whose variance is unusable downstream.
struct TaxonFit {
    double alpha_tilde = 0.0;
    Eigen::VectorXd beta_tilde; // intercept + adjustments, d+1 entries
    double sigma2_hat = 0.0;
    int df = 0;
    bool degenerate = false;
};

// Shared design quantities: (n^-1 Z'Z)^-1 and its (1,1) element rho_hat.
struct DesignSummary {
    Eigen::MatrixXd gram_inverse;
    double rho_hat = 0.0;
};

// QR-based; throws NumericError when cond(Z'Z) exceeds 1e12.
DesignSummary compute_design_summary(const DesignMatrix& design);

// One factorization of Z shared across all m taxa.
std::vector<TaxonFit> fit_ols_all(const ClrMatrix& W, const DesignMatrix& design,
                                  int threads = 1);

} // namespace linda

#pragma once

#include "linda/design.hpp"
#include "linda/table.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace linda {

enum class ZeroStrategy { pseudo, imputation, adaptive };

ZeroStrategy parse_zero_strategy(const std::string& name);
std::string zero_strategy_name(ZeroStrategy s);

// Zero-resolved abundances: strictly positive, same dims as the source
// counts. strategy_used is pseudo or imputation (never adaptive).
struct PositiveAbundanceMatrix {
    Eigen::MatrixXd values;
    ZeroStrategy strategy_used = ZeroStrategy::pseudo;
    std::optional<double> libsize_test_p;
};

struct ClrMatrix {
    Eigen::MatrixXd W; // m x n, every column sums to 0
};

// N_s = sum_i Y_is; errors on an all-zero sample.
std::vector<long long> library_sizes(const CountTable& counts);

// Overall F-test of the non-intercept design block in the regression of
// log(N_s) on Z. Returns 1 when log(N) carries no variation.
double libsize_association_test(const std::vector<long long>& N, const DesignMatrix& design);

// pseudo: Y + 0.5 everywhere. imputation: zeros of taxon i become
// N_s / max{N_k : Y_ik = 0}; nonzero entries unchanged. adaptive: pick
// imputation iff libsize_association_test(p) < threshold (needs design).
PositiveAbundanceMatrix handle_zeros(const CountTable& counts, ZeroStrategy strategy,
                                     const DesignMatrix* design = nullptr,
                                     double adaptive_threshold = 0.1);

// W_is = log X_is - mean_j log X_js, computed in log space.
ClrMatrix clr_transform(const PositiveAbundanceMatrix& X, int threads = 1);

} // namespace linda

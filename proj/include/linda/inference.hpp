#pragma once

#include "linda/bias.hpp"
#include "linda/ols.hpp"
#include "linda/preprocess.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace linda {

// One output row. p/p_adj are NaN for degenerate taxa, which never reject
// and do not count toward the BH family size.
struct TaxonRecord {
    std::string taxon;
    double alpha_hat = 0.0;
    double stderr_hat = 0.0;
    double t_stat = 0.0;
    double df = 0.0;
    double p = 0.0;
    double p_adj = 0.0;
    bool reject = false;
    bool degenerate = false;
    std::string flags = "ok";
};

struct LindaResult {
    std::vector<TaxonRecord> rows;
    // run metadata
    std::string method = "ols"; // ols | lmm
    int n = 0;
    int m = 0;
    int d = 0;
    double df_common = 0.0; // NaN for lmm (df is per-row)
    double rho_hat = 0.0;   // NaN for lmm
    bool bias_corrected = true;
    BiasEstimate bias;
    ZeroStrategy zero_requested = ZeroStrategy::adaptive;
    ZeroStrategy zero_used = ZeroStrategy::pseudo;
    std::optional<double> libsize_test_p;
    double target_fdr = 0.05;
    std::optional<double> winsor_quantile;
    std::optional<long long> min_libsize;
    std::optional<double> min_prevalence;
};

// T_i = sqrt(n) * alpha_hat_i / sqrt(rho_hat * sigma2_hat_i); NaN for
// degenerate taxa.
std::vector<double> t_statistics(const std::vector<double>& alpha_hat,
                                 const std::vector<TaxonFit>& fits, double rho_hat, int n);

// p_i = 2 F_df(-|T_i|); NaN propagates.
std::vector<double> p_values(const std::vector<double>& T, double df);

struct BhOutput {
    std::vector<double> p_adj;
    std::vector<char> reject;
};

// Standard BH step-up on defined p-values only (caller filters NaN).
BhOutput bh_adjust(const std::vector<double>& p, double q);

// Smallest observed |T| value t* whose FDP estimate
//   2 m F_df(-t) / #{i : |T_i| >= t}
// is <= q; the rejection set is {i : |T_i| >= t*}. Evaluating the
// strict-inequality form of the estimate at its left limit makes the BH
// equivalence exact, ties included. nullopt when no candidate passes.
std::optional<double> fdp_threshold(const std::vector<double>& T, double df, double q);

void write_result_tsv(std::ostream& out, const LindaResult& result);
std::string result_to_string(const LindaResult& result);
LindaResult read_result_tsv(std::istream& in, const std::string& source_name);

} // namespace linda

#pragma once

#include "linda/design.hpp"
#include "linda/inference.hpp"
#include "linda/preprocess.hpp"
#include "linda/table.hpp"

#include <optional>
#include <string>

namespace linda {

enum class Method { ols, lmm };

struct AnalyzeOptions {
    ZeroStrategy zero = ZeroStrategy::adaptive;
    double adaptive_threshold = 0.1;
    bool bias_correction = true;
    std::optional<double> bandwidth_override;
    int kde_grid = 512;
    double target_fdr = 0.05;
    int threads = 1;
    // Real-data front end only (analyze_files); the core pipeline does not
    // filter or winsorize.
    long long min_libsize = 1000;
    double min_prevalence = 0.10;
    double winsor_quantile = 0.97;
};

// Core pipeline on prepared counts: zero handling, CLR, per-taxon fits
// (OLS, or random-intercept LMM when the design carries groups and
// use_lmm), bias correction, t p-values, BH.
LindaResult analyze_design(const CountTable& counts, const DesignMatrix& design, bool use_lmm,
                           const AnalyzeOptions& options);

// Real-data front end: load, reconcile, filter, winsorize, build the
// design from the formula, then analyze_design. The LMM path is taken
// when the formula (or spec) names a random group.
LindaResult analyze_files(const std::string& counts_path, const std::string& meta_path,
                          const std::string& formula, const AnalyzeOptions& options,
                          std::optional<char> delim = {});

LindaResult analyze_tables(CountTable counts, MetadataTable meta, const DesignSpec& spec,
                           const AnalyzeOptions& options);

} // namespace linda

#include "linda/pipeline.hpp"

#include "linda/common.hpp"
#include "linda/lmm.hpp"
#include "linda/stats.hpp"

#include <cmath>
#include <limits>

namespace linda {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

// Computes p-values (per-row df), BH over the defined entries, and fills
// the per-taxon records.
void finish_rows(LindaResult& result, const std::vector<std::string>& taxa,
                 const std::vector<double>& alpha_hat, const std::vector<double>& stderrs,
                 const std::vector<double>& T, const std::vector<double>& df,
                 const std::vector<char>& degenerate, const std::vector<std::string>& flags,
                 double q) {
    const std::size_t m = taxa.size();
    result.rows.resize(m);
    std::vector<double> defined_p;
    std::vector<std::size_t> defined_idx;
    for (std::size_t i = 0; i < m; ++i) {
        auto& row = result.rows[i];
        row.taxon = taxa[i];
        row.alpha_hat = alpha_hat[i];
        row.stderr_hat = stderrs[i];
        row.t_stat = T[i];
        row.df = df[i];
        row.degenerate = degenerate[i] != 0;
        row.flags = flags[i];
        if (row.degenerate || std::isnan(T[i])) {
            row.p = nan_v;
            row.p_adj = nan_v;
            row.reject = false;
        } else {
            row.p = t_two_sided_p(T[i], df[i]);
            defined_p.push_back(row.p);
            defined_idx.push_back(i);
        }
    }
    const BhOutput bh = bh_adjust(defined_p, q);
    for (std::size_t k = 0; k < defined_idx.size(); ++k) {
        auto& row = result.rows[defined_idx[k]];
        row.p_adj = bh.p_adj[k];
        row.reject = bh.reject[k] != 0;
    }
}

} // namespace

LindaResult analyze_design(const CountTable& counts, const DesignMatrix& design, bool use_lmm,
                           const AnalyzeOptions& options) {
    if (counts.n() != design.n())
        throw ValidationError("count table and design have different sample counts");
    if (counts.m() < 3)
        throw ValidationError("need at least 3 taxa");
    const auto m = static_cast<std::size_t>(counts.m());
    const int n = static_cast<int>(counts.n());

    LindaResult result;
    result.n = n;
    result.m = static_cast<int>(m);
    result.d = design.d;
    result.target_fdr = options.target_fdr;
    result.zero_requested = options.zero;
    result.bias_corrected = options.bias_correction;

    const PositiveAbundanceMatrix X =
        handle_zeros(counts, options.zero, &design, options.adaptive_threshold);
    result.zero_used = X.strategy_used;
    result.libsize_test_p = X.libsize_test_p;

    const ClrMatrix W = clr_transform(X, options.threads);

    if (use_lmm && !design.has_groups())
        throw ValidationError("mixed-model analysis requested without a grouping variable");

    if (!use_lmm) {
        result.method = "ols";
        const DesignSummary summary = compute_design_summary(design);
        result.rho_hat = summary.rho_hat;
        const std::vector<TaxonFit> fits = fit_ols_all(W, design, options.threads);
        result.df_common = static_cast<double>(fits.front().df);

        std::vector<double> alpha_hat(m);
        if (options.bias_correction) {
            auto [corrected, bias] =
                debias(fits, n, options.bandwidth_override, options.kde_grid);
            alpha_hat = std::move(corrected);
            result.bias = bias;
        } else {
            for (std::size_t i = 0; i < m; ++i)
                alpha_hat[i] = fits[i].alpha_tilde;
            result.bias = BiasEstimate{};
            result.bias.grid_points = options.kde_grid;
        }

        const std::vector<double> T = t_statistics(alpha_hat, fits, summary.rho_hat, n);
        std::vector<double> stderrs(m), df(m);
        std::vector<char> degenerate(m);
        std::vector<std::string> flags(m);
        for (std::size_t i = 0; i < m; ++i) {
            stderrs[i] = fits[i].degenerate
                             ? nan_v
                             : std::sqrt(summary.rho_hat * fits[i].sigma2_hat /
                                         static_cast<double>(n));
            df[i] = static_cast<double>(fits[i].df);
            degenerate[i] = fits[i].degenerate ? 1 : 0;
            flags[i] = fits[i].degenerate ? "degenerate" : "ok";
        }
        finish_rows(result, counts.taxa_ids, alpha_hat, stderrs, T, df, degenerate, flags,
                    options.target_fdr);
        return result;
    }

    result.method = "lmm";
    result.rho_hat = nan_v;
    const std::vector<LmmFit> fits = fit_lmm_all(W, design, options.threads);
    result.df_common = nan_v;

    std::vector<double> alpha_tilde(m);
    for (std::size_t i = 0; i < m; ++i)
        alpha_tilde[i] = fits[i].alpha_tilde;

    std::vector<double> alpha_hat(m);
    if (options.bias_correction) {
        auto [corrected, bias] =
            debias_coefficients(alpha_tilde, n, options.bandwidth_override, options.kde_grid);
        alpha_hat = std::move(corrected);
        result.bias = bias;
    } else {
        alpha_hat = alpha_tilde;
        result.bias = BiasEstimate{};
        result.bias.grid_points = options.kde_grid;
    }

    std::vector<double> T(m, nan_v), stderrs(m, nan_v), df(m);
    std::vector<char> degenerate(m);
    std::vector<std::string> flags(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& fit = fits[i];
        df[i] = fit.df;
        degenerate[i] = fit.degenerate ? 1 : 0;
        if (!fit.degenerate) {
            stderrs[i] = fit.se_alpha;
            T[i] = alpha_hat[i] / fit.se_alpha;
        }
        std::string flag = fit.degenerate ? "degenerate" : "ok";
        if (fit.ols_fallback)
            flag += ";ols_fallback";
        if (!fit.converged)
            flag += ";nonconverged";
        flags[i] = flag;
    }
    finish_rows(result, counts.taxa_ids, alpha_hat, stderrs, T, df, degenerate, flags,
                options.target_fdr);
    return result;
}

LindaResult analyze_tables(CountTable counts, MetadataTable meta, const DesignSpec& spec,
                           const AnalyzeOptions& options) {
    counts.validate();
    reconcile(counts, meta);
    auto [fcounts, fmeta] =
        filter_dataset(counts, meta, options.min_libsize, options.min_prevalence);
    const CountTable wcounts = winsorize(fcounts, options.winsor_quantile);
    const DesignMatrix design = build_design(fmeta, spec);

    LindaResult result =
        analyze_design(wcounts, design, spec.random_group.has_value(), options);
    result.winsor_quantile = options.winsor_quantile;
    result.min_libsize = options.min_libsize;
    result.min_prevalence = options.min_prevalence;
    return result;
}

LindaResult analyze_files(const std::string& counts_path, const std::string& meta_path,
                          const std::string& formula, const AnalyzeOptions& options,
                          std::optional<char> delim) {
    const DesignSpec spec = parse_formula(formula);
    CountTable counts = read_count_table_file(counts_path, delim);
    MetadataTable meta = read_metadata_file(meta_path, delim);
    return analyze_tables(std::move(counts), std::move(meta), spec, options);
}

} // namespace linda

#include "linda/common.hpp"
#include "linda/manifest.hpp"
#include "linda/pipeline.hpp"
#include "linda/simulate.hpp"
#include "linda/stats.hpp"
#include "linda/tsv.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

int default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::vector<std::string> collect_args(int argc, char** argv) {
    std::vector<std::string> out;
    for (int i = 1; i < argc; ++i) out.emplace_back(argv[i]);
    return out;
}

struct AnalyzeArgs {
    std::string counts_path;
    std::string meta_path;
    std::string formula;
    std::string random_intercept;
    std::string output;
    std::string zero = "adaptive";
    std::string bias = "on";
    double q = 0.05;
    double winsor_quantile = 0.97;
    long long min_libsize = 1000;
    double min_prevalence = 0.10;
    double adaptive_threshold = 0.1;
    int kde_grid = 512;
    double bandwidth = 0.0; // 0 = data-driven
};

struct SimulateArgs {
    std::string setting = "S0";
    std::string design = "C0";
    int m = 500;
    int n = 50;
    double gamma = 0.05;
    int effect_index = 0; // 0 = all of 1..6
    int reps = 100;
    std::uint64_t seed = 1;
    std::string method = "ols";
    std::string zero = "pseudo";
    std::string bias = "on";
    double q = 0.05;
    std::string params_path;
    bool mixed_signs = false;
    std::string output;
};

struct PlotArgs {
    std::string result_path;
    std::string kind;
    double fdr = 0.05;
    std::string output;
};

bool parse_on_off(const std::string& v, const std::string& flag) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw linda::ValidationError(flag + " must be 'on' or 'off'");
}

int run_analyze(const AnalyzeArgs& args, int threads, const std::vector<std::string>& argv_copy) {
    const auto t0 = Clock::now();
    std::string formula = args.formula;
    if (!args.random_intercept.empty()) {
        const linda::DesignSpec spec = linda::parse_formula(formula);
        if (spec.random_group && *spec.random_group != args.random_intercept)
            throw linda::ValidationError("formula names random group '" + *spec.random_group +
                                         "' but --random-intercept says '" +
                                         args.random_intercept + "'");
        if (!spec.random_group) formula += " | " + args.random_intercept;
    }
    linda::AnalyzeOptions opt;
    opt.zero = linda::parse_zero_strategy(args.zero);
    opt.adaptive_threshold = args.adaptive_threshold;
    opt.bias_correction = parse_on_off(args.bias, "--bias");
    if (args.bandwidth > 0.0) opt.bandwidth_override = args.bandwidth;
    opt.kde_grid = args.kde_grid;
    opt.target_fdr = args.q;
    opt.threads = threads;
    opt.min_libsize = args.min_libsize;
    opt.min_prevalence = args.min_prevalence;
    opt.winsor_quantile = args.winsor_quantile;

    const linda::LindaResult result =
        linda::analyze_files(args.counts_path, args.meta_path, formula, opt);
    linda::write_file_bytes(args.output, linda::result_to_string(result));

    linda::RunManifest manifest;
    manifest.command = "analyze";
    manifest.arguments = argv_copy;
    manifest.input_digests.emplace_back(args.counts_path, linda::digest_file_hex(args.counts_path));
    manifest.input_digests.emplace_back(args.meta_path, linda::digest_file_hex(args.meta_path));
    manifest.tool_version = linda::version_string;
    manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    linda::write_manifest(manifest, args.output);
    return 0;
}

int run_simulate(const SimulateArgs& args, int threads, const std::vector<std::string>& argv_copy) {
    const auto t0 = Clock::now();
    linda::SimConfig config;
    config.setting = linda::parse_setting(args.setting);
    config.design = linda::parse_cov_design(args.design);
    config.m = args.m;
    config.n = args.n;
    config.gamma = args.gamma;
    config.replicates = args.reps;
    config.seed = args.seed;
    config.param_file = args.params_path;
    config.mixed_signs = args.mixed_signs;
    const linda::Method method =
        args.method == "lmm" ? linda::Method::lmm
                             : (args.method == "ols" ? linda::Method::ols
                                                     : throw linda::ValidationError(
                                                           "--method must be 'ols' or 'lmm'"));
    const linda::ZeroStrategy zero = linda::parse_zero_strategy(args.zero);
    const bool bias_on = parse_on_off(args.bias, "--bias");
    if (args.effect_index != 0 && (args.effect_index < 1 || args.effect_index > 6))
        throw linda::ValidationError("--effect-index must be in 1..6");

    std::vector<int> indices;
    if (args.effect_index == 0) {
        indices = {1, 2, 3, 4, 5, 6};
    } else {
        indices = {args.effect_index};
    }

    std::ostringstream out;
    out << "setting\tdesign\tm\tn\tgamma\teffect_index\tmu\tmethod\tzero\tbias\tq\treps\t"
           "failed\timputed\tfdr\tfdr_ci\ttpr\n";
    for (const int k : indices) {
        config.mu_index = k;
        config.validate();
        const linda::SimMetrics metrics =
            linda::run_replications(config, method, zero, bias_on, args.q, threads);
        out << linda::setting_name(config.setting) << '\t'
            << linda::cov_design_name(config.design) << '\t' << config.m << '\t' << config.n
            << '\t' << linda::format_double(config.gamma) << '\t' << k << '\t'
            << linda::format_double(config.mu()) << '\t' << args.method << '\t'
            << linda::zero_strategy_name(zero) << '\t' << (bias_on ? "on" : "off") << '\t'
            << linda::format_double(args.q) << '\t' << config.replicates << '\t'
            << metrics.failed_replicates << '\t' << metrics.imputation_replicates << '\t'
            << linda::format_double(metrics.fdr_mean) << '\t'
            << linda::format_double(metrics.fdr_ci_halfwidth) << '\t'
            << linda::format_double(metrics.tpr_mean) << '\n';
    }
    linda::write_file_bytes(args.output, out.str());

    linda::RunManifest manifest;
    manifest.command = "simulate";
    manifest.arguments = argv_copy;
    if (!args.params_path.empty())
        manifest.input_digests.emplace_back(args.params_path,
                                            linda::digest_file_hex(args.params_path));
    manifest.tool_version = linda::version_string;
    manifest.seed = args.seed;
    manifest.has_seed = true;
    manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    linda::write_manifest(manifest, args.output);
    return 0;
}

int run_plotdata(const PlotArgs& args, const std::vector<std::string>& argv_copy) {
    const auto t0 = Clock::now();
    if (args.kind != "effectsize" && args.kind != "volcano")
        throw linda::ValidationError("--kind must be 'effectsize' or 'volcano'");
    if (!(args.fdr >= 0.0 && args.fdr <= 1.0))
        throw linda::ValidationError("--fdr must lie in [0, 1]");
    const std::string bytes = linda::read_file_bytes(args.result_path);
    std::istringstream in(bytes);
    const linda::LindaResult result = linda::read_result_tsv(in, args.result_path);

    std::ostringstream out;
    if (args.kind == "effectsize") {
        out << "taxon\tdebiased_coef\tnondebiased_coef\tci_lo\tci_hi\n";
        for (const auto& row : result.rows) {
            if (!(row.p_adj <= args.fdr)) continue; // NaN never qualifies
            const double tq = linda::t_quantile(0.975, row.df);
            const double half = tq * row.stderr_hat;
            out << row.taxon << '\t' << linda::format_double(row.alpha_hat) << '\t'
                << linda::format_double(row.alpha_hat - result.bias.alpha_tilde_shift) << '\t'
                << linda::format_double(row.alpha_hat - half) << '\t'
                << linda::format_double(row.alpha_hat + half) << '\n';
        }
    } else {
        out << "taxon\tcoef\tneg_log10_p\treject\n";
        for (const auto& row : result.rows) {
            // Clamp so underflowed p-values stay finite for plot tools.
            const double nl =
                std::isnan(row.p) ? row.p : -std::log10(std::max(row.p, 1e-300));
            out << row.taxon << '\t' << linda::format_double(row.alpha_hat) << '\t'
                << linda::format_double(nl) << '\t' << (row.reject ? 1 : 0) << '\n';
        }
    }
    linda::write_file_bytes(args.output, out.str());

    linda::RunManifest manifest;
    manifest.command = "plot-data";
    manifest.arguments = argv_copy;
    manifest.input_digests.emplace_back(args.result_path,
                                        linda::digest_file_hex(args.result_path));
    manifest.tool_version = linda::version_string;
    manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    linda::write_manifest(manifest, args.output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differential abundance analysis for compositional count data"};
    app.set_version_flag("--version", linda::version_string);
    app.require_subcommand(1);
    int threads = default_threads();
    app.add_option("--threads", threads, "Worker thread cap (default: available cores)")
        ->check(CLI::PositiveNumber);

    AnalyzeArgs a;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze a count table against metadata");
    analyze->fallthrough();
    analyze->add_option("--counts", a.counts_path, "Count table (taxa x samples, TSV/CSV)")
        ->required();
    analyze->add_option("--metadata", a.meta_path, "Sample metadata (TSV/CSV)")->required();
    analyze->add_option("--formula", a.formula,
                        "Model formula: 'u', 'u + c1 + c2', 'u + sex | subject'")
        ->required();
    analyze->add_option("--random-intercept", a.random_intercept,
                        "Random-intercept grouping variable (alternative to '| group')");
    analyze->add_option("--output", a.output, "Result TSV path")->required();
    analyze->add_option("--zero-handling", a.zero, "pseudo | imputation | adaptive");
    analyze->add_option("--bias", a.bias, "Compositional bias correction: on | off");
    analyze->add_option("--q", a.q, "Target false discovery rate (default 0.05)");
    analyze->add_option("--winsor-quantile", a.winsor_quantile,
                        "Per-taxon winsorization quantile (default 0.97)");
    analyze->add_option("--min-libsize", a.min_libsize,
                        "Drop samples with library size below this (default 1000)");
    analyze->add_option("--min-prevalence", a.min_prevalence,
                        "Drop taxa present in fewer than this fraction of samples (default 0.10)");
    analyze->add_option("--adaptive-threshold", a.adaptive_threshold,
                        "Library-size association p-value cutoff (default 0.1)");
    analyze->add_option("--kde-grid", a.kde_grid, "Mode-search grid size (default 512)");
    analyze->add_option("--bandwidth", a.bandwidth, "Override the kernel bandwidth (>0)");

    SimulateArgs s;
    CLI::App* simulate = app.add_subcommand("simulate", "Run the synthetic evaluation harness");
    simulate->fallthrough();
    simulate->add_option("--setting", s.setting, "S0..S7, S8.1, S8.2 (default S0)");
    simulate->add_option("--design", s.design, "Covariate design C0 | C1 | C2 (default C0)");
    simulate->add_option("--m", s.m, "Taxa count (default 500)");
    simulate->add_option("--n", s.n, "Sample count (default 50)");
    simulate->add_option("--gamma", s.gamma, "Signal density in [0,1) (default 0.05)");
    simulate->add_option("--effect-index", s.effect_index,
                         "Effect size index 1..6; omit to sweep all six");
    simulate->add_option("--reps", s.reps, "Replicates per effect index (default 100)");
    simulate->add_option("--seed", s.seed, "RNG seed (default 1)");
    simulate->add_option("--method", s.method, "ols | lmm (default ols)");
    simulate->add_option("--zero-handling", s.zero, "pseudo | imputation | adaptive");
    simulate->add_option("--bias", s.bias, "Bias correction on | off (default on)");
    simulate->add_option("--q", s.q, "Target false discovery rate (default 0.05)");
    simulate->add_option("--params", s.params_path,
                         "TSV with per-taxon 'beta0' and 'sigma2' columns");
    simulate->add_flag("--mixed-signs", s.mixed_signs,
                       "Draw effect directions at random instead of one shared sign");
    simulate->add_option("--output", s.output, "Metrics TSV path")->required();

    PlotArgs p;
    CLI::App* plotdata = app.add_subcommand("plot-data", "Derive plot-ready TSVs from a result");
    plotdata->fallthrough();
    plotdata->add_option("--result", p.result_path, "Result TSV from 'analyze'")->required();
    plotdata->add_option("--kind", p.kind, "effectsize | volcano")->required();
    plotdata->add_option("--fdr", p.fdr, "Cutoff on adjusted p-values (default 0.05)");
    plotdata->add_option("--output", p.output, "Output TSV path")->required();

    const std::vector<std::string> argv_copy = collect_args(argc, argv);
    try {
        app.parse(argc, argv);
        if (*analyze) return run_analyze(a, threads, argv_copy);
        if (*simulate) return run_simulate(s, threads, argv_copy);
        if (*plotdata) return run_plotdata(p, argv_copy);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const linda::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const linda::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

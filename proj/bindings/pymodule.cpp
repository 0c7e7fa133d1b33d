// Python bindings for the core operations: file-based analysis, in-memory
// analysis on numpy arrays, and the simulation harness.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linda/pipeline.hpp"
#include "linda/simulate.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace py = pybind11;

namespace {

linda::AnalyzeOptions make_options(const std::string& zero, bool bias, double q,
                                   std::optional<double> bandwidth, int threads) {
    linda::AnalyzeOptions opt;
    opt.zero = linda::parse_zero_strategy(zero);
    opt.bias_correction = bias;
    opt.target_fdr = q;
    opt.bandwidth_override = bandwidth;
    opt.threads = threads;
    return opt;
}

py::dict result_to_dict(const linda::LindaResult& res) {
    py::dict out;
    out["method"] = res.method;
    out["n"] = res.n;
    out["m"] = res.m;
    out["d"] = res.d;
    out["df"] = res.df_common;
    out["rho_hat"] = res.rho_hat;
    out["bias_corrected"] = res.bias_corrected;
    out["bias_shift"] = res.bias.alpha_tilde_shift;
    out["bandwidth"] = res.bias.bandwidth;
    out["zero_used"] = linda::zero_strategy_name(res.zero_used);
    if (res.libsize_test_p) out["libsize_test_p"] = *res.libsize_test_p;
    out["target_fdr"] = res.target_fdr;
    py::list rows;
    for (const auto& r : res.rows) {
        py::dict row;
        row["taxon"] = r.taxon;
        row["coef"] = r.alpha_hat;
        row["stderr"] = r.stderr_hat;
        row["t_stat"] = r.t_stat;
        row["df"] = r.df;
        row["pvalue"] = r.p;
        row["padj"] = r.p_adj;
        row["reject"] = r.reject;
        row["flags"] = r.flags;
        rows.append(row);
    }
    out["rows"] = rows;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Differential-abundance analysis for compositional count data";

    mod.def(
        "analyze_files",
        [](const std::string& counts, const std::string& metadata, const std::string& formula,
           const std::string& zero, bool bias, double q, std::optional<double> bandwidth,
           int threads) {
            const auto opt = make_options(zero, bias, q, bandwidth, threads);
            return result_to_dict(linda::analyze_files(counts, metadata, formula, opt));
        },
        py::arg("counts"), py::arg("metadata"), py::arg("formula"),
        py::arg("zero") = "adaptive", py::arg("bias") = true, py::arg("q") = 0.05,
        py::arg("bandwidth") = std::nullopt, py::arg("threads") = 1,
        "Load a count table and metadata, run the full pipeline, return a dict.");

    mod.def(
        "analyze_matrix",
        [](const Eigen::MatrixXd& counts, const std::vector<std::string>& taxa,
           const Eigen::VectorXd& u, std::optional<Eigen::MatrixXd> confounders,
           std::optional<std::vector<int>> group, const std::string& zero, bool bias, double q,
           std::optional<double> bandwidth, int threads) {
            linda::CountTable table;
            table.counts = counts;
            const auto m = static_cast<std::size_t>(counts.rows());
            if (taxa.size() != m)
                throw std::invalid_argument("taxa list length must equal the count row count");
            table.taxa_ids = taxa;
            table.sample_ids.reserve(static_cast<std::size_t>(counts.cols()));
            for (Eigen::Index s = 0; s < counts.cols(); ++s)
                table.sample_ids.push_back("S" + std::to_string(s));
            table.validate();
            const Eigen::MatrixXd C =
                confounders ? *confounders : Eigen::MatrixXd(counts.cols(), 0);
            const std::vector<int> g = group ? *group : std::vector<int>{};
            const auto design = linda::make_design(u, C, g);
            const auto opt = make_options(zero, bias, q, bandwidth, threads);
            return result_to_dict(
                linda::analyze_design(table, design, !g.empty(), opt));
        },
        py::arg("counts"), py::arg("taxa"), py::arg("u"), py::arg("confounders") = std::nullopt,
        py::arg("group") = std::nullopt, py::arg("zero") = "adaptive", py::arg("bias") = true,
        py::arg("q") = 0.05, py::arg("bandwidth") = std::nullopt, py::arg("threads") = 1,
        "Run the core pipeline on an in-memory taxa-by-samples count matrix. "
        "Passing a group index per sample switches to the random-intercept model.");

    mod.def(
        "simulate_metrics",
        [](const std::string& setting, const std::string& design, int m, int n, double gamma,
           int mu_index, int replicates, std::uint64_t seed, const std::string& method,
           const std::string& zero, bool bias, double q, int threads) {
            linda::SimConfig cfg;
            cfg.setting = linda::parse_setting(setting);
            cfg.design = linda::parse_cov_design(design);
            cfg.m = m;
            cfg.n = n;
            cfg.gamma = gamma;
            cfg.mu_index = mu_index;
            cfg.replicates = replicates;
            cfg.seed = seed;
            const linda::Method meth =
                method == "lmm" ? linda::Method::lmm : linda::Method::ols;
            const auto met = linda::run_replications(
                cfg, meth, linda::parse_zero_strategy(zero), bias, q, threads);
            py::dict out;
            out["fdr"] = met.fdr_mean;
            out["tpr"] = met.tpr_mean;
            out["fdr_ci_halfwidth"] = met.fdr_ci_halfwidth;
            out["failed"] = met.failed_replicates;
            out["imputed"] = met.imputation_replicates;
            return out;
        },
        py::arg("setting") = "S0", py::arg("design") = "C0", py::arg("m") = 500,
        py::arg("n") = 50, py::arg("gamma") = 0.05, py::arg("mu_index") = 6,
        py::arg("replicates") = 100, py::arg("seed") = 1, py::arg("method") = "ols",
        py::arg("zero") = "adaptive", py::arg("bias") = true, py::arg("q") = 0.05,
        py::arg("threads") = 1,
        "Run replicated synthetic evaluations and return FDR/TPR summaries.");
}

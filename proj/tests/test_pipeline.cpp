// End-to-end analysis pipeline: core analyze_design on simulated counts,
// the mixed-model path, degenerate handling, and the file front end.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "linda/design.hpp"
#include "linda/common.hpp"
#include "linda/pipeline.hpp"
#include "linda/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace linda;

namespace {

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content) : path("pipe_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

SimInstance standard_instance(Setting setting, int m, int n, double gamma, std::uint64_t seed) {
    SimConfig config;
    config.setting = setting;
    config.design = CovDesign::C0;
    config.m = m;
    config.n = n;
    config.gamma = gamma;
    config.mu_index = 6;
    config.seed = seed;
    auto params = make_default_params(m, seed);
    return gen_instance(config, params, 0);
}

AnalyzeOptions pseudo_options(bool bias_on = true) {
    AnalyzeOptions opt;
    opt.zero = ZeroStrategy::pseudo;
    opt.bias_correction = bias_on;
    return opt;
}

} // namespace

TEST_CASE("fixed-effect analysis produces a coherent result") {
    auto inst = standard_instance(Setting::S0, 80, 40, 0.15, 101);
    auto design = make_design(inst.u, inst.C, inst.group_index);
    auto result = analyze_design(inst.counts, design, false, pseudo_options());

    CHECK(result.method == "ols");
    CHECK(result.n == 40);
    CHECK(result.m == 80);
    CHECK(result.d == 0);
    CHECK(result.df_common == 38.0);
    CHECK(result.rho_hat > 0.0);
    CHECK(result.zero_used == ZeroStrategy::pseudo);
    CHECK(result.bias_corrected);
    CHECK(std::isfinite(result.bias.alpha_tilde_shift));
    REQUIRE(result.rows.size() == 80);

    int checked = 0;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        CHECK(row.taxon == inst.counts.taxa_ids[i]);
        if (row.degenerate) continue;
        ++checked;
        CHECK(row.stderr_hat > 0.0);
        CHECK(row.df == 38.0);
        CHECK(row.p >= 0.0);
        CHECK(row.p <= 1.0);
        CHECK(row.p_adj >= row.p - 1e-15);
        CHECK(row.p_adj <= 1.0);
        CHECK(row.t_stat == doctest::Approx(row.alpha_hat / row.stderr_hat).epsilon(1e-10));
        CHECK(row.reject == (row.p_adj <= result.target_fdr));
    }
    CHECK(checked > 70); // simulated data should be almost entirely regular
}

TEST_CASE("bias correction shifts every coefficient by the same constant") {
    auto inst = standard_instance(Setting::S0, 60, 30, 0.2, 7);
    auto design = make_design(inst.u, inst.C, inst.group_index);
    auto on = analyze_design(inst.counts, design, false, pseudo_options(true));
    auto off = analyze_design(inst.counts, design, false, pseudo_options(false));

    CHECK(off.bias.alpha_tilde_shift == 0.0);
    CHECK(on.bias.bandwidth > 0.0);
    const double shift = on.bias.alpha_tilde_shift;
    for (std::size_t i = 0; i < on.rows.size(); ++i) {
        if (on.rows[i].degenerate) continue;
        CHECK(std::abs((on.rows[i].alpha_hat - off.rows[i].alpha_hat) - shift) < 1e-12);
        // The spread statistics do not depend on the shift.
        CHECK(on.rows[i].stderr_hat == off.rows[i].stderr_hat);
    }
}

TEST_CASE("adaptive zero handling stamps its decision into the result") {
    auto inst = standard_instance(Setting::S0, 50, 24, 0.1, 19);
    auto design = make_design(inst.u, inst.C, inst.group_index);
    AnalyzeOptions opt;
    opt.zero = ZeroStrategy::adaptive;
    auto result = analyze_design(inst.counts, design, false, opt);
    CHECK(result.zero_requested == ZeroStrategy::adaptive);
    const bool used_known = result.zero_used == ZeroStrategy::pseudo ||
                            result.zero_used == ZeroStrategy::imputation;
    CHECK(used_known);
    REQUIRE(result.libsize_test_p.has_value());
    CHECK(*result.libsize_test_p >= 0.0);
    CHECK(*result.libsize_test_p <= 1.0);
    // The decision follows the documented 10% rule.
    if (*result.libsize_test_p < 0.1)
        CHECK(result.zero_used == ZeroStrategy::imputation);
    else
        CHECK(result.zero_used == ZeroStrategy::pseudo);
}

TEST_CASE("mixed-model analysis runs on replicate-sampled data") {
    auto inst = standard_instance(Setting::S8_2, 60, 24, 0.1, 23);
    REQUIRE_FALSE(inst.group_index.empty());
    auto design = make_design(inst.u, inst.C, inst.group_index);
    auto result = analyze_design(inst.counts, design, true, pseudo_options());

    CHECK(result.method == "lmm");
    CHECK(std::isnan(result.df_common));
    CHECK(std::isnan(result.rho_hat));
    REQUIRE(result.rows.size() == 60);
    // u is constant inside each of the 12 subjects, so a positive variance
    // ratio uses the between-group rule G - d - 2 = 10 and a boundary fit
    // collapses to n - d - 2 = 22.
    const double df_between = 10.0;
    const double df_collapse = 22.0;
    int regular = 0;
    for (const auto& row : result.rows) {
        if (row.degenerate) continue;
        ++regular;
        CHECK(row.stderr_hat > 0.0);
        CHECK(row.p >= 0.0);
        CHECK(row.p <= 1.0);
        CHECK(row.df > 0.0);
        const bool df_known = row.df == df_between || row.df == df_collapse;
        CHECK(df_known);
    }
    CHECK(regular > 50);
}

TEST_CASE("collapsed mixed-model rows match the fixed-effect analysis") {
    // Attach artificial pairs to data that has no real group structure:
    // taxa whose variance-ratio estimate lands on the zero boundary must
    // reproduce the plain least-squares statistics exactly (bias off keeps
    // rows comparable; the adjusted p depends on the whole family).
    auto inst = standard_instance(Setting::S0, 40, 24, 0.1, 31);
    std::vector<int> pairs(24);
    for (int s = 0; s < 24; ++s) pairs[static_cast<std::size_t>(s)] = s / 2;
    // Re-pair samples so each pair mixes treatments when possible; the
    // grouping is deliberately meaningless.
    auto design_lmm = make_design(inst.u, inst.C, pairs);
    auto design_ols = make_design(inst.u, inst.C);
    auto lmm = analyze_design(inst.counts, design_lmm, true, pseudo_options(false));
    auto ols = analyze_design(inst.counts, design_ols, false, pseudo_options(false));

    const double df_collapse = 24.0 - 0.0 - 2.0;
    int collapsed = 0;
    for (std::size_t i = 0; i < lmm.rows.size(); ++i) {
        if (lmm.rows[i].degenerate || ols.rows[i].degenerate) continue;
        if (lmm.rows[i].df != df_collapse) continue;
        ++collapsed;
        CHECK(lmm.rows[i].alpha_hat == doctest::Approx(ols.rows[i].alpha_hat).epsilon(1e-9));
        CHECK(lmm.rows[i].stderr_hat == doctest::Approx(ols.rows[i].stderr_hat).epsilon(1e-9));
        CHECK(lmm.rows[i].t_stat == doctest::Approx(ols.rows[i].t_stat).epsilon(1e-8));
        CHECK(lmm.rows[i].p == doctest::Approx(ols.rows[i].p).epsilon(1e-8));
    }
    CHECK(collapsed > 0); // meaningless grouping collapses at least some taxa
}

TEST_CASE("the mixed model requires a grouped design") {
    auto inst = standard_instance(Setting::S0, 20, 12, 0.1, 3);
    auto design = make_design(inst.u, inst.C);
    CHECK_THROWS_AS((void)analyze_design(inst.counts, design, true, pseudo_options()),
                    ValidationError);
}

TEST_CASE("exactly fitted taxa are excluded from the adjusted family") {
    // Taxon t0 is engineered to take one CLR value per treatment arm
    // (within-arm permutations of the other taxa keep each column's
    // geometric mean fixed), so its residual variance is exactly zero.
    CountTable counts;
    counts.taxa_ids = {"t0", "t1", "t2", "t3"};
    counts.sample_ids = {"s1", "s2", "s3", "s4", "s5", "s6"};
    counts.counts.resize(4, 6);
    // u = 0 arm: t0 = 100, others permute (10, 40, 160).
    // u = 1 arm: t0 = 50, others permute (20, 80, 320).
    counts.counts << 100, 100, 100, 50, 50, 50,
                     10, 40, 160, 20, 80, 320,
                     40, 160, 10, 80, 320, 20,
                     160, 10, 40, 320, 20, 80;
    Eigen::VectorXd u(6);
    u << 0, 0, 0, 1, 1, 1;
    auto design = make_design(u, Eigen::MatrixXd(6, 0));
    auto result = analyze_design(counts, design, false, pseudo_options());

    REQUIRE(result.rows.size() == 4);
    const auto& deg = result.rows[0];
    CHECK(deg.degenerate);
    CHECK(std::isnan(deg.p));
    CHECK(std::isnan(deg.p_adj));
    CHECK_FALSE(deg.reject);
    CHECK(deg.flags.find("degenerate") != std::string::npos);

    // The remaining three rows form the whole family: re-adjusting their
    // raw p-values alone must reproduce the reported adjusted values.
    std::vector<double> p;
    for (int i = 1; i < 4; ++i) {
        CHECK_FALSE(result.rows[static_cast<std::size_t>(i)].degenerate);
        p.push_back(result.rows[static_cast<std::size_t>(i)].p);
    }
    auto bh = bh_adjust(p, result.target_fdr);
    for (int i = 1; i < 4; ++i) {
        CHECK(result.rows[static_cast<std::size_t>(i)].p_adj ==
              doctest::Approx(bh.p_adj[static_cast<std::size_t>(i - 1)]).epsilon(1e-12));
    }
}

TEST_CASE("a table where every taxon fits exactly still completes") {
    // Both arms internally identical: every CLR row takes two values, every
    // fit is exact, the family is empty, and nothing is rejected.
    CountTable counts;
    counts.taxa_ids = {"t0", "t1", "t2"};
    counts.sample_ids = {"s1", "s2", "s3", "s4", "s5", "s6"};
    counts.counts.resize(3, 6);
    counts.counts << 10, 10, 10, 20, 20, 20,
                     40, 40, 40, 10, 10, 10,
                     160, 160, 160, 80, 80, 80;
    Eigen::VectorXd u(6);
    u << 0, 0, 0, 1, 1, 1;
    auto design = make_design(u, Eigen::MatrixXd(6, 0));
    auto result = analyze_design(counts, design, false, pseudo_options());
    for (const auto& row : result.rows) {
        CHECK(row.degenerate);
        CHECK(std::isnan(row.p));
        CHECK_FALSE(row.reject);
    }
}

TEST_CASE("the file front end reconciles, filters, and analyzes") {
    // t_rare appears in one sample only (prevalence 1/11 after the small
    // sample is dropped) and s_small has a library size under the floor.
    std::ostringstream counts;
    counts << "taxon";
    for (int s = 1; s <= 11; ++s) counts << "\ts" << s;
    counts << "\ts_small\n";
    std::mt19937_64 rng(77);
    const char* taxa[] = {"tA", "tB", "tC", "tD", "tE"};
    for (int i = 0; i < 5; ++i) {
        counts << taxa[i];
        for (int s = 0; s < 11; ++s)
            counts << '\t' << (200 + static_cast<int>(rng() % 400));
        counts << "\t3\n"; // s_small stays far below the libsize floor
    }
    counts << "t_rare\t900";
    for (int s = 1; s < 11; ++s) counts << "\t0";
    counts << "\t1\n";

    std::ostringstream meta;
    meta << "sample\tu\tage\n";
    for (int s = 11; s >= 1; --s) // reversed order: reconciliation must fix it
        meta << "s" << s << "\t" << (s % 2 ? "case" : "control") << "\t" << (30 + s) << "\n";
    meta << "s_small\tcase\t55\n";

    TempFile cf("counts.tsv", counts.str());
    TempFile mf("meta.tsv", meta.str());
    AnalyzeOptions opt;
    opt.zero = ZeroStrategy::pseudo;
    auto result = analyze_files(cf.path, mf.path, "u + age", opt);

    CHECK(result.n == 11);       // s_small dropped by the libsize floor
    CHECK(result.m == 5);        // t_rare dropped by the prevalence floor
    CHECK(result.d == 1);        // age
    CHECK(result.method == "ols");
    REQUIRE(result.winsor_quantile.has_value());
    CHECK(*result.winsor_quantile == 0.97);
    REQUIRE(result.min_libsize.has_value());
    CHECK(*result.min_libsize == 1000);
    REQUIRE(result.min_prevalence.has_value());
    CHECK(*result.min_prevalence == 0.10);
    for (const auto& row : result.rows) CHECK(row.taxon != "t_rare");
}

TEST_CASE("a random-intercept formula routes to the mixed model") {
    std::ostringstream counts;
    counts << "taxon";
    for (int s = 1; s <= 12; ++s) counts << "\ts" << s;
    counts << "\n";
    std::mt19937_64 rng(13);
    for (int i = 0; i < 6; ++i) {
        counts << "t" << i;
        for (int s = 0; s < 12; ++s) counts << '\t' << (300 + static_cast<int>(rng() % 500));
        counts << "\n";
    }
    std::ostringstream meta;
    meta << "sample\tu\tsubject\n";
    for (int s = 1; s <= 12; ++s)
        meta << "s" << s << "\t" << (s % 2 ? "t" : "c") << "\tsubj" << ((s - 1) / 2) << "\n";

    TempFile cf("counts_lmm.tsv", counts.str());
    TempFile mf("meta_lmm.tsv", meta.str());
    AnalyzeOptions opt;
    opt.zero = ZeroStrategy::pseudo;
    auto result = analyze_files(cf.path, mf.path, "u | subject", opt);
    CHECK(result.method == "lmm");
    CHECK(result.n == 12);
    CHECK(result.m == 6);
    CHECK(result.d == 0);
}

TEST_CASE("front-end failures carry the offending identifiers") {
    TempFile cf("counts_bad.tsv", "taxon\ts1\ts2\ns\tt1\t5\n");
    TempFile mf("meta_bad.tsv", "sample\tu\ns1\ta\ns2\tb\n");
    AnalyzeOptions opt;
    CHECK_THROWS_AS((void)analyze_files(cf.path, mf.path, "u", opt), ValidationError);
    CHECK_THROWS_AS((void)analyze_files("no_such_file.tsv", mf.path, "u", opt),
                    ValidationError);
}

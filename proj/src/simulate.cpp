#include "linda/simulate.hpp"

#include "linda/common.hpp"
#include "linda/design.hpp"
#include "linda/parallel.hpp"
#include "linda/tsv.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace linda {

namespace {

constexpr double kLibsizeDispersion = 5.3;
constexpr long long kLibsizeFloor = 50;
constexpr double kDefaultLibsizeMean = 7645.0;
constexpr double kRareCutoff = 0.005;

bool is_lognormal_family(Setting s) {
    switch (s) {
    case Setting::S0:
    case Setting::S1:
    case Setting::S2:
    case Setting::S4:
    case Setting::S5:
    case Setting::S6:
    case Setting::S8_1:
    case Setting::S8_2:
        return true;
    default:
        return false;
    }
}

bool is_grouped(Setting s) { return s == Setting::S8_1 || s == Setting::S8_2; }

double libsize_mean(Setting setting, double u_s) {
    switch (setting) {
    case Setting::S4:
        return 1500.0;
    case Setting::S6:
        return u_s == 0.0 ? 5000.0 : 50000.0;
    default:
        return kDefaultLibsizeMean;
    }
}

// Lower Cholesky factor of one S2 correlation block: two equal sub-blocks
// with +0.5 within and -0.5 across; smallest eigenvalue is 0.5, so the
// factorization always succeeds.
Eigen::MatrixXd s2_block_chol(int block) {
    const int half = block / 2;
    Eigen::MatrixXd cov(block, block);
    for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) {
            if (i == j) {
                cov(i, j) = 1.0;
            } else {
                const bool same_half = (i < half) == (j < half);
                cov(i, j) = same_half ? 0.5 : -0.5;
            }
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericError("correlation block is not positive definite");
    return llt.matrixL();
}

// Per-taxon fixed-effect mean without the baseline: u_s * alpha_i + c_s' beta_i.
double fixed_shift(const SimTruth& truth, const TaxonParams& params, const Eigen::VectorXd& u,
                   const Eigen::MatrixXd& C, int i, int s) {
    double v = u(s) * truth.alpha(i);
    for (int k = 0; k < C.cols(); ++k) v += C(s, k) * params.confounder_coefs(i, k);
    return v;
}

} // namespace

Setting parse_setting(const std::string& name) {
    if (name == "S0") return Setting::S0;
    if (name == "S1") return Setting::S1;
    if (name == "S2") return Setting::S2;
    if (name == "S3") return Setting::S3;
    if (name == "S4") return Setting::S4;
    if (name == "S5") return Setting::S5;
    if (name == "S6") return Setting::S6;
    if (name == "S7") return Setting::S7;
    if (name == "S8.1" || name == "S8_1") return Setting::S8_1;
    if (name == "S8.2" || name == "S8_2") return Setting::S8_2;
    throw ValidationError("unknown setting '" + name + "' (expected S0..S7, S8.1, S8.2)");
}

std::string setting_name(Setting s) {
    switch (s) {
    case Setting::S0: return "S0";
    case Setting::S1: return "S1";
    case Setting::S2: return "S2";
    case Setting::S3: return "S3";
    case Setting::S4: return "S4";
    case Setting::S5: return "S5";
    case Setting::S6: return "S6";
    case Setting::S7: return "S7";
    case Setting::S8_1: return "S8.1";
    case Setting::S8_2: return "S8.2";
    }
    return "?";
}

CovDesign parse_cov_design(const std::string& name) {
    if (name == "C0") return CovDesign::C0;
    if (name == "C1") return CovDesign::C1;
    if (name == "C2") return CovDesign::C2;
    throw ValidationError("unknown covariate design '" + name + "' (expected C0, C1, C2)");
}

std::string cov_design_name(CovDesign c) {
    switch (c) {
    case CovDesign::C0: return "C0";
    case CovDesign::C1: return "C1";
    case CovDesign::C2: return "C2";
    }
    return "?";
}

void SimConfig::validate() const {
    if (m < 3) throw ValidationError("simulation requires at least 3 taxa");
    if (n < 4) throw ValidationError("simulation requires at least 4 samples");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
    if (mu_index < 1 || mu_index > 6) throw ValidationError("effect index must be in 1..6");
    if (replicates < 1) throw ValidationError("replicates must be at least 1");
    if (setting != Setting::S0 && design != CovDesign::C0)
        throw ValidationError("setting " + setting_name(setting) +
                              " is defined for covariate design C0 only");
    if (setting == Setting::S2 && m % 50 != 0)
        throw ValidationError("S2 requires the taxa count to be divisible by 50");
    if (setting == Setting::S8_1 && n % 2 != 0)
        throw ValidationError("S8.1 pairs samples; the sample count must be even");
    if (setting == Setting::S8_2) {
        const int per = n == 200 ? 4 : 2;
        if (n % per != 0)
            throw ValidationError("S8.2 requires the sample count to be divisible by " +
                                  std::to_string(per));
    }
}

Rng make_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t a, std::uint32_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream, a, b};
    return Rng(seq);
}

TaxonParams make_default_params(int m, std::uint64_t seed) {
    if (m < 2) throw ValidationError("parameter generation requires at least 2 taxa");
    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> base(0.0, 3.0);
    std::gamma_distribution<double> shape3(3.0, 1.0);
    std::normal_distribution<double> unit(0.0, 1.0);
    TaxonParams p;
    p.beta0.resize(m);
    p.sigma2.resize(m);
    p.confounder_coefs.resize(m, 2);
    for (int i = 0; i < m; ++i) p.beta0(i) = base(rng);
    for (int i = 0; i < m; ++i) {
        double v = 0.0;
        do {
            v = 4.0 / shape3(rng); // inverse-gamma(shape 3, scale 4), mean 2
        } while (!(v >= 0.1 && v <= 20.0));
        p.sigma2(i) = v;
    }
    for (int i = 0; i < m; ++i) {
        p.confounder_coefs(i, 0) = 1.0 + unit(rng);
        p.confounder_coefs(i, 1) = 2.0 + unit(rng);
    }
    return p;
}

TaxonParams load_params_file(const std::string& path, int m) {
    const std::string bytes = read_file_bytes(path);
    std::istringstream in(bytes);
    const auto rows = read_delimited(in, delimiter_for_path(path, {}), path);
    if (rows.size() < 2) throw ValidationError("parameter file " + path + " has no data rows");
    const auto& header = rows.front();
    int col_beta0 = -1, col_sigma2 = -1;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        if (header[j] == "beta0") col_beta0 = j;
        if (header[j] == "sigma2") col_sigma2 = j;
    }
    if (col_beta0 < 0 || col_sigma2 < 0)
        throw ValidationError("parameter file must have columns 'beta0' and 'sigma2'");
    const int rows_n = static_cast<int>(rows.size()) - 1;
    if (rows_n != m)
        throw ValidationError("parameter file has " + std::to_string(rows_n) +
                              " rows but the configuration requests " + std::to_string(m) +
                              " taxa");
    TaxonParams p;
    p.beta0.resize(m);
    p.sigma2.resize(m);
    for (int i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i) + 1];
        if (static_cast<int>(r.size()) <= std::max(col_beta0, col_sigma2))
            throw ValidationError("parameter file row " + std::to_string(i + 2) + " is too short");
        p.beta0(i) = parse_double(r[col_beta0], "beta0 row " + std::to_string(i + 2));
        p.sigma2(i) = parse_double(r[col_sigma2], "sigma2 row " + std::to_string(i + 2));
        if (!(p.sigma2(i) > 0.0) || !std::isfinite(p.sigma2(i)) || !std::isfinite(p.beta0(i)))
            throw ValidationError("parameter file row " + std::to_string(i + 2) +
                                  " has non-positive or non-finite values");
    }
    return p;
}

void gen_covariates(CovDesign design, int n, Rng& rng, Eigen::VectorXd& u, Eigen::MatrixXd& C) {
    if (n < 4) throw ValidationError("covariate generation requires at least 4 samples");
    u.resize(n);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> unit(0.0, 1.0);
    switch (design) {
    case CovDesign::C0:
        C.resize(n, 0);
        for (int s = 0; s < n; ++s) u(s) = coin(rng) ? 1.0 : 0.0;
        break;
    case CovDesign::C1:
        C.resize(n, 0);
        for (int s = 0; s < n; ++s) u(s) = unit(rng);
        break;
    case CovDesign::C2: {
        C.resize(n, 2);
        for (int s = 0; s < n; ++s) C(s, 0) = coin(rng) ? 1.0 : -1.0;
        for (int s = 0; s < n; ++s) C(s, 1) = unit(rng);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < n; ++s) {
            const double p = 1.0 / (1.0 + std::exp(-0.5 * C(s, 0) - 0.5 * C(s, 1)));
            u(s) = unif(rng) < p ? 1.0 : 0.0;
        }
        break;
    }
    }
}

double effect_size(double mu, double pi_bar, int n) {
    if (!(mu > 0.0)) throw ValidationError("effect size multiplier must be positive");
    if (!(pi_bar > 0.0 && pi_bar < 1.0))
        throw ValidationError("baseline mean proportion must lie in (0, 1)");
    const double base = n == 200 ? mu : 2.0 * mu;
    if (pi_bar > kRareCutoff) return std::log(base);
    return std::log(base * std::cbrt(kRareCutoff / pi_bar));
}

long long nb_draw(Rng& rng, double mean_value, double size) {
    if (!(mean_value > 0.0) || !(size > 0.0))
        throw ValidationError("negative binomial needs positive mean and size");
    // Poisson mixed over gamma(shape=size, scale=mean/size) has the target
    // (mean, size) law.
    std::gamma_distribution<double> g(size, mean_value / size);
    const double lambda = g(rng);
    if (lambda <= 0.0) return 0;
    std::poisson_distribution<long long> pois(lambda);
    return pois(rng);
}

void multinomial_draw(Rng& rng, const Eigen::VectorXd& weights, long long N,
                      Eigen::Ref<Eigen::VectorXd> out) {
    const int m = static_cast<int>(weights.size());
    double rest = 0.0;
    for (int i = 0; i < m; ++i) {
        if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
            throw ValidationError("multinomial weights must be finite and non-negative");
        rest += weights(i);
    }
    if (!(rest > 0.0)) throw ValidationError("sample has all-zero abundance");
    long long remaining = N;
    for (int i = 0; i < m; ++i) {
        if (i == m - 1) {
            out(i) = static_cast<double>(remaining);
            break;
        }
        if (remaining == 0 || weights(i) <= 0.0) {
            out(i) = 0.0;
            rest -= weights(i);
            continue;
        }
        double p = weights(i) / rest;
        p = std::min(1.0, std::max(0.0, p));
        long long draw;
        if (p >= 1.0) {
            draw = remaining;
        } else {
            std::binomial_distribution<long long> bin(remaining, p);
            draw = bin(rng);
        }
        out(i) = static_cast<double>(draw);
        remaining -= draw;
        rest -= weights(i);
        if (rest <= 0.0 && remaining > 0) {
            // Numerical residue: the conditional probability should have
            // reached 1 before the weight mass ran out.
            out(i) += static_cast<double>(remaining);
            remaining = 0;
        }
    }
}

namespace {

// Draws the log-normal-family noise matrix (standard normal entries,
// row-major order; S2 applies the block Cholesky per sample column).
Eigen::MatrixXd draw_noise(Setting setting, int m, int n, Rng& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd z(m, n);
    for (int i = 0; i < m; ++i)
        for (int s = 0; s < n; ++s) z(i, s) = unit(rng);
    if (setting != Setting::S2) return z;
    const int block = m / 25;
    const Eigen::MatrixXd L = s2_block_chol(block);
    Eigen::MatrixXd eps(m, n);
    for (int s = 0; s < n; ++s)
        for (int b = 0; b < 25; ++b)
            eps.col(s).segment(b * block, block) = L * z.col(s).segment(b * block, block);
    return eps;
}

Eigen::VectorXd softmax_eta(const Eigen::VectorXd& beta0) {
    const double mx = beta0.maxCoeff();
    Eigen::VectorXd e = (beta0.array() - mx).exp();
    e /= e.sum();
    return e * (1.0 / 0.003 - 1.0);
}

} // namespace

Eigen::MatrixXd gen_abundances(Setting setting, const TaxonParams& params, const SimTruth& truth,
                               const Eigen::VectorXd& u, const Eigen::MatrixXd& C,
                               const std::vector<int>& group_index, Rng& rng) {
    const int m = static_cast<int>(params.beta0.size());
    const int n = static_cast<int>(u.size());
    if (setting == Setting::S7)
        throw ValidationError("S7 generates counts directly; draw a full instance instead");
    Eigen::MatrixXd X(m, n);
    if (setting == Setting::S3) {
        const Eigen::VectorXd eta0 = softmax_eta(params.beta0);
        for (int i = 0; i < m; ++i) {
            for (int s = 0; s < n; ++s) {
                const double shape = eta0(i) * std::exp(fixed_shift(truth, params, u, C, i, s));
                if (shape <= 0.0) {
                    X(i, s) = 0.0;
                    continue;
                }
                std::gamma_distribution<double> g(shape, 1.0);
                X(i, s) = g(rng);
            }
        }
        return X;
    }
    if (!is_lognormal_family(setting)) throw ValidationError("unknown abundance setting");

    const Eigen::MatrixXd eps = draw_noise(setting, m, n, rng);
    Eigen::MatrixXd intercepts; // m x G, only for grouped settings
    if (is_grouped(setting)) {
        if (group_index.empty()) throw ValidationError("grouped setting requires group labels");
        const int G = 1 + *std::max_element(group_index.begin(), group_index.end());
        intercepts.resize(m, G);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < m; ++i) {
            const double tau2 = unif(rng) * params.sigma2(i);
            const double tau = std::sqrt(tau2);
            for (int g = 0; g < G; ++g) intercepts(i, g) = tau * unit(rng);
        }
    }
    for (int i = 0; i < m; ++i) {
        const double sd = std::sqrt(params.sigma2(i));
        for (int s = 0; s < n; ++s) {
            double mean = params.beta0(i) + fixed_shift(truth, params, u, C, i, s);
            if (intercepts.size() > 0) mean += intercepts(i, group_index[static_cast<std::size_t>(s)]);
            X(i, s) = std::exp(mean + sd * eps(i, s));
        }
    }
    if (setting == Setting::S1) {
        std::bernoulli_distribution zero(0.3);
        for (int i = 0; i < m; ++i)
            for (int s = 0; s < n; ++s)
                if (zero(rng)) X(i, s) = 0.0;
    }
    return X;
}

CountTable sample_counts(const Eigen::MatrixXd& X, Setting setting, const Eigen::VectorXd& u,
                         Rng& rng) {
    const int m = static_cast<int>(X.rows());
    const int n = static_cast<int>(X.cols());
    std::vector<long long> N(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s)
        N[static_cast<std::size_t>(s)] =
            std::max(kLibsizeFloor, nb_draw(rng, libsize_mean(setting, u(s)), kLibsizeDispersion));
    CountTable table;
    table.counts.resize(m, n);
    for (int s = 0; s < n; ++s)
        multinomial_draw(rng, X.col(s), N[static_cast<std::size_t>(s)], table.counts.col(s));
    table.taxa_ids.reserve(static_cast<std::size_t>(m));
    table.sample_ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i) table.taxa_ids.push_back("t" + std::to_string(i + 1));
    for (int s = 0; s < n; ++s) table.sample_ids.push_back("s" + std::to_string(s + 1));
    return table;
}

SimInstance gen_instance(const SimConfig& config, const TaxonParams& params, int replicate) {
    config.validate();
    const int m = config.m;
    const int n = config.n;
    if (static_cast<int>(params.beta0.size()) != m || static_cast<int>(params.sigma2.size()) != m)
        throw ValidationError("parameter vectors do not match the configured taxa count");
    if (config.design == CovDesign::C2 && params.confounder_coefs.rows() != m)
        throw ValidationError("covariate design C2 requires confounder coefficients");
    if (config.setting == Setting::S7 &&
        (params.kappa.size() != m || params.theta.size() != m))
        throw ValidationError("S7 requires kappa and theta parameters");

    Rng rng = make_rng(config.seed, 1, static_cast<std::uint32_t>(config.mu_index),
                       static_cast<std::uint32_t>(replicate));
    SimInstance inst;

    // 1. Covariates (S8 settings impose their own grouping/treatment layout).
    if (config.setting == Setting::S8_1) {
        inst.u.resize(n);
        inst.C.resize(n, 0);
        inst.group_index.resize(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s) {
            inst.group_index[static_cast<std::size_t>(s)] = s / 2;
            inst.u(s) = static_cast<double>(s % 2); // one treated, one control per subject
        }
    } else if (config.setting == Setting::S8_2) {
        const int per = n == 200 ? 4 : 2;
        const int subjects = n / per;
        inst.u.resize(n);
        inst.C.resize(n, 0);
        inst.group_index.resize(static_cast<std::size_t>(n));
        std::bernoulli_distribution coin(0.5);
        for (int g = 0; g < subjects; ++g) {
            const double ug = coin(rng) ? 1.0 : 0.0;
            for (int r = 0; r < per; ++r) {
                const int s = g * per + r;
                inst.group_index[static_cast<std::size_t>(s)] = g;
                inst.u(s) = ug;
            }
        }
    } else {
        gen_covariates(config.design, n, rng, inst.u, inst.C);
    }

    // 2. Effect-free draw -> baseline mean proportions.
    SimTruth null_truth;
    null_truth.H.assign(static_cast<std::size_t>(m), 0);
    null_truth.alpha = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd X0;
    if (config.setting == Setting::S7) {
        X0.resize(m, n);
        for (int i = 0; i < m; ++i) {
            const double mean0 = std::exp(params.kappa(i) * std::log(kDefaultLibsizeMean));
            for (int s = 0; s < n; ++s)
                X0(i, s) = static_cast<double>(nb_draw(rng, mean0, params.theta(i)));
        }
    } else {
        // Baseline excludes effects, random intercepts, and S1 zeroing; the
        // noise model (iid or S2-correlated) matches the setting.
        const Setting base =
            is_grouped(config.setting) || config.setting == Setting::S1 ? Setting::S0
                                                                        : config.setting;
        X0 = gen_abundances(base, params, null_truth, inst.u, inst.C, {}, rng);
    }
    Eigen::VectorXd pi_bar = Eigen::VectorXd::Zero(m);
    for (int s = 0; s < n; ++s) {
        double total = X0.col(s).sum();
        if (total <= 0.0) total = 1.0;
        for (int i = 0; i < m; ++i) pi_bar(i) += X0(i, s) / total;
    }
    pi_bar /= static_cast<double>(n);

    // 3. Differential status, signs, effect sizes.
    inst.truth.H.assign(static_cast<std::size_t>(m), 0);
    inst.truth.alpha = Eigen::VectorXd::Zero(m);
    std::bernoulli_distribution diff(config.gamma);
    for (int i = 0; i < m; ++i) inst.truth.H[static_cast<std::size_t>(i)] = diff(rng) ? 1 : 0;
    std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
    if (config.mixed_signs) {
        std::bernoulli_distribution coin(0.5);
        for (int i = 0; i < m; ++i) sign[static_cast<std::size_t>(i)] = coin(rng) ? 1.0 : -1.0;
    }
    const double mu = config.mu();
    for (int i = 0; i < m; ++i) {
        if (!inst.truth.H[static_cast<std::size_t>(i)]) continue;
        const double p = std::min(1.0 - 1e-12, std::max(1e-12, pi_bar(i)));
        inst.truth.alpha(i) = sign[static_cast<std::size_t>(i)] * effect_size(mu, p, n);
    }

    // 4. Observed data.
    if (config.setting == Setting::S7) {
        std::vector<long long> N(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s)
            N[static_cast<std::size_t>(s)] = std::max(
                kLibsizeFloor, nb_draw(rng, kDefaultLibsizeMean, kLibsizeDispersion));
        CountTable table;
        table.counts.resize(m, n);
        for (int i = 0; i < m; ++i) {
            for (int s = 0; s < n; ++s) {
                const double logN = std::log(static_cast<double>(N[static_cast<std::size_t>(s)]));
                const double mean = std::exp(params.kappa(i) * logN +
                                             fixed_shift(inst.truth, params, inst.u, inst.C, i, s));
                table.counts(i, s) = static_cast<double>(nb_draw(rng, mean, params.theta(i)));
            }
        }
        for (int i = 0; i < m; ++i) table.taxa_ids.push_back("t" + std::to_string(i + 1));
        for (int s = 0; s < n; ++s) table.sample_ids.push_back("s" + std::to_string(s + 1));
        inst.counts = std::move(table);
        return inst;
    }
    const Eigen::MatrixXd X = gen_abundances(config.setting, params, inst.truth, inst.u, inst.C,
                                             inst.group_index, rng);
    inst.counts = sample_counts(X, config.setting, inst.u, rng);
    return inst;
}

SimMetrics run_replications(const SimConfig& config, Method method, ZeroStrategy zero,
                            bool bias_on, double q, int threads) {
    config.validate();
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("target FDR must lie in (0, 1)");

    TaxonParams params = config.param_file.empty()
                             ? make_default_params(config.m, config.seed)
                             : load_params_file(config.param_file, config.m);
    if (config.design == CovDesign::C2 && params.confounder_coefs.rows() != config.m) {
        Rng rng = make_rng(config.seed, 3);
        std::normal_distribution<double> unit(0.0, 1.0);
        params.confounder_coefs.resize(config.m, 2);
        for (int i = 0; i < config.m; ++i) {
            params.confounder_coefs(i, 0) = 1.0 + unit(rng);
            params.confounder_coefs(i, 1) = 2.0 + unit(rng);
        }
    }
    if (config.setting == Setting::S7 && params.kappa.size() != config.m) {
        Rng rng = make_rng(config.seed, 2);
        std::normal_distribution<double> k(1.0, 0.1);
        std::uniform_real_distribution<double> th(0.3, 3.0);
        params.kappa.resize(config.m);
        params.theta.resize(config.m);
        for (int i = 0; i < config.m; ++i) params.kappa(i) = k(rng);
        for (int i = 0; i < config.m; ++i) params.theta(i) = th(rng);
    }

    struct RepOutcome {
        bool ok = false;
        double fdp = 0.0;
        double tpp = 0.0;
        bool imputed = false;
    };
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(config.replicates));
    const bool use_lmm = method == Method::lmm;

    parallel_for(config.replicates, threads, [&](int r) {
        auto& out = outcomes[static_cast<std::size_t>(r)];
        try {
            const SimInstance inst = gen_instance(config, params, r);
            const DesignMatrix dm = make_design(inst.u, inst.C, inst.group_index);
            AnalyzeOptions opt;
            opt.zero = zero;
            opt.bias_correction = bias_on;
            opt.target_fdr = q;
            opt.threads = 1;
            const LindaResult res = analyze_design(inst.counts, dm, use_lmm, opt);
            long long V = 0, R = 0, TP = 0, T = 0;
            for (int i = 0; i < config.m; ++i) {
                const bool truth_i = inst.truth.H[static_cast<std::size_t>(i)] != 0;
                if (truth_i) ++T;
                if (!res.rows[static_cast<std::size_t>(i)].reject) continue;
                ++R;
                if (truth_i) ++TP; else ++V;
            }
            out.fdp = static_cast<double>(V) / static_cast<double>(std::max<long long>(R, 1));
            out.tpp = static_cast<double>(TP) / static_cast<double>(std::max<long long>(T, 1));
            out.imputed = res.zero_used == ZeroStrategy::imputation;
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
        }
    });

    SimMetrics metrics;
    for (const auto& out : outcomes) {
        if (!out.ok) {
            ++metrics.failed_replicates;
            continue;
        }
        metrics.fdp.push_back(out.fdp);
        metrics.tpp.push_back(out.tpp);
        if (out.imputed) ++metrics.imputation_replicates;
    }
    const std::size_t k = metrics.fdp.size();
    if (k > 0) {
        double fsum = 0.0, tsum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            fsum += metrics.fdp[i];
            tsum += metrics.tpp[i];
        }
        metrics.fdr_mean = fsum / static_cast<double>(k);
        metrics.tpr_mean = tsum / static_cast<double>(k);
        if (k > 1) {
            double ss = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double d = metrics.fdp[i] - metrics.fdr_mean;
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(k - 1));
            metrics.fdr_ci_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(k));
        }
    }
    return metrics;
}

} // namespace linda

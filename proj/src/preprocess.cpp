#include "linda/preprocess.hpp"

#include "linda/common.hpp"
#include "linda/parallel.hpp"
#include "linda/stats.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace linda {

ZeroStrategy parse_zero_strategy(const std::string& name) {
    if (name == "pseudo")
        return ZeroStrategy::pseudo;
    if (name == "imputation")
        return ZeroStrategy::imputation;
    if (name == "adaptive")
        return ZeroStrategy::adaptive;
    throw ValidationError("unknown zero-handling strategy: " + name);
}

std::string zero_strategy_name(ZeroStrategy s) {
    switch (s) {
    case ZeroStrategy::pseudo:
        return "pseudo";
    case ZeroStrategy::imputation:
        return "imputation";
    case ZeroStrategy::adaptive:
        return "adaptive";
    }
    return "?";
}

std::vector<long long> library_sizes(const CountTable& counts) {
    std::vector<long long> N(static_cast<std::size_t>(counts.n()));
    for (Eigen::Index s = 0; s < counts.n(); ++s) {
        const double total = counts.counts.col(s).sum();
        if (total <= 0.0)
            throw ValidationError("sample " + counts.sample_ids[static_cast<std::size_t>(s)] +
                                  " has library size 0");
        N[static_cast<std::size_t>(s)] = static_cast<long long>(total);
    }
    return N;
}

double libsize_association_test(const std::vector<long long>& N, const DesignMatrix& design) {
    const Eigen::Index n = design.n();
    if (static_cast<Eigen::Index>(N.size()) != n)
        throw ValidationError("library sizes not aligned with design");
    const int p = design.p();
    if (n <= p)
        throw ValidationError("too few samples for the library-size association test");

    Eigen::VectorXd y(n);
    for (Eigen::Index s = 0; s < n; ++s)
        y(s) = std::log(static_cast<double>(N[static_cast<std::size_t>(s)]));

    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    if (tss <= 1e-12 * static_cast<double>(n))
        return 1.0; // no variation in log library size

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design.Z);
    const Eigen::VectorXd fitted = design.Z * qr.solve(y);
    const double rss = (y - fitted).squaredNorm();
    const double mss = tss - rss;
    const int k = p - 1; // non-intercept block
    const int df2 = static_cast<int>(n) - p;
    if (rss <= 1e-12 * tss)
        return std::numeric_limits<double>::epsilon();
    const double f = (mss / k) / (rss / df2);
    return f_sf(f, static_cast<double>(k), static_cast<double>(df2));
}

namespace {

Eigen::MatrixXd impute_zeros(const CountTable& counts, const std::vector<long long>& N) {
    Eigen::MatrixXd X = counts.counts;
    const Eigen::Index m = counts.m();
    const Eigen::Index n = counts.n();
    for (Eigen::Index i = 0; i < m; ++i) {
        long long max_zero_libsize = 0;
        for (Eigen::Index s = 0; s < n; ++s)
            if (X(i, s) == 0.0)
                max_zero_libsize = std::max(max_zero_libsize, N[static_cast<std::size_t>(s)]);
        if (max_zero_libsize == 0)
            continue; // taxon has no zeros
        for (Eigen::Index s = 0; s < n; ++s)
            if (X(i, s) == 0.0)
                X(i, s) = static_cast<double>(N[static_cast<std::size_t>(s)]) /
                          static_cast<double>(max_zero_libsize);
    }
    return X;
}

} // namespace

PositiveAbundanceMatrix handle_zeros(const CountTable& counts, ZeroStrategy strategy,
                                     const DesignMatrix* design, double adaptive_threshold) {
    PositiveAbundanceMatrix out;
    if (strategy == ZeroStrategy::adaptive) {
        if (!design)
            throw ValidationError("adaptive zero handling needs the design matrix");
        const auto N = library_sizes(counts);
        const double p = libsize_association_test(N, *design);
        out.libsize_test_p = p;
        strategy = p < adaptive_threshold ? ZeroStrategy::imputation : ZeroStrategy::pseudo;
    }
    out.strategy_used = strategy;
    if (strategy == ZeroStrategy::pseudo) {
        out.values = counts.counts.array() + 0.5;
    } else {
        out.values = impute_zeros(counts, library_sizes(counts));
    }
    if (!(out.values.array() > 0.0).all())
        throw NumericError("zero handling left a non-positive abundance");
    return out;
}

ClrMatrix clr_transform(const PositiveAbundanceMatrix& X, int threads) {
    if (!(X.values.array() > 0.0).all())
        throw NumericError("CLR transform requires strictly positive abundances");
    const Eigen::Index m = X.values.rows();
    const Eigen::Index n = X.values.cols();
    ClrMatrix out;
    out.W.resize(m, n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t sidx) {
        const auto s = static_cast<Eigen::Index>(sidx);
        out.W.col(s) = X.values.col(s).array().log();
        out.W.col(s).array() -= out.W.col(s).mean();
    });
    return out;
}

} // namespace linda

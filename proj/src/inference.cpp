#include "linda/inference.hpp"

#include "linda/common.hpp"
#include "linda/stats.hpp"
#include "linda/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace linda {

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> t_statistics(const std::vector<double>& alpha_hat,
                                 const std::vector<TaxonFit>& fits, double rho_hat, int n) {
    if (alpha_hat.size() != fits.size())
        throw ValidationError("coefficient and fit vectors differ in length");
    if (!(rho_hat > 0.0))
        throw ValidationError("rho_hat must be positive");
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<double> T(alpha_hat.size(), nan_v);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (fits[i].degenerate)
            continue;
        T[i] = root_n * alpha_hat[i] / std::sqrt(rho_hat * fits[i].sigma2_hat);
    }
    return T;
}

std::vector<double> p_values(const std::vector<double>& T, double df) {
    if (df < 1.0)
        throw ValidationError("degrees of freedom must be at least 1");
    std::vector<double> p(T.size(), nan_v);
    for (std::size_t i = 0; i < T.size(); ++i)
        if (!std::isnan(T[i]))
            p[i] = t_two_sided_p(T[i], df);
    return p;
}

BhOutput bh_adjust(const std::vector<double>& p, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw ValidationError("target FDR level must lie in (0,1)");
    const std::size_t m = p.size();
    BhOutput out;
    out.p_adj.assign(m, nan_v);
    out.reject.assign(m, 0);
    if (m == 0)
        return out;
    for (double v : p)
        if (std::isnan(v) || v < 0.0 || v > 1.0)
            throw ValidationError("BH input p-values must be defined and lie in [0,1]");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p[a] != p[b] ? p[a] < p[b] : a < b;
    });

    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double candidate =
            std::min(1.0, p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1));
        running = std::min(running, candidate);
        out.p_adj[order[r]] = running;
    }
    for (std::size_t i = 0; i < m; ++i)
        out.reject[i] = out.p_adj[i] <= q ? 1 : 0;
    return out;
}

std::optional<double> fdp_threshold(const std::vector<double>& T, double df, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw ValidationError("target FDR level must lie in (0,1)");
    std::vector<double> abs_t;
    abs_t.reserve(T.size());
    for (double t : T) {
        if (std::isnan(t))
            continue;
        abs_t.push_back(std::fabs(t));
    }
    const std::size_t m = abs_t.size();
    if (m == 0)
        return std::nullopt;
    std::sort(abs_t.begin(), abs_t.end(), std::greater<>());

    std::optional<double> best;
    for (std::size_t k = 0; k < m; ++k) {
        if (k + 1 < m && abs_t[k + 1] == abs_t[k])
            continue; // evaluate once per distinct value, at the tie block end
        const double v = abs_t[k];
        const double fdp =
            2.0 * static_cast<double>(m) * t_cdf(-v, df) / static_cast<double>(k + 1);
        if (fdp <= q)
            best = v; // later candidates are smaller; keep the smallest passing
    }
    return best;
}

namespace {

void put(std::ostream& out, const std::string& key, const std::string& value) {
    out << "# " << key << "=" << value << "\n";
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : "NA";
}

} // namespace

void write_result_tsv(std::ostream& out, const LindaResult& result) {
    put(out, "linda_result", "1");
    put(out, "method", result.method);
    put(out, "n", std::to_string(result.n));
    put(out, "m", std::to_string(result.m));
    put(out, "d", std::to_string(result.d));
    put(out, "df", format_double(result.df_common));
    put(out, "rho_hat", format_double(result.rho_hat));
    put(out, "bias", result.bias_corrected ? "on" : "off");
    put(out, "bias_correction", format_double(result.bias.alpha_tilde_shift));
    put(out, "bias_mode_location", format_double(result.bias.mode_location));
    put(out, "bandwidth", format_double(result.bias.bandwidth));
    put(out, "kde_grid", std::to_string(result.bias.grid_points));
    put(out, "grid_lo", format_double(result.bias.grid_lo));
    put(out, "grid_hi", format_double(result.bias.grid_hi));
    put(out, "zero_requested", zero_strategy_name(result.zero_requested));
    put(out, "zero_used", zero_strategy_name(result.zero_used));
    put(out, "libsize_test_p", opt_str(result.libsize_test_p));
    put(out, "target_fdr", format_double(result.target_fdr));
    put(out, "winsor_quantile", opt_str(result.winsor_quantile));
    put(out, "min_libsize", result.min_libsize ? std::to_string(*result.min_libsize) : "NA");
    put(out, "min_prevalence", opt_str(result.min_prevalence));
    out << "taxon\tcoef\tcoef_log2\tstderr\tt_stat\tdf\tpvalue\tpadj\treject\tflags\n";
    for (const auto& row : result.rows) {
        out << row.taxon << '\t' << format_double(row.alpha_hat) << '\t'
            << format_double(row.alpha_hat / std::log(2.0)) << '\t'
            << format_double(row.stderr_hat) << '\t' << format_double(row.t_stat) << '\t'
            << format_double(row.df) << '\t' << format_double(row.p) << '\t'
            << format_double(row.p_adj) << '\t' << (row.reject ? '1' : '0') << '\t' << row.flags
            << '\n';
    }
}

std::string result_to_string(const LindaResult& result) {
    std::ostringstream out;
    write_result_tsv(out, result);
    return out.str();
}

LindaResult read_result_tsv(std::istream& in, const std::string& source_name) {
    std::map<std::string, std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool saw_columns = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=', 2);
            if (eq == std::string::npos)
                throw ValidationError(source_name + ": malformed header line: " + line);
            header[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find('\t', start);
            if (pos == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (!saw_columns) {
            if (cells.empty() || cells[0] != "taxon")
                throw ValidationError(source_name + ": missing result column header");
            saw_columns = true;
            continue;
        }
        rows.push_back(std::move(cells));
    }
    if (!saw_columns)
        throw ValidationError(source_name + ": not a result file");
    if (header.find("linda_result") == header.end())
        throw ValidationError(source_name + ": missing result signature header");

    auto req = [&](const std::string& key) {
        auto it = header.find(key);
        if (it == header.end())
            throw ValidationError(source_name + ": missing header field " + key);
        return it->second;
    };
    auto opt_double = [&](const std::string& key) -> std::optional<double> {
        const std::string v = req(key);
        if (v == "NA")
            return std::nullopt;
        return parse_double(v, "in header " + key);
    };

    LindaResult result;
    result.method = req("method");
    result.n = static_cast<int>(parse_count(req("n"), "in header n"));
    result.m = static_cast<int>(parse_count(req("m"), "in header m"));
    result.d = static_cast<int>(parse_count(req("d"), "in header d"));
    result.df_common = parse_double(req("df"), "in header df");
    result.rho_hat = parse_double(req("rho_hat"), "in header rho_hat");
    result.bias_corrected = req("bias") == "on";
    result.bias.alpha_tilde_shift = parse_double(req("bias_correction"), "in header");
    result.bias.mode_location = parse_double(req("bias_mode_location"), "in header");
    result.bias.bandwidth = parse_double(req("bandwidth"), "in header");
    result.bias.grid_points = static_cast<int>(parse_count(req("kde_grid"), "in header"));
    result.bias.grid_lo = parse_double(req("grid_lo"), "in header");
    result.bias.grid_hi = parse_double(req("grid_hi"), "in header");
    result.zero_requested = parse_zero_strategy(req("zero_requested"));
    result.zero_used = parse_zero_strategy(req("zero_used"));
    result.libsize_test_p = opt_double("libsize_test_p");
    result.target_fdr = parse_double(req("target_fdr"), "in header target_fdr");
    result.winsor_quantile = opt_double("winsor_quantile");
    if (req("min_libsize") != "NA")
        result.min_libsize = parse_count(req("min_libsize"), "in header min_libsize");
    result.min_prevalence = opt_double("min_prevalence");

    for (const auto& cells : rows) {
        if (cells.size() != 10)
            throw ValidationError(source_name + ": result row has " +
                                  std::to_string(cells.size()) + " cells, expected 10");
        TaxonRecord rec;
        rec.taxon = cells[0];
        rec.alpha_hat = parse_double(cells[1], "in column coef");
        rec.stderr_hat = parse_double(cells[3], "in column stderr");
        rec.t_stat = parse_double(cells[4], "in column t_stat");
        rec.df = parse_double(cells[5], "in column df");
        rec.p = parse_double(cells[6], "in column pvalue");
        rec.p_adj = parse_double(cells[7], "in column padj");
        rec.reject = cells[8] == "1";
        rec.flags = cells[9];
        rec.degenerate = rec.flags.find("degenerate") != std::string::npos;
        result.rows.push_back(std::move(rec));
    }
    return result;
}

} // namespace linda

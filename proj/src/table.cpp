#include "linda/table.hpp"

#include "linda/common.hpp"
#include "linda/stats.hpp"
#include "linda/tsv.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace linda {

namespace {

void check_unique(const std::vector<std::string>& ids, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (id.empty())
            throw ValidationError("empty " + what + " id");
        if (!seen.insert(id).second)
            throw ValidationError("duplicate " + what + " id: " + id);
    }
}

bool parses_as_double(const std::string& token) {
    if (token.empty())
        return false;
    try {
        parse_double(token, "");
        return true;
    } catch (const ValidationError&) {
        return false;
    }
}

bool is_missing(const std::string& token) {
    return token.empty() || token == "NA";
}

} // namespace

void CountTable::validate() const {
    if (static_cast<Eigen::Index>(taxa_ids.size()) != counts.rows() ||
        static_cast<Eigen::Index>(sample_ids.size()) != counts.cols())
        throw ValidationError("count table dimensions do not match id lists");
    check_unique(taxa_ids, "taxon");
    check_unique(sample_ids, "sample");
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
        for (Eigen::Index s = 0; s < counts.cols(); ++s) {
            const double v = counts(i, s);
            if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
                throw ValidationError("invalid count at (" + taxa_ids[static_cast<std::size_t>(i)] +
                                      ", " + sample_ids[static_cast<std::size_t>(s)] + ")");
        }
}

CountTable read_count_table(std::istream& in, char delim, const std::string& source_name) {
    const auto rows = read_delimited(in, delim, source_name);
    if (rows.empty())
        throw ValidationError(source_name + ": empty file");
    const auto& header = rows[0];
    if (header.size() < 2)
        throw ValidationError(source_name + ": no sample columns");
    if (rows.size() < 2)
        throw ValidationError(source_name + ": no taxa rows");

    CountTable table;
    table.sample_ids.assign(header.begin() + 1, header.end());
    const std::size_t n = table.sample_ids.size();
    const std::size_t m = rows.size() - 1;
    table.taxa_ids.reserve(m);
    table.counts.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != n + 1)
            throw ValidationError(source_name + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(n + 1));
        table.taxa_ids.push_back(row[0]);
        for (std::size_t c = 0; c < n; ++c) {
            const std::string context =
                "at (" + row[0] + ", " + table.sample_ids[c] + ") in " + source_name;
            table.counts(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
                static_cast<double>(parse_count(row[c + 1], context));
        }
    }
    check_unique(table.taxa_ids, "taxon");
    check_unique(table.sample_ids, "sample");
    return table;
}

CountTable read_count_table_file(const std::string& path, std::optional<char> delim) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open count table: " + path);
    return read_count_table(in, delimiter_for_path(path, delim), path);
}

MetadataTable read_metadata(std::istream& in, char delim, const std::string& source_name) {
    const auto rows = read_delimited(in, delim, source_name);
    if (rows.empty())
        throw ValidationError(source_name + ": empty file");
    const auto& header = rows[0];
    if (rows.size() < 2)
        throw ValidationError(source_name + ": no sample rows");

    const std::size_t ncols = header.size() - 1;
    const std::size_t nsamples = rows.size() - 1;
    std::vector<std::vector<std::string>> cells(ncols, std::vector<std::string>(nsamples));

    MetadataTable meta;
    meta.sample_ids.reserve(nsamples);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw ValidationError(source_name + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(header.size()));
        meta.sample_ids.push_back(row[0]);
        for (std::size_t c = 0; c < ncols; ++c)
            cells[c][r - 1] = row[c + 1];
    }
    check_unique(meta.sample_ids, "sample");

    std::vector<std::string> names(header.begin() + 1, header.end());
    check_unique(names, "metadata column");
    meta.columns.resize(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        auto& col = meta.columns[c];
        col.name = names[c];
        bool numeric = true;
        for (const auto& token : cells[c])
            if (!is_missing(token) && !parses_as_double(token)) {
                numeric = false;
                break;
            }
        if (numeric) {
            col.kind = VariableKind::continuous;
            col.numeric.reserve(nsamples);
            for (const auto& token : cells[c])
                col.numeric.push_back(is_missing(token)
                                          ? std::numeric_limits<double>::quiet_NaN()
                                          : parse_double(token, "in column " + col.name));
        } else {
            col.kind = VariableKind::categorical;
            col.labels.reserve(nsamples);
            for (const auto& token : cells[c])
                col.labels.push_back(is_missing(token) ? std::string() : token);
        }
    }
    return meta;
}

MetadataTable read_metadata_file(const std::string& path, std::optional<char> delim) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open metadata: " + path);
    return read_metadata(in, delimiter_for_path(path, delim), path);
}

const MetadataTable::Column* MetadataTable::find(const std::string& name) const {
    for (const auto& col : columns)
        if (col.name == name)
            return &col;
    return nullptr;
}

void reconcile(const CountTable& counts, MetadataTable& meta) {
    std::unordered_map<std::string, std::size_t> row_of;
    row_of.reserve(meta.sample_ids.size());
    for (std::size_t r = 0; r < meta.sample_ids.size(); ++r)
        row_of.emplace(meta.sample_ids[r], r);

    std::vector<std::size_t> order;
    order.reserve(counts.sample_ids.size());
    for (const auto& id : counts.sample_ids) {
        auto it = row_of.find(id);
        if (it == row_of.end())
            throw ValidationError("sample missing from metadata: " + id);
        order.push_back(it->second);
    }
    if (meta.sample_ids.size() != counts.sample_ids.size()) {
        std::set<std::string> in_counts(counts.sample_ids.begin(), counts.sample_ids.end());
        for (const auto& id : meta.sample_ids)
            if (!in_counts.count(id))
                throw ValidationError("metadata sample absent from count table: " + id);
    }

    MetadataTable out;
    out.sample_ids = counts.sample_ids;
    out.columns = meta.columns;
    for (auto& col : out.columns) {
        if (col.kind == VariableKind::continuous) {
            std::vector<double> reordered(order.size());
            for (std::size_t r = 0; r < order.size(); ++r)
                reordered[r] = col.numeric[order[r]];
            col.numeric = std::move(reordered);
        } else {
            std::vector<std::string> reordered(order.size());
            for (std::size_t r = 0; r < order.size(); ++r)
                reordered[r] = col.labels[order[r]];
            col.labels = std::move(reordered);
        }
    }
    meta = std::move(out);
}

std::pair<CountTable, MetadataTable> filter_dataset(const CountTable& counts,
                                                    const MetadataTable& meta,
                                                    long long min_libsize,
                                                    double min_prevalence) {
    if (min_libsize < 0 || min_prevalence < 0.0 || min_prevalence > 1.0)
        throw ValidationError("invalid filter thresholds");
    if (meta.n() != counts.n())
        throw ValidationError("metadata not aligned with count table");

    std::vector<Eigen::Index> keep_samples;
    for (Eigen::Index s = 0; s < counts.n(); ++s)
        if (counts.counts.col(s).sum() >= static_cast<double>(min_libsize))
            keep_samples.push_back(s);
    if (keep_samples.empty())
        throw ValidationError("empty dataset after filtering: no sample reaches the library-size threshold");

    const auto n_ret = static_cast<double>(keep_samples.size());
    // Guard against FP overshoot so that e.g. 0.1 * 20 still ceils to 2.
    const double raw = min_prevalence * n_ret;
    const long long need = raw <= 0.0 ? 0 : static_cast<long long>(std::ceil(raw - 1e-9));

    std::vector<Eigen::Index> keep_taxa;
    for (Eigen::Index i = 0; i < counts.m(); ++i) {
        long long present = 0;
        for (const auto s : keep_samples)
            if (counts.counts(i, s) > 0.0)
                ++present;
        if (present >= need)
            keep_taxa.push_back(i);
    }
    if (keep_taxa.empty())
        throw ValidationError("empty dataset after filtering: no taxon reaches the prevalence threshold");

    CountTable out;
    out.counts.resize(static_cast<Eigen::Index>(keep_taxa.size()),
                      static_cast<Eigen::Index>(keep_samples.size()));
    for (std::size_t i = 0; i < keep_taxa.size(); ++i) {
        out.taxa_ids.push_back(counts.taxa_ids[static_cast<std::size_t>(keep_taxa[i])]);
        for (std::size_t s = 0; s < keep_samples.size(); ++s)
            out.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
                counts.counts(keep_taxa[i], keep_samples[s]);
    }
    for (const auto s : keep_samples)
        out.sample_ids.push_back(counts.sample_ids[static_cast<std::size_t>(s)]);

    for (Eigen::Index s = 0; s < out.n(); ++s)
        if (!(out.counts.col(s).array() > 0.0).any())
            throw ValidationError("sample " + out.sample_ids[static_cast<std::size_t>(s)] +
                                  " has no nonzero counts after filtering");

    MetadataTable meta_out;
    meta_out.sample_ids = out.sample_ids;
    meta_out.columns = meta.columns;
    for (auto& col : meta_out.columns) {
        if (col.kind == VariableKind::continuous) {
            std::vector<double> kept;
            kept.reserve(keep_samples.size());
            for (const auto s : keep_samples)
                kept.push_back(col.numeric[static_cast<std::size_t>(s)]);
            col.numeric = std::move(kept);
        } else {
            std::vector<std::string> kept;
            kept.reserve(keep_samples.size());
            for (const auto s : keep_samples)
                kept.push_back(col.labels[static_cast<std::size_t>(s)]);
            col.labels = std::move(kept);
        }
    }
    return {std::move(out), std::move(meta_out)};
}

CountTable winsorize(const CountTable& counts, double quantile) {
    if (!(quantile > 0.5 && quantile <= 1.0))
        throw ValidationError("winsorization quantile must lie in (0.5, 1]");
    CountTable out = counts;
    std::vector<double> row(static_cast<std::size_t>(counts.n()));
    for (Eigen::Index i = 0; i < counts.m(); ++i) {
        for (Eigen::Index s = 0; s < counts.n(); ++s)
            row[static_cast<std::size_t>(s)] = counts.counts(i, s);
        const double q = quantile_type7(row, quantile);
        const double cap = std::ceil(q);
        for (Eigen::Index s = 0; s < counts.n(); ++s)
            if (out.counts(i, s) > q)
                out.counts(i, s) = cap;
    }
    return out;
}

} // namespace linda

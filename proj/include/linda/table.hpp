#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace linda {

// Taxa-by-samples count matrix. Entries are stored as doubles but are
// integral and non-negative; validate() enforces both.
struct CountTable {
    std::vector<std::string> taxa_ids;
    std::vector<std::string> sample_ids;
    Eigen::MatrixXd counts; // m x n

    Eigen::Index m() const { return counts.rows(); }
    Eigen::Index n() const { return counts.cols(); }
    void validate() const;
};

enum class VariableKind { continuous, categorical };

// Sample metadata; one row per sample, columns typed on load. A column is
// continuous iff every non-missing cell parses as a number. Missing cells
// (empty or "NA") are NaN / "" and only rejected when a design uses them.
struct MetadataTable {
    struct Column {
        std::string name;
        VariableKind kind = VariableKind::categorical;
        std::vector<double> numeric;      // continuous columns
        std::vector<std::string> labels;  // categorical columns
    };

    std::vector<std::string> sample_ids;
    std::vector<Column> columns;

    Eigen::Index n() const { return static_cast<Eigen::Index>(sample_ids.size()); }
    const Column* find(const std::string& name) const;
};

CountTable read_count_table(std::istream& in, char delim, const std::string& source_name);
CountTable read_count_table_file(const std::string& path, std::optional<char> delim = {});

MetadataTable read_metadata(std::istream& in, char delim, const std::string& source_name);
MetadataTable read_metadata_file(const std::string& path, std::optional<char> delim = {});

// Reorders metadata rows to the count-table sample order. The two sample
// sets must be identical; offending ids are named otherwise.
void reconcile(const CountTable& counts, MetadataTable& meta);

// Drops samples with library size < min_libsize, then taxa present in
// fewer than ceil(min_prevalence * n_retained) samples; metadata rows are
// dropped in lockstep. Idempotent for fixed thresholds.
std::pair<CountTable, MetadataTable> filter_dataset(const CountTable& counts,
                                                    const MetadataTable& meta,
                                                    long long min_libsize = 1000,
                                                    double min_prevalence = 0.10);

// Caps each row's entries above its type-7 `quantile`-quantile q at
// ceil(q). quantile = 1 is the identity. quantile must lie in (0.5, 1].
CountTable winsorize(const CountTable& counts, double quantile = 0.97);

} // namespace linda

#pragma once

#include "linda/table.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace linda {

struct DesignSpec {
    std::string covariate;                 // covariate of interest
    std::vector<std::string> adjustments;  // may be empty
    std::optional<std::string> random_group;
};

// Formula mini-language: "u", "u + c1 + c2", "u + sex | subject".
// First term is the covariate of interest, the rest are adjustments,
// the optional "| group" names a random-intercept grouping variable.
DesignSpec parse_formula(const std::string& formula);

// Fixed-effect design. Column 0 is u, column 1 the intercept, columns
// 2..d+1 the (dummy-encoded) adjustments; rank(Z) = d + 2 is enforced.
struct DesignMatrix {
    Eigen::MatrixXd Z; // n x (d+2)
    int d = 0;
    std::vector<std::string> colnames;
    std::vector<int> group_index;          // empty unless a random group is set
    std::vector<std::string> group_levels; // level names, lexicographic

    Eigen::Index n() const { return Z.rows(); }
    int p() const { return d + 2; }
    bool has_groups() const { return !group_index.empty(); }
    int group_count() const { return static_cast<int>(group_levels.size()); }
};

DesignMatrix build_design(const MetadataTable& meta, const DesignSpec& spec);

// Assembles a design directly from vectors (simulation path). C may have
// zero columns; group may be empty.
DesignMatrix make_design(const Eigen::VectorXd& u, const Eigen::MatrixXd& C,
                         const std::vector<int>& group = {});

} // namespace linda

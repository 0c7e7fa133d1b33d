#include "linda/design.hpp"

#include "linda/common.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace linda {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return {};
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool valid_identifier(const std::string& s) {
    if (s.empty())
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            return false;
    return true;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Distinct labels in lexicographic order; missing labels are rejected.
std::vector<std::string> sorted_levels(const std::vector<std::string>& labels,
                                       const std::string& colname) {
    std::set<std::string> levels;
    for (const auto& l : labels) {
        if (l.empty())
            throw ValidationError("missing value in variable " + colname);
        levels.insert(l);
    }
    return {levels.begin(), levels.end()};
}

void require_complete(const MetadataTable::Column& col) {
    if (col.kind == VariableKind::continuous) {
        for (double v : col.numeric)
            if (std::isnan(v))
                throw ValidationError("missing value in variable " + col.name);
    } else {
        for (const auto& l : col.labels)
            if (l.empty())
                throw ValidationError("missing value in variable " + col.name);
    }
}

} // namespace

DesignSpec parse_formula(const std::string& formula) {
    const auto bar_parts = split(formula, '|');
    if (bar_parts.size() > 2)
        throw ValidationError("formula has more than one '|' group term");

    DesignSpec spec;
    if (bar_parts.size() == 2) {
        const std::string group = trim(bar_parts[1]);
        if (!valid_identifier(group))
            throw ValidationError("invalid group name in formula: '" + group + "'");
        spec.random_group = group;
    }

    std::vector<std::string> terms;
    for (const auto& raw : split(bar_parts[0], '+')) {
        const std::string term = trim(raw);
        if (!valid_identifier(term))
            throw ValidationError("invalid term in formula: '" + term + "'");
        terms.push_back(term);
    }
    if (terms.empty())
        throw ValidationError("formula has no covariate of interest");
    spec.covariate = terms[0];
    spec.adjustments.assign(terms.begin() + 1, terms.end());

    std::set<std::string> seen{spec.covariate};
    for (const auto& adj : spec.adjustments)
        if (!seen.insert(adj).second)
            throw ValidationError("variable repeated in formula: " + adj);
    if (spec.random_group && *spec.random_group == spec.covariate)
        throw ValidationError("group variable equals the covariate of interest");
    return spec;
}

namespace {

void check_full_rank(DesignMatrix& dm) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.Z);
    const auto rank = qr.rank();
    if (rank < dm.Z.cols()) {
        // Name the columns QR pivoted last; those are the dependent ones.
        const auto perm = qr.colsPermutation().indices();
        std::string names;
        for (Eigen::Index k = rank; k < dm.Z.cols(); ++k) {
            if (!names.empty())
                names += ", ";
            names += dm.colnames[static_cast<std::size_t>(perm(k))];
        }
        throw ValidationError("design matrix is rank-deficient; collinear column(s): " + names);
    }
}

} // namespace

DesignMatrix build_design(const MetadataTable& meta, const DesignSpec& spec) {
    const auto n = meta.n();
    if (n < 4)
        throw ValidationError("need at least 4 samples to build a design");

    const auto* ucol = meta.find(spec.covariate);
    if (!ucol)
        throw ValidationError("variable not found in metadata: " + spec.covariate);
    require_complete(*ucol);

    Eigen::VectorXd u(n);
    if (ucol->kind == VariableKind::continuous) {
        for (Eigen::Index s = 0; s < n; ++s)
            u(s) = ucol->numeric[static_cast<std::size_t>(s)];
    } else {
        const auto levels = sorted_levels(ucol->labels, ucol->name);
        if (levels.size() != 2)
            throw ValidationError("covariate of interest '" + spec.covariate + "' has " +
                                  std::to_string(levels.size()) +
                                  " levels; only binary or continuous covariates are supported");
        for (Eigen::Index s = 0; s < n; ++s)
            u(s) = ucol->labels[static_cast<std::size_t>(s)] == levels[1] ? 1.0 : 0.0;
    }

    std::vector<std::pair<std::string, Eigen::VectorXd>> adj_cols;
    for (const auto& name : spec.adjustments) {
        const auto* col = meta.find(name);
        if (!col)
            throw ValidationError("variable not found in metadata: " + name);
        require_complete(*col);
        if (col->kind == VariableKind::continuous) {
            Eigen::VectorXd v(n);
            for (Eigen::Index s = 0; s < n; ++s)
                v(s) = col->numeric[static_cast<std::size_t>(s)];
            adj_cols.emplace_back(name, std::move(v));
        } else {
            const auto levels = sorted_levels(col->labels, name);
            if (levels.size() < 2)
                throw ValidationError("adjustment '" + name + "' has a single level");
            // One dummy per non-reference level; the first level is the reference.
            for (std::size_t l = 1; l < levels.size(); ++l) {
                Eigen::VectorXd v(n);
                for (Eigen::Index s = 0; s < n; ++s)
                    v(s) = col->labels[static_cast<std::size_t>(s)] == levels[l] ? 1.0 : 0.0;
                adj_cols.emplace_back(name + "=" + levels[l], std::move(v));
            }
        }
    }

    DesignMatrix dm;
    dm.d = static_cast<int>(adj_cols.size());
    dm.Z.resize(n, dm.d + 2);
    dm.Z.col(0) = u;
    dm.Z.col(1).setOnes();
    dm.colnames = {spec.covariate, "(intercept)"};
    for (int j = 0; j < dm.d; ++j) {
        dm.Z.col(2 + j) = adj_cols[static_cast<std::size_t>(j)].second;
        dm.colnames.push_back(adj_cols[static_cast<std::size_t>(j)].first);
    }

    if (spec.random_group) {
        const auto* gcol = meta.find(*spec.random_group);
        if (!gcol)
            throw ValidationError("variable not found in metadata: " + *spec.random_group);
        std::vector<std::string> labels;
        labels.reserve(static_cast<std::size_t>(n));
        if (gcol->kind == VariableKind::categorical) {
            labels = gcol->labels;
        } else {
            for (double v : gcol->numeric) {
                if (std::isnan(v))
                    throw ValidationError("missing value in variable " + gcol->name);
                labels.push_back(std::to_string(v));
            }
        }
        dm.group_levels = sorted_levels(labels, *spec.random_group);
        std::map<std::string, int> index;
        for (std::size_t l = 0; l < dm.group_levels.size(); ++l)
            index[dm.group_levels[l]] = static_cast<int>(l);
        dm.group_index.reserve(static_cast<std::size_t>(n));
        for (const auto& label : labels)
            dm.group_index.push_back(index[label]);
        if (dm.group_levels.size() < 2)
            throw ValidationError("random group '" + *spec.random_group + "' has a single level");
    }

    check_full_rank(dm);
    return dm;
}

DesignMatrix make_design(const Eigen::VectorXd& u, const Eigen::MatrixXd& C,
                         const std::vector<int>& group) {
    if (C.rows() != 0 && C.rows() != u.size())
        throw ValidationError("covariate matrix rows do not match u");
    if (!group.empty() && static_cast<Eigen::Index>(group.size()) != u.size())
        throw ValidationError("group labels do not match u");

    DesignMatrix dm;
    dm.d = static_cast<int>(C.cols());
    dm.Z.resize(u.size(), dm.d + 2);
    dm.Z.col(0) = u;
    dm.Z.col(1).setOnes();
    for (int j = 0; j < dm.d; ++j)
        dm.Z.col(2 + j) = C.col(j);
    dm.colnames = {"u", "(intercept)"};
    for (int j = 0; j < dm.d; ++j)
        dm.colnames.push_back("c" + std::to_string(j + 1));

    if (!group.empty()) {
        dm.group_index = group;
        const int g = *std::max_element(group.begin(), group.end()) + 1;
        for (int k = 0; k < g; ++k)
            dm.group_levels.push_back(std::to_string(k));
    }
    check_full_rank(dm);
    return dm;
}

} // namespace linda

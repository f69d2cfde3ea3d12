#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "yieldrisk/data_model.hpp"

namespace yieldrisk {

// Grouping levels, innermost first.
enum class Level { parcel = 0, household = 1, season = 2, village = 3, time = 4 };

inline constexpr std::array<Level, 5> kAllLevels = {Level::parcel, Level::household, Level::season,
                                                    Level::village, Level::time};

std::string_view to_string(Level level);
Level level_from_string(std::string_view name);

struct HierarchySpec {
    std::vector<Level> levels;  // innermost first
    bool include_covariates = true;

    static HierarchySpec full();
    bool has(Level level) const;
    /// Throws ConfigError unless the levels are non-empty, distinct and in
    /// containment order.
    void validate() const;
    std::string describe() const;
};

/// A functional map from one level's groups to the groups of a containing
/// level.
struct ParentMap {
    Level parent;
    std::vector<int> group;  // child group id -> parent group id
};

struct LevelIndex {
    Level level;
    std::vector<int> group_of;         // observation -> group id (0-based, first appearance)
    std::vector<std::string> labels;   // group id -> label
    std::vector<int> size;             // group id -> number of observations
    std::vector<ParentMap> parents;    // containing levels that are functions of this one

    int n_groups() const { return static_cast<int>(labels.size()); }
    const ParentMap* parent(Level p) const;
};

struct GroupIndex {
    std::size_t n_obs = 0;
    std::vector<LevelIndex> levels;  // in HierarchySpec order

    const LevelIndex* find(Level level) const;
    const LevelIndex& at(Level level) const;
};

/// Builds contiguous group ids per level, assigned by first appearance.
/// Parcels may recur across seasons but never across households; households
/// never span villages. Violations throw ConsistencyError naming the ids.
GroupIndex build_index(std::span<const TransformedRecord> records, const HierarchySpec& spec);

struct DesignOptions {
    // When set, crops outside this list are rejected.
    std::optional<std::vector<Crop>> allowed_crops;
    // Drop the intercept of the first crop (used when a separate grand mean
    // is estimated).
    bool drop_first_intercept = false;
};

/// Crop-varying design. Crops are ordered rice, sorghum, wheat, maize,
/// cotton, then other labels alphabetically. For each crop the columns are
/// `<crop>:intercept` followed by `<crop>:<input>` for labor, fertilizer,
/// mechanization and pesticide. Without covariates only the intercepts
/// remain.
struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> column_labels;
    std::vector<Crop> crops;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

DesignMatrix build_design(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                          const DesignOptions& options = {});

Eigen::VectorXd response_vector(std::span<const TransformedRecord> records);

}  // namespace yieldrisk

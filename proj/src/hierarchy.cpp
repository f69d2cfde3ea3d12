#include "yieldrisk/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "yieldrisk/errors.hpp"

namespace yieldrisk {

std::string_view to_string(Level level) {
    switch (level) {
        case Level::parcel: return "parcel";
        case Level::household: return "household";
        case Level::season: return "season";
        case Level::village: return "village";
        case Level::time: return "time";
    }
    return "?";
}

Level level_from_string(std::string_view name) {
    for (Level l : kAllLevels) {
        if (to_string(l) == name) return l;
    }
    throw ConfigError("unknown level '" + std::string(name) + "'");
}

HierarchySpec HierarchySpec::full() {
    return HierarchySpec{{kAllLevels.begin(), kAllLevels.end()}, true};
}

bool HierarchySpec::has(Level level) const {
    return std::find(levels.begin(), levels.end(), level) != levels.end();
}

void HierarchySpec::validate() const {
    if (levels.empty()) throw ConfigError("hierarchy must include at least one level");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (static_cast<int>(levels[i]) <= static_cast<int>(levels[i - 1])) {
            throw ConfigError("hierarchy levels must be distinct and ordered parcel < household < "
                              "season < village < time; got " +
                              describe());
        }
    }
}

std::string HierarchySpec::describe() const {
    std::string out;
    for (Level l : levels) {
        if (!out.empty()) out += ",";
        out += to_string(l);
    }
    return out + (include_covariates ? " (+covariates)" : " (null)");
}

const ParentMap* LevelIndex::parent(Level p) const {
    for (const auto& m : parents) {
        if (m.parent == p) return &m;
    }
    return nullptr;
}

const LevelIndex* GroupIndex::find(Level level) const {
    for (const auto& l : levels) {
        if (l.level == level) return &l;
    }
    return nullptr;
}

const LevelIndex& GroupIndex::at(Level level) const {
    const LevelIndex* l = find(level);
    if (!l) throw ConfigError("level '" + std::string(to_string(level)) + "' is not in the index");
    return *l;
}

namespace {

std::string label_of(const TransformedRecord& r, Level level) {
    switch (level) {
        case Level::parcel: return r.parcel_id;
        case Level::household: return r.household_id;
        case Level::season: return season_key(r.village_id, r.time_id);
        case Level::village: return r.village_id;
        case Level::time: return r.time_id;
    }
    return {};
}

// Containing levels that are a function of `child` under the adopted
// convention (time-constant parcels and households).
std::vector<Level> functional_parents(Level child) {
    switch (child) {
        case Level::parcel: return {Level::household, Level::village};
        case Level::household: return {Level::village};
        case Level::season: return {Level::village, Level::time};
        default: return {};
    }
}

}  // namespace

GroupIndex build_index(std::span<const TransformedRecord> records, const HierarchySpec& spec) {
    spec.validate();
    GroupIndex index;
    index.n_obs = records.size();

    // Nesting checks run on the raw labels regardless of which levels are fitted.
    std::unordered_map<std::string, std::string> parcel_household, household_village;
    for (const auto& r : records) {
        auto [p, pn] = parcel_household.emplace(r.parcel_id, r.household_id);
        if (!pn && p->second != r.household_id) {
            throw ConsistencyError("nesting violation: parcel '" + r.parcel_id +
                                   "' appears in households '" + p->second + "' and '" +
                                   r.household_id + "'");
        }
        auto [h, hn] = household_village.emplace(r.household_id, r.village_id);
        if (!hn && h->second != r.village_id) {
            throw ConsistencyError("nesting violation: household '" + r.household_id +
                                   "' appears in villages '" + h->second + "' and '" + r.village_id +
                                   "'");
        }
    }

    for (Level level : spec.levels) {
        LevelIndex li;
        li.level = level;
        li.group_of.resize(records.size());
        std::unordered_map<std::string, int> ids;
        for (std::size_t n = 0; n < records.size(); ++n) {
            auto [it, fresh] = ids.emplace(label_of(records[n], level), static_cast<int>(li.labels.size()));
            if (fresh) {
                li.labels.push_back(it->first);
                li.size.push_back(0);
            }
            li.group_of[n] = it->second;
            ++li.size[it->second];
        }
        index.levels.push_back(std::move(li));
    }

    for (auto& child : index.levels) {
        for (Level p : functional_parents(child.level)) {
            const LevelIndex* parent = index.find(p);
            if (!parent) continue;
            ParentMap map{p, std::vector<int>(child.labels.size(), -1)};
            for (std::size_t n = 0; n < records.size(); ++n) {
                int& slot = map.group[child.group_of[n]];
                const int g = parent->group_of[n];
                if (slot >= 0 && slot != g) {
                    throw ConsistencyError("nesting violation: " + std::string(to_string(child.level)) +
                                           " '" + child.labels[child.group_of[n]] + "' maps to " +
                                           std::string(to_string(p)) + " '" + parent->labels[slot] +
                                           "' and '" + parent->labels[g] + "'");
                }
                slot = g;
            }
            child.parents.push_back(std::move(map));
        }
    }
    return index;
}

DesignMatrix build_design(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                          const DesignOptions& options) {
    std::set<Crop> present;
    for (const auto& r : records) {
        if (options.allowed_crops) {
            const auto& allowed = *options.allowed_crops;
            if (std::find(allowed.begin(), allowed.end(), r.crop) == allowed.end()) {
                throw ConfigError("crop '" + r.crop.name() + "' is not in the allowed crop list");
            }
        }
        present.insert(r.crop);
    }

    DesignMatrix d;
    d.crops.assign(present.begin(), present.end());
    const std::size_t per_crop = spec.include_covariates ? 1 + kInputNames.size() : 1;
    std::map<std::string, std::size_t> crop_pos;
    for (std::size_t c = 0; c < d.crops.size(); ++c) {
        crop_pos[d.crops[c].name()] = c;
        d.column_labels.push_back(d.crops[c].name() + ":intercept");
        if (spec.include_covariates) {
            for (auto name : kInputNames) d.column_labels.push_back(d.crops[c].name() + ":" + std::string(name));
        }
    }

    d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(records.size()),
                                     static_cast<Eigen::Index>(d.column_labels.size()));
    for (std::size_t n = 0; n < records.size(); ++n) {
        const auto base = static_cast<Eigen::Index>(crop_pos[records[n].crop.name()] * per_crop);
        const auto row = static_cast<Eigen::Index>(n);
        d.values(row, base) = 1.0;
        if (spec.include_covariates) {
            for (std::size_t k = 0; k < kInputNames.size(); ++k) {
                d.values(row, base + 1 + static_cast<Eigen::Index>(k)) = records[n].x[k];
            }
        }
    }

    if (options.drop_first_intercept && !d.crops.empty()) {
        const Eigen::Index cols = d.values.cols();
        Eigen::MatrixXd trimmed = d.values.rightCols(cols - 1);
        d.values = std::move(trimmed);
        d.column_labels.erase(d.column_labels.begin());
    }
    return d;
}

Eigen::VectorXd response_vector(std::span<const TransformedRecord> records) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
    for (std::size_t n = 0; n < records.size(); ++n) y[static_cast<Eigen::Index>(n)] = records[n].y;
    return y;
}

}  // namespace yieldrisk

#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace yieldrisk {

/// Inverse hyperbolic sine, ln(v + sqrt(v^2 + 1)). Defined at zero, ~ln(2v)
/// for large v. Throws DomainError for negative or non-finite input.
double ihs(double v);

// Crop label. The five named crops sort first in a fixed order; any other
// label is kept verbatim and sorts after them alphabetically.
class Crop {
public:
    static constexpr std::array<std::string_view, 5> kKnown = {"rice", "sorghum", "wheat", "maize",
                                                               "cotton"};

    Crop() = default;
    explicit Crop(std::string_view label);

    const std::string& name() const { return name_; }
    bool is_known() const { return rank_ < kKnown.size(); }

    friend bool operator==(const Crop& a, const Crop& b) { return a.name_ == b.name_; }
    friend bool operator<(const Crop& a, const Crop& b) {
        return a.rank_ != b.rank_ ? a.rank_ < b.rank_ : a.name_ < b.name_;
    }

private:
    std::string name_;
    std::size_t rank_ = kKnown.size();
};

/// Inputs in the fixed order used by every design matrix.
inline constexpr std::array<std::string_view, 4> kInputNames = {"labor", "fertilizer", "mechanization",
                                                                "pesticide"};

struct YieldRecord {
    std::string parcel_id;
    std::string household_id;
    std::string village_id;
    std::string time_id;
    Crop crop;
    double yield_raw = 0.0;      // kg/ha
    double labor = 0.0;          // hr/ha
    double fertilizer = 0.0;     // kg/ha
    double mechanization = 0.0;  // currency/ha
    double pesticide = 0.0;      // currency/ha
    // Descriptive columns carried through but never modelled.
    std::optional<double> area;
    std::optional<double> rainfall;

    std::array<double, 4> inputs() const { return {labor, fertilizer, mechanization, pesticide}; }

    friend bool operator==(const YieldRecord&, const YieldRecord&) = default;
};

/// Season group key: the (village, time) pair.
std::string season_key(std::string_view village_id, std::string_view time_id);

struct TransformedRecord {
    double y = 0.0;
    std::array<double, 4> x{};
    Crop crop;
    std::string parcel_id;
    std::string household_id;
    std::string village_id;
    std::string time_id;
};

/// Maps logical yield-panel fields to CSV header names. Unmapped fields use
/// their canonical names.
struct ColumnSchema {
    std::map<std::string, std::string> columns;

    static const std::vector<std::string>& required_fields();
    static const std::vector<std::string>& optional_fields();
    std::string column_for(const std::string& field) const;
};

std::vector<YieldRecord> read_yield_panel(std::istream& in, const ColumnSchema& schema = {},
                                          const std::string& source = "<stream>");
std::vector<YieldRecord> load_yield_panel(const std::string& path, const ColumnSchema& schema = {});
void write_yield_panel(std::ostream& out, std::span<const YieldRecord> records);

/// Cross-record invariants: one household per parcel, one village per
/// household, no duplicate (parcel, time) rows. Throws ConsistencyError.
void check_panel_consistency(std::span<const YieldRecord> records);

std::vector<TransformedRecord> transform_panel(std::span<const YieldRecord> records);

enum class Region { eastern_central, western };

std::string_view to_string(Region r);
Region region_from_string(std::string_view s);

using Date = std::chrono::sys_days;

Date parse_date(std::string_view iso);
std::string format_date(Date d);
Date make_date(int year, unsigned month, unsigned day);
int year_of(Date d);

struct RainfallObservation {
    Date date;
    double rain_mm = 0.0;
};

struct RainfallSeries {
    std::string village_id;
    int year = 0;
    Region region = Region::eastern_central;
    std::vector<RainfallObservation> observations;  // strictly increasing dates
    std::vector<std::string> warnings;              // e.g. gaps inside the monsoon window

    /// First day of the monsoon window for this series' region and year.
    Date monsoon_start() const;
};

/// Groups rows into one series per (village, year), sorted by date.
/// Duplicate (village, date) rows throw; gaps inside the monsoon window are
/// recorded as warnings on the series.
std::vector<RainfallSeries> read_rainfall(std::istream& in, const std::string& source = "<stream>");
std::vector<RainfallSeries> load_rainfall(const std::string& path);
void write_rainfall(std::ostream& out, std::span<const RainfallSeries> series);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace yieldrisk

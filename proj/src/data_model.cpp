#include "yieldrisk/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "csv.hpp"
#include "yieldrisk/errors.hpp"

namespace yieldrisk {

namespace chr = std::chrono;

double ihs(double v) {
    if (!std::isfinite(v) || v < 0.0) {
        throw DomainError("ihs: input must be finite and non-negative, got " + format_double(v));
    }
    return std::asinh(v);
}

Crop::Crop(std::string_view label) {
    name_ = csv::trim(label);
    std::transform(name_.begin(), name_.end(), name_.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto it = std::find(kKnown.begin(), kKnown.end(), name_);
    rank_ = static_cast<std::size_t>(it - kKnown.begin());
}

std::string season_key(std::string_view village_id, std::string_view time_id) {
    std::string key(village_id);
    key.push_back('|');
    key.append(time_id);
    return key;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Yield panel

const std::vector<std::string>& ColumnSchema::required_fields() {
    static const std::vector<std::string> fields = {
        "parcel_id", "household_id", "village_id", "time_id",       "crop",
        "yield",     "labor",        "fertilizer", "mechanization", "pesticide"};
    return fields;
}

const std::vector<std::string>& ColumnSchema::optional_fields() {
    static const std::vector<std::string> fields = {"area", "rainfall"};
    return fields;
}

std::string ColumnSchema::column_for(const std::string& field) const {
    auto it = columns.find(field);
    return it == columns.end() ? field : it->second;
}

namespace {

struct PanelColumns {
    std::vector<std::size_t> required;
    std::vector<std::optional<std::size_t>> optional;
};

PanelColumns map_columns(const std::vector<std::string>& header, const ColumnSchema& schema) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(csv::trim(header[i]), i);
    for (const auto& [field, col] : schema.columns) {
        const auto& req = ColumnSchema::required_fields();
        const auto& opt = ColumnSchema::optional_fields();
        if (std::find(req.begin(), req.end(), field) == req.end() &&
            std::find(opt.begin(), opt.end(), field) == opt.end()) {
            throw SchemaError("schema maps unknown field '" + field + "'");
        }
    }
    PanelColumns cols;
    std::vector<std::string> missing;
    for (const auto& field : ColumnSchema::required_fields()) {
        auto it = pos.find(schema.column_for(field));
        if (it == pos.end()) {
            missing.push_back(schema.column_for(field));
        } else {
            cols.required.push_back(it->second);
        }
    }
    if (!missing.empty()) {
        std::string msg = "yield panel is missing required column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw SchemaError(msg);
    }
    for (const auto& field : ColumnSchema::optional_fields()) {
        auto it = pos.find(schema.column_for(field));
        cols.optional.push_back(it == pos.end() ? std::nullopt : std::optional<std::size_t>(it->second));
    }
    return cols;
}

double parse_quantity(const std::string& text, const std::string& field, const std::string& source,
                      std::size_t line) {
    auto v = csv::parse_double(text);
    if (!v) throw RowError(source, line, field + ": cannot parse '" + text + "' as a number");
    if (!std::isfinite(*v)) throw RowError(source, line, field + ": value is not finite");
    if (*v < 0.0) throw RowError(source, line, field + ": value " + text + " is negative");
    return *v;
}

}  // namespace

std::vector<YieldRecord> read_yield_panel(std::istream& in, const ColumnSchema& schema,
                                          const std::string& source) {
    csv::LineReader reader(in);
    auto header = reader.next();
    if (!header) throw SchemaError(source + ": empty file, header row expected");
    const PanelColumns cols = map_columns(*header, schema);
    const auto& fields = ColumnSchema::required_fields();

    std::vector<YieldRecord> records;
    std::map<std::pair<std::string, std::string>, std::size_t> seen;  // (parcel, time) -> line
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> parcel_household;
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> household_village;

    while (auto row = reader.next()) {
        const std::size_t line = reader.line();
        if (row->size() != header->size()) {
            throw RowError(source, line,
                           "expected " + std::to_string(header->size()) + " fields, found " +
                               std::to_string(row->size()));
        }
        auto text = [&](std::size_t k) { return csv::trim((*row)[cols.required[k]]); };
        YieldRecord r;
        r.parcel_id = text(0);
        r.household_id = text(1);
        r.village_id = text(2);
        r.time_id = text(3);
        r.crop = Crop(text(4));
        for (std::size_t k = 0; k < 5; ++k) {
            if (text(k).empty()) throw RowError(source, line, fields[k] + " is empty");
        }
        r.yield_raw = parse_quantity(text(5), fields[5], source, line);
        r.labor = parse_quantity(text(6), fields[6], source, line);
        r.fertilizer = parse_quantity(text(7), fields[7], source, line);
        r.mechanization = parse_quantity(text(8), fields[8], source, line);
        r.pesticide = parse_quantity(text(9), fields[9], source, line);
        for (std::size_t k = 0; k < cols.optional.size(); ++k) {
            if (!cols.optional[k]) continue;
            const std::string t = csv::trim((*row)[*cols.optional[k]]);
            if (t.empty()) continue;
            const double v = parse_quantity(t, ColumnSchema::optional_fields()[k], source, line);
            (k == 0 ? r.area : r.rainfall) = v;
        }

        auto [it, fresh] = seen.emplace(std::make_pair(r.parcel_id, r.time_id), line);
        if (!fresh) {
            throw RowError(source, line,
                           "duplicate (parcel_id, time_id) = (" + r.parcel_id + ", " + r.time_id +
                               "), first seen on line " + std::to_string(it->second));
        }
        auto [ph, ph_new] = parcel_household.emplace(r.parcel_id, std::make_pair(r.household_id, line));
        if (!ph_new && ph->second.first != r.household_id) {
            throw ConsistencyError(source + ":" + std::to_string(line) + ": parcel '" + r.parcel_id +
                                   "' belongs to household '" + r.household_id + "' but line " +
                                   std::to_string(ph->second.second) + " assigns it to '" +
                                   ph->second.first + "'");
        }
        auto [hv, hv_new] = household_village.emplace(r.household_id, std::make_pair(r.village_id, line));
        if (!hv_new && hv->second.first != r.village_id) {
            throw ConsistencyError(source + ":" + std::to_string(line) + ": household '" +
                                   r.household_id + "' is in village '" + r.village_id +
                                   "' but line " + std::to_string(hv->second.second) +
                                   " places it in '" + hv->second.first + "'");
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<YieldRecord> load_yield_panel(const std::string& path, const ColumnSchema& schema) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open yield panel '" + path + "'");
    return read_yield_panel(in, schema, path);
}

void write_yield_panel(std::ostream& out, std::span<const YieldRecord> records) {
    out << "parcel_id,household_id,village_id,time_id,crop,yield,labor,fertilizer,mechanization,"
           "pesticide\n";
    for (const auto& r : records) {
        out << csv::escape(r.parcel_id) << ',' << csv::escape(r.household_id) << ','
            << csv::escape(r.village_id) << ',' << csv::escape(r.time_id) << ','
            << csv::escape(r.crop.name()) << ',' << format_double(r.yield_raw) << ','
            << format_double(r.labor) << ',' << format_double(r.fertilizer) << ','
            << format_double(r.mechanization) << ',' << format_double(r.pesticide) << '\n';
    }
}

void check_panel_consistency(std::span<const YieldRecord> records) {
    std::unordered_map<std::string, const YieldRecord*> parcel, household;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
        if (!seen.emplace(r.parcel_id, r.time_id).second) {
            throw ConsistencyError("duplicate (parcel_id, time_id) = (" + r.parcel_id + ", " +
                                   r.time_id + ")");
        }
        auto [p, pn] = parcel.emplace(r.parcel_id, &r);
        if (!pn && p->second->household_id != r.household_id) {
            throw ConsistencyError("parcel '" + r.parcel_id + "' appears under households '" +
                                   p->second->household_id + "' and '" + r.household_id + "'");
        }
        auto [h, hn] = household.emplace(r.household_id, &r);
        if (!hn && h->second->village_id != r.village_id) {
            throw ConsistencyError("household '" + r.household_id + "' appears in villages '" +
                                   h->second->village_id + "' and '" + r.village_id + "'");
        }
    }
}

std::vector<TransformedRecord> transform_panel(std::span<const YieldRecord> records) {
    std::vector<TransformedRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        TransformedRecord t;
        t.y = ihs(r.yield_raw);
        const auto raw = r.inputs();
        for (std::size_t k = 0; k < raw.size(); ++k) t.x[k] = ihs(raw[k]);
        t.crop = r.crop;
        t.parcel_id = r.parcel_id;
        t.household_id = r.household_id;
        t.village_id = r.village_id;
        t.time_id = r.time_id;
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rainfall

std::string_view to_string(Region r) {
    return r == Region::western ? "western" : "eastern_central";
}

Region region_from_string(std::string_view s) {
    const std::string t = csv::trim(s);
    if (t == "eastern_central" || t == "eastern" || t == "central") return Region::eastern_central;
    if (t == "western") return Region::western;
    throw DomainError("unknown region '" + t + "' (expected eastern_central or western)");
}

Date make_date(int year, unsigned month, unsigned day) {
    const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) throw DomainError("invalid calendar date");
    return chr::sys_days{ymd};
}

Date parse_date(std::string_view iso) {
    const std::string t = csv::trim(iso);
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (t.size() != 10 || std::sscanf(t.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw DomainError("date '" + t + "' is not ISO-8601 (YYYY-MM-DD)");
    }
    const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) throw DomainError("date '" + t + "' does not exist");
    return chr::sys_days{ymd};
}

std::string format_date(Date d) {
    const chr::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int year_of(Date d) { return static_cast<int>(chr::year_month_day{d}.year()); }

Date RainfallSeries::monsoon_start() const {
    return make_date(year, region == Region::western ? 7u : 6u, 1u);
}

namespace {

// Latest day a Phase III window can end: Phase I starts at the latest on the
// first of the month after monsoon start, and the three phases span 115 days.
Date monsoon_window_end(const RainfallSeries& s) {
    const chr::year_month_day start{s.monsoon_start()};
    const chr::year_month_day next{start.year(), start.month() + chr::months{1}, chr::day{1}};
    return chr::sys_days{next} + chr::days{114};
}

void flag_gaps(RainfallSeries& s) {
    const Date lo = s.monsoon_start();
    const Date hi = monsoon_window_end(s);
    for (std::size_t i = 1; i < s.observations.size(); ++i) {
        const Date prev = s.observations[i - 1].date;
        const Date cur = s.observations[i].date;
        const auto missing = (cur - prev).count() - 1;
        if (missing <= 0) continue;
        const Date gap_first = prev + chr::days{1};
        const Date gap_last = cur - chr::days{1};
        if (gap_last < lo || gap_first > hi) continue;
        s.warnings.push_back("gap of " + std::to_string(missing) + " day(s) from " +
                             format_date(gap_first) + " to " + format_date(gap_last));
    }
}

}  // namespace

std::vector<RainfallSeries> read_rainfall(std::istream& in, const std::string& source) {
    csv::LineReader reader(in);
    auto header = reader.next();
    if (!header) throw SchemaError(source + ": empty rainfall file, header row expected");
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header->size(); ++i) pos.emplace(csv::trim((*header)[i]), i);
    std::array<std::size_t, 4> col{};
    const std::array<std::string, 4> names = {"village_id", "date", "rain_mm", "region"};
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto it = pos.find(names[k]);
        if (it == pos.end()) throw SchemaError(source + ": missing rainfall column '" + names[k] + "'");
        col[k] = it->second;
    }

    std::map<std::pair<std::string, int>, RainfallSeries> by_key;
    std::map<std::pair<std::string, int>, std::size_t> first_line;
    std::set<std::pair<std::string, int>> seen_dates;
    while (auto row = reader.next()) {
        const std::size_t line = reader.line();
        if (row->size() != header->size()) {
            throw RowError(source, line, "expected " + std::to_string(header->size()) + " fields");
        }
        const std::string village = csv::trim((*row)[col[0]]);
        if (village.empty()) throw RowError(source, line, "village_id is empty");
        Date date;
        Region region;
        try {
            date = parse_date((*row)[col[1]]);
            region = region_from_string((*row)[col[3]]);
        } catch (const DomainError& e) {
            throw RowError(source, line, e.what());
        }
        const double rain = parse_quantity((*row)[col[2]], "rain_mm", source, line);
        if (!seen_dates.emplace(village, date.time_since_epoch().count()).second) {
            throw RowError(source, line,
                           "duplicate rainfall row for village '" + village + "' on " + format_date(date));
        }
        const auto key = std::make_pair(village, year_of(date));
        auto [it, fresh] = by_key.try_emplace(key);
        RainfallSeries& s = it->second;
        if (fresh) {
            s.village_id = village;
            s.year = key.second;
            s.region = region;
        } else if (s.region != region) {
            throw RowError(source, line, "region changes within village '" + village + "' in " +
                                             std::to_string(key.second));
        }
        s.observations.push_back({date, rain});
    }

    std::vector<RainfallSeries> out;
    out.reserve(by_key.size());
    for (auto& [key, s] : by_key) {
        std::sort(s.observations.begin(), s.observations.end(),
                  [](const auto& a, const auto& b) { return a.date < b.date; });
        flag_gaps(s);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<RainfallSeries> load_rainfall(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open rainfall file '" + path + "'");
    return read_rainfall(in, path);
}

void write_rainfall(std::ostream& out, std::span<const RainfallSeries> series) {
    out << "village_id,date,rain_mm,region\n";
    for (const auto& s : series) {
        for (const auto& o : s.observations) {
            out << csv::escape(s.village_id) << ',' << format_date(o.date) << ','
                << format_double(o.rain_mm) << ',' << to_string(s.region) << '\n';
        }
    }
}

}  // namespace yieldrisk

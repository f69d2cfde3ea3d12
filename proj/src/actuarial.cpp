#include "yieldrisk/actuarial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "yieldrisk/errors.hpp"

namespace yieldrisk {

using std::chrono::days;

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::I: return "I";
        case Phase::II: return "II";
        case Phase::III: return "III";
    }
    return "?";
}

Phase phase_from_string(std::string_view s) {
    if (s == "I" || s == "1") return Phase::I;
    if (s == "II" || s == "2") return Phase::II;
    if (s == "III" || s == "3") return Phase::III;
    throw ConfigError("unknown phase '" + std::string(s) + "'");
}

std::string_view to_string(Direction d) { return d == Direction::deficit ? "deficit" : "excess"; }

Direction direction_from_string(std::string_view s) {
    if (s == "deficit") return Direction::deficit;
    if (s == "excess") return Direction::excess;
    throw ConfigError("unknown direction '" + std::string(s) + "'");
}

void PhaseTerm::validate() const {
    const std::string where = "phase " + std::string(to_string(phase)) + ": ";
    if (!std::isfinite(strike_mm) || !std::isfinite(exit_mm) || strike_mm < 0.0 || exit_mm < 0.0) {
        throw ConfigError(where + "strike and exit must be finite and non-negative");
    }
    if (!(slope_rs_per_mm > 0.0) || !std::isfinite(slope_rs_per_mm)) throw ConfigError(where + "slope must be positive");
    if (!(max_payout_rs > 0.0) || !std::isfinite(max_payout_rs)) throw ConfigError(where + "max payout must be positive");
    if (direction == Direction::deficit && !(exit_mm < strike_mm)) {
        throw ConfigError(where + "deficit terms need exit below strike");
    }
    if (direction == Direction::excess && !(strike_mm < exit_mm)) {
        throw ConfigError(where + "excess terms need strike below exit");
    }
}

void Contract::validate() const {
    for (std::size_t i = 0; i < phases.size(); ++i) {
        if (phases[i].phase != kAllPhases[i]) throw ConfigError("contract phases must be I, II, III in order");
        phases[i].validate();
    }
    if (commercial_premium_rs && !(*commercial_premium_rs > 0.0)) {
        throw ConfigError("commercial premium must be positive");
    }
}

namespace {

Direction usual_direction(Phase p) { return p == Phase::III ? Direction::excess : Direction::deficit; }

double require_number(const nlohmann::json& j, const char* key, const std::string& source) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw SchemaError(source + ": phase entry needs numeric '" + key + "'");
    }
    return j.at(key).get<double>();
}

}  // namespace

Contract parse_contract(std::string_view json_text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(source + ": " + e.what());
    }
    if (!j.is_object()) throw SchemaError(source + ": contract must be a JSON object");
    Contract c;
    c.label = j.value("label", std::string("contract"));
    if (j.contains("commercial_premium_rs") && !j.at("commercial_premium_rs").is_null()) {
        if (!j.at("commercial_premium_rs").is_number()) throw SchemaError(source + ": commercial_premium_rs must be a number");
        c.commercial_premium_rs = j.at("commercial_premium_rs").get<double>();
    }
    if (!j.contains("phases") || !j.at("phases").is_array() || j.at("phases").size() != 3) {
        throw SchemaError(source + ": contract needs exactly three phases");
    }
    std::array<bool, 3> seen{};
    for (const auto& pj : j.at("phases")) {
        if (!pj.is_object()) throw SchemaError(source + ": phase entries must be objects");
        PhaseTerm t;
        if (!pj.contains("phase")) throw SchemaError(source + ": phase entry needs 'phase'");
        const auto& ph = pj.at("phase");
        t.phase = ph.is_number_integer() ? phase_from_string(std::to_string(ph.get<int>()))
                                         : phase_from_string(ph.get<std::string>());
        t.strike_mm = require_number(pj, "strike", source);
        t.exit_mm = require_number(pj, "exit", source);
        if (pj.contains("slope")) t.slope_rs_per_mm = require_number(pj, "slope", source);
        if (pj.contains("max_payout")) t.max_payout_rs = require_number(pj, "max_payout", source);
        t.direction = pj.contains("direction") ? direction_from_string(pj.at("direction").get<std::string>())
                                               : usual_direction(t.phase);
        const auto idx = static_cast<std::size_t>(t.phase);
        if (seen[idx]) throw SchemaError(source + ": phase " + std::string(to_string(t.phase)) + " given twice");
        seen[idx] = true;
        c.phases[idx] = t;
    }
    c.validate();
    return c;
}

std::string contract_to_json(const Contract& c) {
    nlohmann::ordered_json j;
    j["label"] = c.label;
    if (c.commercial_premium_rs) j["commercial_premium_rs"] = *c.commercial_premium_rs;
    j["phases"] = nlohmann::ordered_json::array();
    for (const auto& t : c.phases) {
        nlohmann::ordered_json pj;
        pj["phase"] = std::string(to_string(t.phase));
        pj["strike"] = t.strike_mm;
        pj["exit"] = t.exit_mm;
        pj["slope"] = t.slope_rs_per_mm;
        pj["max_payout"] = t.max_payout_rs;
        pj["direction"] = std::string(to_string(t.direction));
        j["phases"].push_back(pj);
    }
    return j.dump(2);
}

Contract load_contract(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open contract file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_contract(ss.str(), path);
}

namespace {

Contract make_contract(std::string label, std::array<double, 6> ke, std::optional<double> commercial = {}) {
    Contract c;
    c.label = std::move(label);
    c.commercial_premium_rs = commercial;
    for (std::size_t i = 0; i < 3; ++i) {
        c.phases[i].phase = kAllPhases[i];
        c.phases[i].strike_mm = ke[2 * i];
        c.phases[i].exit_mm = ke[2 * i + 1];
        c.phases[i].direction = usual_direction(kAllPhases[i]);
    }
    c.validate();
    return c;
}

}  // namespace

std::vector<Contract> reference_contracts() {
    return {
        make_contract("high", {70, 10, 80, 10, 375, 450}, 280.0),
        make_contract("medium", {78, 15, 72, 12, 499, 580}),
        make_contract("low", {50, 5, 60, 5, 560, 670}),
        make_contract("low-b", {45, 5, 55, 5, 500, 570}),
        make_contract("zero-exit", {25, 0, 15, 0, 500, 580}),
        make_contract("low-c", {30, 5, 30, 5, 500, 575}),
    };
}

const Contract& reference_contract(const std::string& label) {
    static const std::vector<Contract> all = reference_contracts();
    for (const auto& c : all) {
        if (c.label == label) return c;
    }
    throw ConfigError("no reference contract named '" + label + "'");
}

// ---------------------------------------------------------------------------

namespace {

Date first_of_next_month(Date d) {
    const std::chrono::year_month_day ymd{d};
    const auto next = std::chrono::year_month{ymd.year(), ymd.month()} + std::chrono::months{1};
    return Date{next / std::chrono::day{1}};
}

std::string describe_missing(Date from, Date to) {
    // Inclusive range, collapsed for readability.
    if (from == to) return format_date(from);
    return format_date(from) + ".." + format_date(to);
}

}  // namespace

PhaseWindows detect_phases(const RainfallSeries& series) {
    PhaseWindows w;
    w.village_id = series.village_id;
    w.year = series.year;
    w.monsoon_start = series.monsoon_start();
    const std::string who = series.village_id + " " + std::to_string(series.year);
    const auto& obs = series.observations;

    const Date month_end = first_of_next_month(w.monsoon_start) - days{1};
    std::optional<Date> start;
    double cumulative = 0.0;
    for (const auto& o : obs) {
        if (o.date < w.monsoon_start) continue;
        if (o.date > month_end) break;
        cumulative += o.rain_mm;
        if (cumulative > kPhaseOneTriggerMm) {
            start = o.date;
            break;
        }
    }
    if (!start) start = month_end + days{1};

    Date cursor = *start;
    for (std::size_t k = 0; k < 3; ++k) {
        w.phases[k].first = cursor;
        w.phases[k].last = cursor + days{kPhaseLengthDays[k] - 1};
        cursor = w.phases[k].last + days{1};
    }

    const Date need_first = w.monsoon_start;
    const Date need_last = w.phases[2].last;
    std::vector<std::string> missing;
    if (obs.empty()) {
        missing.push_back(describe_missing(need_first, need_last));
    } else {
        if (obs.front().date > need_first) missing.push_back(describe_missing(need_first, obs.front().date - days{1}));
        if (obs.back().date < need_last) missing.push_back(describe_missing(obs.back().date + days{1}, need_last));
    }
    if (!missing.empty()) {
        std::string msg = "rainfall series " + who + " does not cover the phase windows; missing dates ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
        throw DomainError(msg);
    }
    return w;
}

double phase_total(const RainfallSeries& series, const PhaseWindows& windows, Phase phase) {
    const DateRange& r = windows[phase];
    double total = 0.0;
    for (const auto& o : series.observations) {
        if (o.date < r.first) continue;
        if (o.date > r.last) break;
        total += o.rain_mm;
    }
    return total;
}

double payout(const PhaseTerm& term, double r) {
    if (!std::isfinite(r) || r < 0.0) throw DomainError("rainfall must be finite and non-negative");
    const double k = term.strike_mm;
    const double z = term.exit_mm;
    if (term.direction == Direction::deficit) {
        if (r > k) return 0.0;
        if (r <= z) return term.max_payout_rs;
        return (k - r) * term.slope_rs_per_mm;
    }
    if (r < k) return 0.0;
    if (r >= z) return term.max_payout_rs;
    return (r - k) * term.slope_rs_per_mm;
}

double loading_factor(double commercial_premium, double fair_premium) {
    if (!(fair_premium > 0.0)) throw DomainError("loading factor needs a positive fair premium");
    return commercial_premium / fair_premium;
}

double years_until_payout(double probability) {
    if (!(probability >= 0.0 && probability <= 1.0)) throw DomainError("probability must lie in [0, 1]");
    if (probability == 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 / probability) / 3.0;
}

PricingResult price(const Contract& contract, std::span<const RainfallSeries> series) {
    contract.validate();
    if (series.empty()) throw DomainError("pricing needs at least one rainfall series");
    PricingResult res;
    res.label = contract.label;
    std::array<double, 3> sums{};
    std::array<std::size_t, 3> hits{};
    std::size_t paying = 0;
    for (const auto& s : series) {
        PhaseWindows w;
        try {
            w = detect_phases(s);
        } catch (const DomainError& e) {
            res.excluded.push_back(e.what());
            continue;
        }
        for (const auto& warn : s.warnings) res.warnings.push_back(s.village_id + " " + std::to_string(s.year) + ": " + warn);
        for (std::size_t k = 0; k < 3; ++k) {
            PayoutCell cell;
            cell.village_id = s.village_id;
            cell.year = s.year;
            cell.phase = kAllPhases[k];
            cell.window = w.phases[k];
            cell.rainfall_mm = phase_total(s, w, kAllPhases[k]);
            cell.payout_rs = payout(contract.phases[k], cell.rainfall_mm);
            sums[k] += cell.payout_rs;
            ++res.phases[k].n_cells;
            if (cell.payout_rs > 0.0) {
                ++hits[k];
                ++paying;
            }
            res.ledger.push_back(std::move(cell));
        }
    }
    if (res.ledger.empty()) throw DomainError("no rainfall series had detectable phases");
    for (std::size_t k = 0; k < 3; ++k) {
        const double n = static_cast<double>(res.phases[k].n_cells);
        res.phases[k].mean_payout_rs = sums[k] / n;
        res.phases[k].payout_frequency = static_cast<double>(hits[k]) / n;
        res.fair_premium_rs += res.phases[k].mean_payout_rs;
    }
    res.n_cells = res.ledger.size();
    res.payout_probability = static_cast<double>(paying) / static_cast<double>(res.n_cells);
    res.years_until_payout = years_until_payout(res.payout_probability);
    if (contract.commercial_premium_rs && res.fair_premium_rs > 0.0) {
        res.loading_factor = loading_factor(*contract.commercial_premium_rs, res.fair_premium_rs);
    }
    return res;
}

void write_pricing_report_csv(std::ostream& out, std::span<const Contract> contracts,
                              std::span<const PricingResult> results) {
    out << "contract";
    for (Phase p : kAllPhases) {
        const std::string s(to_string(p));
        out << ",phase_" << s << "_strike_mm,phase_" << s << "_exit_mm,phase_" << s << "_max_payout_rs,phase_" << s
            << "_slope_rs_per_mm";
    }
    out << ",fair_premium_rs,payout_probability,loading_factor,years_until_payout,n_cells\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& c = contracts[i];
        const auto& r = results[i];
        out << csv::escape(c.label);
        for (const auto& t : c.phases) {
            out << ',' << format_double(t.strike_mm) << ',' << format_double(t.exit_mm) << ','
                << format_double(t.max_payout_rs) << ',' << format_double(t.slope_rs_per_mm);
        }
        out << ',' << format_double(r.fair_premium_rs) << ',' << format_double(r.payout_probability) << ','
            << (r.loading_factor ? format_double(*r.loading_factor) : std::string()) << ','
            << (std::isfinite(r.years_until_payout) ? format_double(r.years_until_payout) : std::string("inf"))
            << ',' << r.n_cells << '\n';
    }
}

void write_payout_ledger_csv(std::ostream& out, std::span<const PricingResult> results) {
    out << "contract,village_id,year,phase,start,end,rainfall_mm,payout_rs\n";
    for (const auto& r : results) {
        for (const auto& c : r.ledger) {
            out << csv::escape(r.label) << ',' << csv::escape(c.village_id) << ',' << c.year << ',' << to_string(c.phase) << ','
                << format_date(c.window.first) << ',' << format_date(c.window.last) << ','
                << format_double(c.rainfall_mm) << ',' << format_double(c.payout_rs) << '\n';
        }
    }
}

}  // namespace yieldrisk

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "yieldrisk/data_model.hpp"

namespace yieldrisk {

enum class Phase { I = 0, II = 1, III = 2 };
enum class Direction { deficit, excess };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);
std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

inline constexpr std::array<Phase, 3> kAllPhases = {Phase::I, Phase::II, Phase::III};
inline constexpr std::array<int, 3> kPhaseLengthDays = {35, 35, 45};
inline constexpr double kPhaseOneTriggerMm = 50.0;

struct PhaseTerm {
    Phase phase = Phase::I;
    double strike_mm = 0.0;        // k
    double exit_mm = 0.0;          // z
    double slope_rs_per_mm = 10.0;  // m
    double max_payout_rs = 1000.0;  // M
    Direction direction = Direction::deficit;

    /// Deficit terms need z < k, excess terms k < z; m and M positive.
    void validate() const;
};

struct Contract {
    std::string label;
    std::array<PhaseTerm, 3> phases{};
    std::optional<double> commercial_premium_rs;

    void validate() const;
};

/// JSON contract file: label, optional commercial_premium_rs, and a
/// `phases` array of {phase, strike, exit, slope, max_payout, direction}.
/// slope, max_payout and direction default to 10, 1000 and the phase's
/// usual direction.
Contract parse_contract(std::string_view json_text, const std::string& source = "<contract>");
std::string contract_to_json(const Contract& c);
Contract load_contract(const std::string& path);

/// Contracts with the structures used in the reference pricing tables, all
/// with slope 10 Rs/mm and maximum payout 1000 Rs.
std::vector<Contract> reference_contracts();
const Contract& reference_contract(const std::string& label);

struct DateRange {
    Date first;  // inclusive
    Date last;   // inclusive
};

struct PhaseWindows {
    std::string village_id;
    int year = 0;
    Date monsoon_start;
    std::array<DateRange, 3> phases{};

    const DateRange& operator[](Phase p) const { return phases[static_cast<std::size_t>(p)]; }
};

/// Phase I begins on the first day cumulative rainfall since the monsoon
/// start exceeds 50 mm. When that does not happen within the first calendar
/// month, Phase I begins on the first of the next month. Phases then run 35,
/// 35 and 45 days back to back. Throws DomainError listing the missing dates
/// when the series does not cover the monsoon start through Phase III's end.
PhaseWindows detect_phases(const RainfallSeries& series);

/// Sum of daily rainfall over the phase's inclusive range.
double phase_total(const RainfallSeries& series, const PhaseWindows& windows, Phase phase);

double payout(const PhaseTerm& term, double rainfall_mm);

double loading_factor(double commercial_premium, double fair_premium);

/// Expected years until the first payout when payouts arrive as a Poisson
/// process over three phases a year: (1/p)/3. Infinite for p = 0.
double years_until_payout(double probability);

struct PhaseBreakdown {
    double mean_payout_rs = 0.0;
    double payout_frequency = 0.0;
    std::size_t n_cells = 0;
};

struct PayoutCell {
    std::string village_id;
    int year = 0;
    Phase phase = Phase::I;
    DateRange window;
    double rainfall_mm = 0.0;
    double payout_rs = 0.0;
};

struct PricingResult {
    std::string label;
    double fair_premium_rs = 0.0;
    double payout_probability = 0.0;
    std::optional<double> loading_factor;
    double years_until_payout = 0.0;
    std::array<PhaseBreakdown, 3> phases{};
    std::size_t n_cells = 0;
    std::vector<PayoutCell> ledger;
    std::vector<std::string> excluded;  // village-years whose phases could not be detected
    std::vector<std::string> warnings;
};

/// Averages payouts over every village-year-phase cell. Series that fail
/// phase detection are excluded and listed.
PricingResult price(const Contract& contract, std::span<const RainfallSeries> series);

// Report emitters.
void write_pricing_report_csv(std::ostream& out, std::span<const Contract> contracts,
                              std::span<const PricingResult> results);
void write_payout_ledger_csv(std::ostream& out, std::span<const PricingResult> results);

}  // namespace yieldrisk

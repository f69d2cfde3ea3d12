#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "yieldrisk/actuarial.hpp"
#include "yieldrisk/data_model.hpp"
#include "yieldrisk/decomposition.hpp"

namespace yieldrisk {

enum class Family { normal, lognormal_shifted };
std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

struct Disturbance {
    Family family = Family::normal;
    double skew = 0.0;  // target skewness for lognormal_shifted
};

struct CropBeta {
    double intercept = 0.0;
    std::array<double, 4> slopes{};  // labor, fertilizer, mechanization, pesticide
};

struct GenerativeConfig {
    int villages = 30;
    int times = 10;
    int households_per_village = 33;
    int parcels_per_household = 5;
    // Probability that a parcel is cultivated and observed in a given time.
    double parcel_season_coverage = 0.24;
    double mu = 1.0;
    // parcel, household, season, village, time, idiosyncratic
    VarianceVector variances = {0.933, 0.002, 0.790, 0.623, 0.126, 1.623};
    std::array<Disturbance, 6> disturbances{};
    std::vector<std::pair<std::string, double>> crop_mix = {
        {"rice", 0.47}, {"sorghum", 0.23}, {"wheat", 0.14}, {"maize", 0.08}, {"cotton", 0.08}};
    std::map<std::string, CropBeta> beta = {
        {"rice", {0.0, {0.40, 0.30, 0.20, 0.20}}},     {"sorghum", {-0.6, {0.35, 0.25, 0.20, 0.15}}},
        {"wheat", {0.3, {0.40, 0.35, 0.15, 0.20}}},    {"maize", {0.5, {0.30, 0.30, 0.25, 0.10}}},
        {"cotton", {-0.3, {0.45, 0.20, 0.20, 0.25}}},
    };
    // Spread of the log inputs: persistent per parcel and fresh per season.
    double input_parcel_sd = 1.0;
    double input_season_sd = 0.5;
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const;
};

struct GenerationTruth {
    GenerativeConfig config;
    std::size_t n_obs = 0;
    std::array<std::size_t, 5> n_groups{};
    VarianceVector realized_variances{};  // sample variance of the drawn disturbances
    std::array<double, 6> realized_skewness{};
    std::size_t n_clipped = 0;            // negative transformed yields emitted as 0
    VarianceDecomposition decomposition;  // of the generating variances
};

struct GeneratedPanel {
    std::vector<YieldRecord> records;
    GenerationTruth truth;
};

/// Draws the nested and crossed level disturbances, adds crop effects,
/// inputs and noise on the transformed scale and emits raw yields via sinh.
GeneratedPanel generate_panel(const GenerativeConfig& config);

std::string truth_to_json(const GenerationTruth& truth);

/// Parameters (sigma of the underlying normal) of the shifted lognormal with
/// the given skewness.
double lognormal_sigma_for_skew(double skew);

struct PhaseTarget {
    double mean_mm = 0.0;
    double sd_mm = 0.0;
};

struct RainfallGenConfig {
    int villages = 16;
    int first_year = 2009;
    int years = 5;
    double western_fraction = 0.0;  // leading share of villages in the western region
    std::array<PhaseTarget, 3> phases{{{150.0, 60.0}, {170.0, 70.0}, {300.0, 110.0}}};
    std::uint64_t seed = 1;

    void validate() const;
};

struct GeneratedRainfall {
    std::vector<RainfallSeries> series;
    std::vector<std::array<double, 3>> drawn_totals;  // per series, after clipping
    std::vector<Date> phase_one_start;                // per series
    std::size_t n_clipped = 0;
    std::vector<std::string> report;
};

/// Per village-year: draws phase totals from normal targets (negative draws
/// clipped to 0), spreads each total evenly across the phase's days and
/// places 50 mm the day before a randomly chosen Phase I start in the first
/// monsoon month so the start is detected there.
GeneratedRainfall generate_rainfall(const RainfallGenConfig& config);

/// Phase means that put each phase's payout probability at `probability`
/// under normal totals with the configured standard deviations.
std::array<PhaseTarget, 3> quantile_matched_targets(const Contract& contract, double probability,
                                                    const std::array<double, 3>& sd_mm);

struct Calibration {
    RainfallGenConfig config;
    double probability = 0.0;  // per-phase probability used for the targets
    PricingResult pricing;
};

/// Searches the common per-phase payout probability so the contract's fair
/// premium on the generated panel lands within `tolerance_rs` of the target.
Calibration calibrate_premium(const RainfallGenConfig& base, const Contract& contract, double target_premium_rs,
                              const std::array<double, 3>& sd_mm, double tolerance_rs = 0.5);

}  // namespace yieldrisk

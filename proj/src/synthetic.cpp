#include "yieldrisk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "yieldrisk/errors.hpp"

namespace yieldrisk {

using std::chrono::days;

std::string_view to_string(Family f) { return f == Family::normal ? "normal" : "lognormal_shifted"; }

Family family_from_string(std::string_view s) {
    if (s == "normal") return Family::normal;
    if (s == "lognormal_shifted") return Family::lognormal_shifted;
    throw ConfigError("unknown disturbance family '" + std::string(s) + "'");
}

void GenerativeConfig::validate() const {
    if (villages < 1 || times < 1 || households_per_village < 1 || parcels_per_household < 1) {
        throw ConfigError("all cardinalities must be at least 1");
    }
    if (!(parcel_season_coverage > 0.0 && parcel_season_coverage <= 1.0)) {
        throw ConfigError("parcel_season_coverage must lie in (0, 1]");
    }
    for (double v : variances) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("variances must be finite and non-negative");
    }
    for (const auto& d : disturbances) {
        if (!std::isfinite(d.skew) || d.skew < 0.0) throw ConfigError("skew target must be non-negative");
    }
    if (crop_mix.empty()) throw ConfigError("crop mix is empty");
    double total = 0.0;
    for (const auto& [crop, w] : crop_mix) {
        if (!(w >= 0.0)) throw ConfigError("crop weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ConfigError("crop weights sum to zero");
    if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
    if (input_parcel_sd < 0.0 || input_season_sd < 0.0) throw ConfigError("input spreads must be non-negative");
    if (workers < 1) throw ConfigError("workers must be positive");
}

double lognormal_sigma_for_skew(double skew) {
    if (!(skew >= 0.0) || !std::isfinite(skew)) throw ConfigError("skewness target must be a finite value >= 0");
    if (skew == 0.0) return 0.0;
    auto skew_of = [](double s2) { return (std::exp(s2) + 2.0) * std::sqrt(std::expm1(s2)); };
    double lo = 0.0;
    double hi = 1.0;
    while (skew_of(hi) < skew) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (skew_of(mid) < skew ? lo : hi) = mid;
    }
    return std::sqrt(0.5 * (lo + hi));
}

namespace {

using Rng = std::mt19937_64;

Rng substream(std::uint64_t seed, std::uint32_t a, std::uint32_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), a, b};
    return Rng(seq);
}

constexpr std::uint32_t kTimeStream = 0xffffffffu;

class DisturbanceDraw {
public:
    DisturbanceDraw(const Disturbance& d, double variance) : sd_(std::sqrt(variance)) {
        if (d.family == Family::lognormal_shifted && d.skew > 0.0) {
            s_ = lognormal_sigma_for_skew(d.skew);
            const double s2 = s_ * s_;
            mean_ = std::exp(0.5 * s2);
            scale_ = std::sqrt(std::expm1(s2) * std::exp(s2));
        }
    }
    double operator()(Rng& rng) {
        const double z = normal_(rng);
        if (s_ == 0.0) return sd_ * z;
        return sd_ * (std::exp(s_ * z) - mean_) / scale_;
    }

private:
    double sd_;
    double s_ = 0.0;
    double mean_ = 0.0;
    double scale_ = 1.0;
    std::normal_distribution<double> normal_;
};

std::string padded(const std::string& prefix, int value, int count) {
    const int width = static_cast<int>(std::to_string(count).size());
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

constexpr std::array<double, 4> kInputBase = {400.0, 100.0, 2000.0, 1500.0};

struct VillageOutput {
    std::vector<YieldRecord> records;
    std::array<std::vector<double>, 6> draws;  // parcel, household, season, village, (time unused), idiosyncratic
    std::size_t clipped = 0;
};

VillageOutput generate_village(const GenerativeConfig& cfg, int v, const std::vector<double>& time_effects,
                               const std::vector<std::string>& time_ids) {
    Rng rng = substream(cfg.seed, static_cast<std::uint32_t>(v), 0x5eedu);
    std::array<DisturbanceDraw, 6> draw = {
        DisturbanceDraw(cfg.disturbances[0], cfg.variances[0]), DisturbanceDraw(cfg.disturbances[1], cfg.variances[1]),
        DisturbanceDraw(cfg.disturbances[2], cfg.variances[2]), DisturbanceDraw(cfg.disturbances[3], cfg.variances[3]),
        DisturbanceDraw(cfg.disturbances[4], cfg.variances[4]), DisturbanceDraw(cfg.disturbances[5], cfg.variances[5])};
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    std::vector<double> weights;
    for (const auto& [crop, w] : cfg.crop_mix) weights.push_back(w);
    std::discrete_distribution<std::size_t> pick_crop(weights.begin(), weights.end());

    VillageOutput out;
    const std::string village_id = padded("v", v + 1, cfg.villages);
    const double nu_v = draw[3](rng);
    out.draws[3].push_back(nu_v);
    std::vector<double> nu_s(static_cast<std::size_t>(cfg.times));
    for (auto& s : nu_s) {
        s = draw[2](rng);
        out.draws[2].push_back(s);
    }
    for (int h = 0; h < cfg.households_per_village; ++h) {
        const std::string household_id = village_id + "-" + padded("h", h + 1, cfg.households_per_village);
        const double nu_h = draw[1](rng);
        out.draws[1].push_back(nu_h);
        for (int p = 0; p < cfg.parcels_per_household; ++p) {
            const std::string parcel_id = household_id + "-" + padded("p", p + 1, cfg.parcels_per_household);
            const double nu_p = draw[0](rng);
            out.draws[0].push_back(nu_p);
            std::array<double, 4> persistent{};
            for (auto& a : persistent) a = cfg.input_parcel_sd * z(rng);
            for (int t = 0; t < cfg.times; ++t) {
                const auto ts = static_cast<std::size_t>(t);
                if (u(rng) >= cfg.parcel_season_coverage) continue;
                YieldRecord r;
                r.parcel_id = parcel_id;
                r.household_id = household_id;
                r.village_id = village_id;
                r.time_id = time_ids[ts];
                const auto& crop_name = cfg.crop_mix[pick_crop(rng)].first;
                r.crop = Crop(crop_name);
                std::array<double, 4> raw{};
                for (std::size_t k = 0; k < 4; ++k) {
                    raw[k] = kInputBase[k] * std::exp(persistent[k] + cfg.input_season_sd * z(rng));
                }
                r.labor = raw[0];
                r.fertilizer = raw[1];
                r.mechanization = raw[2];
                r.pesticide = raw[3];
                const double eps = draw[5](rng);
                out.draws[5].push_back(eps);
                double y = cfg.mu + time_effects[ts] + nu_v + nu_s[ts] + nu_h + nu_p + eps;
                auto it = cfg.beta.find(r.crop.name());
                if (it != cfg.beta.end()) {
                    y += it->second.intercept;
                    for (std::size_t k = 0; k < 4; ++k) y += it->second.slopes[k] * ihs(raw[k]);
                }
                if (y < 0.0) {
                    ++out.clipped;
                    r.yield_raw = 0.0;
                } else {
                    r.yield_raw = std::sinh(y);
                }
                out.records.push_back(std::move(r));
            }
        }
    }
    return out;
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double sample_skewness(const std::vector<double>& v) {
    if (v.size() < 3) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : v) {
        m2 += (x - m) * (x - m);
        m3 += (x - m) * (x - m) * (x - m);
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

}  // namespace

GeneratedPanel generate_panel(const GenerativeConfig& config) {
    config.validate();
    Rng time_rng = substream(config.seed, kTimeStream, 0x5eedu);
    DisturbanceDraw time_draw(config.disturbances[4], config.variances[4]);
    std::vector<double> time_effects(static_cast<std::size_t>(config.times));
    std::vector<std::string> time_ids;
    for (int t = 0; t < config.times; ++t) {
        time_effects[static_cast<std::size_t>(t)] = time_draw(time_rng);
        time_ids.push_back(padded("t", t + 1, config.times));
    }

    std::vector<VillageOutput> villages(static_cast<std::size_t>(config.villages));
    std::vector<std::exception_ptr> errors(villages.size());
    const int workers = std::min(config.workers, config.villages);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int v = w; v < config.villages; v += workers) {
                try {
                    villages[static_cast<std::size_t>(v)] = generate_village(config, v, time_effects, time_ids);
                } catch (...) {
                    errors[static_cast<std::size_t>(v)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    GeneratedPanel out;
    auto& truth = out.truth;
    truth.config = config;
    std::array<std::vector<double>, 6> all;
    all[4] = time_effects;
    for (auto& vo : villages) {
        for (std::size_t k = 0; k < 6; ++k) {
            if (k == 4) continue;
            all[k].insert(all[k].end(), vo.draws[k].begin(), vo.draws[k].end());
        }
        truth.n_clipped += vo.clipped;
        std::move(vo.records.begin(), vo.records.end(), std::back_inserter(out.records));
    }
    truth.n_obs = out.records.size();
    truth.n_groups = {all[0].size(), all[1].size(), all[2].size(), all[3].size(), all[4].size()};
    for (std::size_t k = 0; k < 6; ++k) {
        truth.realized_variances[k] = sample_variance(all[k]);
        truth.realized_skewness[k] = sample_skewness(all[k]);
    }
    const double total = std::accumulate(config.variances.begin(), config.variances.end(), 0.0);
    if (total > 0.0) truth.decomposition = decompose(config.variances);
    return out;
}

std::string truth_to_json(const GenerationTruth& truth) {
    const auto& cfg = truth.config;
    static constexpr std::array<const char*, 6> names = {"parcel", "household", "season", "village", "time",
                                                         "idiosyncratic"};
    nlohmann::ordered_json j;
    nlohmann::ordered_json c;
    c["villages"] = cfg.villages;
    c["times"] = cfg.times;
    c["households_per_village"] = cfg.households_per_village;
    c["parcels_per_household"] = cfg.parcels_per_household;
    c["parcel_season_coverage"] = cfg.parcel_season_coverage;
    c["mu"] = cfg.mu;
    c["seed"] = cfg.seed;
    for (std::size_t k = 0; k < 6; ++k) {
        c["variances"][names[k]] = cfg.variances[k];
        c["disturbances"][names[k]] = {{"family", std::string(to_string(cfg.disturbances[k].family))},
                                       {"skew", cfg.disturbances[k].skew}};
    }
    for (const auto& [crop, w] : cfg.crop_mix) c["crop_mix"][crop] = w;
    for (const auto& [crop, b] : cfg.beta) {
        c["beta"][crop] = {{"intercept", b.intercept},
                           {"labor", b.slopes[0]},
                           {"fertilizer", b.slopes[1]},
                           {"mechanization", b.slopes[2]},
                           {"pesticide", b.slopes[3]}};
    }
    j["config"] = c;
    j["n_obs"] = truth.n_obs;
    j["n_clipped"] = truth.n_clipped;
    for (std::size_t k = 0; k < 5; ++k) j["n_groups"][names[k]] = truth.n_groups[k];
    for (std::size_t k = 0; k < 6; ++k) {
        j["realized_variances"][names[k]] = truth.realized_variances[k];
        j["realized_skewness"][names[k]] = truth.realized_skewness[k];
    }
    const auto& d = truth.decomposition;
    if (d.total > 0.0) {
        for (std::size_t k = 0; k < 5; ++k) j["decomposition"]["icc"][names[k]] = d.icc[k];
        for (std::size_t k = 0; k < 6; ++k) j["decomposition"]["shares"][names[k]] = d.shares[k];
        j["decomposition"]["covariate_share"] = d.covariate_share;
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Rainfall

void RainfallGenConfig::validate() const {
    if (villages < 1 || years < 1) throw ConfigError("rainfall panel needs at least one village and year");
    if (!(western_fraction >= 0.0 && western_fraction <= 1.0)) throw ConfigError("western_fraction must lie in [0, 1]");
    for (const auto& p : phases) {
        if (!std::isfinite(p.mean_mm) || p.mean_mm < 0.0) throw ConfigError("phase target means must be non-negative");
        if (!std::isfinite(p.sd_mm) || p.sd_mm < 0.0) throw ConfigError("phase target sds must be non-negative");
    }
}

GeneratedRainfall generate_rainfall(const RainfallGenConfig& config) {
    config.validate();
    GeneratedRainfall out;
    const int western = static_cast<int>(std::lround(config.western_fraction * config.villages));
    std::normal_distribution<double> z;
    for (int v = 0; v < config.villages; ++v) {
        Rng rng = substream(config.seed, static_cast<std::uint32_t>(v), 0x4a1du);
        for (int yi = 0; yi < config.years; ++yi) {
            RainfallSeries s;
            s.village_id = padded("v", v + 1, config.villages);
            s.year = config.first_year + yi;
            s.region = v < western ? Region::western : Region::eastern_central;
            const Date ms = s.monsoon_start();
            const std::chrono::year_month_day ymd{ms};
            const auto month_days = static_cast<int>(
                static_cast<unsigned>((ymd.year() / ymd.month() / std::chrono::last).day()));

            std::array<double, 3> totals{};
            for (std::size_t k = 0; k < 3; ++k) {
                const double draw = config.phases[k].mean_mm + config.phases[k].sd_mm * z(rng);
                if (draw < 0.0) {
                    ++out.n_clipped;
                    out.report.push_back(s.village_id + " " + std::to_string(s.year) + " phase " +
                                         std::string(to_string(kAllPhases[k])) + ": drawn total " +
                                         format_double(draw) + " mm clipped to 0");
                }
                totals[k] = std::max(draw, 0.0);
            }
            std::uniform_int_distribution<int> offset_dist(1, month_days - 1);
            const int offset = offset_dist(rng);
            const double first_day = totals[0] / kPhaseLengthDays[0];
            // The trigger needs some Phase I rain; otherwise the start falls
            // back to the first of the next month.
            const bool triggered = kPhaseOneTriggerMm + first_day > kPhaseOneTriggerMm;
            const Date start = triggered ? ms + days{offset} : ms + days{month_days};

            std::vector<double> rain(static_cast<std::size_t>(month_days + 116 + 5), 0.0);
            if (triggered) rain[static_cast<std::size_t>(offset - 1)] = kPhaseOneTriggerMm;
            auto day_index = [&](Date d) { return static_cast<std::size_t>((d - ms).count()); };
            Date cursor = start;
            for (std::size_t k = 0; k < 3; ++k) {
                const double daily = totals[k] / kPhaseLengthDays[k];
                for (int d = 0; d < kPhaseLengthDays[k]; ++d) rain[day_index(cursor + days{d})] = daily;
                cursor += days{kPhaseLengthDays[k]};
            }
            for (std::size_t i = 0; i < rain.size(); ++i) {
                s.observations.push_back({ms + days{static_cast<int>(i)}, rain[i]});
            }
            out.series.push_back(std::move(s));
            out.drawn_totals.push_back(totals);
            out.phase_one_start.push_back(start);
        }
    }
    return out;
}

std::array<PhaseTarget, 3> quantile_matched_targets(const Contract& contract, double probability,
                                                    const std::array<double, 3>& sd_mm) {
    if (!(probability > 0.0 && probability < 1.0)) throw DomainError("probability must lie in (0, 1)");
    static const boost::math::normal_distribution<double> std_normal;
    std::array<PhaseTarget, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& t = contract.phases[k];
        // Deficit: P(total < k) = p. Excess: P(total > k) = p.
        const double q = t.direction == Direction::deficit ? boost::math::quantile(std_normal, probability)
                                                           : boost::math::quantile(std_normal, 1.0 - probability);
        out[k].sd_mm = sd_mm[k];
        out[k].mean_mm = std::max(0.0, t.strike_mm - sd_mm[k] * q);
    }
    return out;
}

Calibration calibrate_premium(const RainfallGenConfig& base, const Contract& contract, double target_premium_rs,
                              const std::array<double, 3>& sd_mm, double tolerance_rs) {
    auto evaluate = [&](double p) {
        Calibration c;
        c.config = base;
        c.config.phases = quantile_matched_targets(contract, p, sd_mm);
        c.probability = p;
        const auto panel = generate_rainfall(c.config);
        c.pricing = price(contract, panel.series);
        return c;
    };
    double lo = 1e-4;
    double hi = 0.9;
    Calibration best = evaluate(lo);
    if (best.pricing.fair_premium_rs > target_premium_rs + tolerance_rs) {
        throw DomainError("target premium is below what the lowest probability yields");
    }
    Calibration top = evaluate(hi);
    if (top.pricing.fair_premium_rs < target_premium_rs - tolerance_rs) {
        throw DomainError("target premium is above what the highest probability yields");
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        Calibration c = evaluate(mid);
        const double diff = c.pricing.fair_premium_rs - target_premium_rs;
        if (std::abs(diff) < std::abs(best.pricing.fair_premium_rs - target_premium_rs)) best = c;
        if (std::abs(diff) <= tolerance_rs) return c;
        (diff < 0.0 ? lo : hi) = mid;
    }
    if (std::abs(best.pricing.fair_premium_rs - target_premium_rs) > tolerance_rs) {
        throw NumericalError("premium calibration did not reach the tolerance; closest " +
                             format_double(best.pricing.fair_premium_rs));
    }
    return best;
}

}  // namespace yieldrisk

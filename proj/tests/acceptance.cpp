// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: acceptance [criterion...]   (no arguments runs all nine)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "yieldrisk/actuarial.hpp"
#include "yieldrisk/decomposition.hpp"
#include "yieldrisk/errors.hpp"
#include "yieldrisk/estimation.hpp"
#include "yieldrisk/gibbs.hpp"
#include "yieldrisk/synthetic.hpp"

using namespace yieldrisk;
using std::chrono::days;

namespace {

// Tolerances.
constexpr double kIccTol = 0.001;
constexpr double kLoadingTol = 0.001;
constexpr double kYearsTol = 0.01;
constexpr int kPayoutTerms = 1000;
constexpr int kPayoutRainValues = 100;
constexpr double kPricingTol = 1e-9;
constexpr double kRecoveryRelTol = 0.25;
constexpr double kRecoverySpread = 2.0;
constexpr double kSeasonShareTol = 0.05;
constexpr double kConjugacyTol = 0.03;
constexpr int kConjugacyDraws = 20000;
constexpr double kZetaSlopeTol = 0.01;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------- 1
Outcome icc_reproduction() {
    Outcome o;
    std::ostringstream d;
    struct Column {
        const char* name;
        VarianceVector v;
        std::array<double, 5> icc;
        std::array<long, 6> pct;
    };
    const Column cols[] = {
        {"MLE", {0.933, 0.002, 0.790, 0.623, 0.126, 1.623}, {0.228, 0.228, 0.421, 0.573, 0.604}, {23, 0, 19, 15, 3, 40}},
        {"Bayes", {1.098, 0.004, 0.903, 0.682, 0.261, 1.613}, {0.241, 0.242, 0.440, 0.589, 0.646}, {24, 0, 20, 15, 6, 35}},
    };
    for (const auto& c : cols) {
        const auto dec = decompose(c.v);
        d << c.name << " icc";
        for (std::size_t k = 0; k < 5; ++k) {
            d << ' ' << fmt("%.4f", dec.icc[k]);
            if (std::abs(dec.icc[k] - c.icc[k]) > kIccTol) o.pass = false;
        }
        d << " shares";
        for (std::size_t k = 0; k < 6; ++k) {
            d << ' ' << rounded_percent(dec.shares[k]);
            if (rounded_percent(dec.shares[k]) != c.pct[k]) o.pass = false;
        }
        d << "; ";
    }
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 2
Outcome actuarial_identities() {
    Outcome o;
    std::ostringstream d;
    const double lf = loading_factor(280.0, 190.9);
    d << "loading " << fmt("%.4f", lf);
    if (std::abs(lf - 1.467) > kLoadingTol) o.pass = false;
    const std::vector<std::pair<double, double>> cases = {
        {0.140, 2.38}, {0.123, 2.71}, {0.0877, 3.80}, {0.0414, 8.06}, {0.0292, 11.40}};
    for (const auto& [p, expected] : cases) {
        const double y = years_until_payout(p);
        const bool ok = std::abs(y - expected) <= kYearsTol;
        d << "; p=" << p << " years " << fmt("%.4f", y) << " want " << expected << (ok ? "" : " MISMATCH");
        o.pass = o.pass && ok;
    }
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 3
double brute_force_payout(double k, double z, double m, double M, bool deficit, double r) {
    if (deficit) {
        if (r <= z) return M;
        if (r >= k) return 0.0;
        return (k - r) * m;
    }
    if (r >= z) return M;
    if (r <= k) return 0.0;
    return (r - k) * m;
}

Outcome payout_oracle() {
    Outcome o;
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long mismatches = 0;
    long property_failures = 0;
    long evaluations = 0;
    for (int t = 0; t < kPayoutTerms; ++t) {
        const bool deficit = t % 2 == 0;
        double lo = std::round(300.0 * u(rng));
        if (deficit && t % 10 == 0) lo = 0.0;  // zero exit
        const double hi = lo + 1.0 + std::round(300.0 * u(rng));
        const double m = 1.0 + std::round(40.0 * u(rng)) / 2.0;
        const double M = 100.0 + std::round(2000.0 * u(rng));
        PhaseTerm term;
        term.phase = deficit ? Phase::I : Phase::III;
        term.direction = deficit ? Direction::deficit : Direction::excess;
        term.strike_mm = deficit ? hi : lo;
        term.exit_mm = deficit ? lo : hi;
        term.slope_rs_per_mm = m;
        term.max_payout_rs = M;
        const double k = term.strike_mm;
        const double z = term.exit_mm;

        std::vector<double> rain = {0.0, k, z};
        while (rain.size() < static_cast<std::size_t>(kPayoutRainValues)) rain.push_back(std::round(10.0 * 2.0 * hi * u(rng)) / 10.0);
        std::sort(rain.begin(), rain.end());
        const double cap = std::max(M, std::abs(k - z) * m);
        double prev = 0.0;
        bool have_prev = false;
        for (double r : rain) {
            const double p = payout(term, r);
            ++evaluations;
            if (p != brute_force_payout(k, z, m, M, deficit, r)) ++mismatches;
            if (p < 0.0 || p > cap) ++property_failures;
            if (deficit) {
                if (r <= z) {
                    if (p != M) ++property_failures;
                } else {
                    if (have_prev && p > prev) ++property_failures;
                    prev = p;
                    have_prev = true;
                }
            } else {
                if (r >= z) {
                    if (p != M) ++property_failures;
                } else {
                    if (have_prev && p < prev) ++property_failures;
                    prev = p;
                    have_prev = true;
                }
            }
        }
    }
    o.pass = mismatches == 0 && property_failures == 0;
    o.detail = std::to_string(evaluations) + " evaluations, " + std::to_string(mismatches) + " oracle mismatches, " +
               std::to_string(property_failures) + " property failures";
    return o;
}

// ---------------------------------------------------------------- 4
// Spreadsheet-style recomputation straight from the daily rows.
double brute_force_premium(const Contract& c, const std::vector<RainfallSeries>& panel, std::size_t& cells) {
    std::array<double, 3> sums{};
    std::array<std::size_t, 3> counts{};
    for (const auto& s : panel) {
        std::map<Date, double> rain;
        for (const auto& ob : s.observations) rain[ob.date] = ob.rain_mm;
        const int month = s.region == Region::western ? 7 : 6;
        const Date start = make_date(s.year, static_cast<unsigned>(month), 1);
        const Date next_month = make_date(s.year, static_cast<unsigned>(month + 1), 1);
        Date phase_one = next_month;
        double cum = 0.0;
        for (Date d = start; d < next_month; d += days(1)) {
            cum += rain.count(d) ? rain[d] : 0.0;
            if (cum > 50.0) {
                phase_one = d;
                break;
            }
        }
        const int lengths[3] = {35, 35, 45};
        Date first = phase_one;
        for (std::size_t k = 0; k < 3; ++k) {
            double total = 0.0;
            for (int i = 0; i < lengths[k]; ++i) total += rain[first + days(i)];
            const auto& t = c.phases[k];
            sums[k] += brute_force_payout(t.strike_mm, t.exit_mm, t.slope_rs_per_mm, t.max_payout_rs,
                                          t.direction == Direction::deficit, total);
            ++counts[k];
            first += days(lengths[k]);
        }
    }
    cells = counts[0] + counts[1] + counts[2];
    return sums[0] / static_cast<double>(counts[0]) + sums[1] / static_cast<double>(counts[1]) +
           sums[2] / static_cast<double>(counts[2]);
}

Outcome pricing_oracle() {
    Outcome o;
    RainfallGenConfig cfg;
    cfg.villages = 4;
    cfg.years = 5;
    cfg.western_fraction = 0.25;
    cfg.seed = 4242;
    const auto rain = generate_rainfall(cfg);
    std::ostringstream d;
    d << rain.series.size() << " series;";
    double worst = 0.0;
    for (const auto& c : reference_contracts()) {
        const auto r = price(c, rain.series);
        std::size_t cells = 0;
        const double oracle = brute_force_premium(c, rain.series, cells);
        const double diff = std::abs(r.fair_premium_rs - oracle);
        worst = std::max(worst, diff);
        if (diff > kPricingTol || cells != r.n_cells) o.pass = false;
        d << ' ' << c.label << '=' << fmt("%.3f", r.fair_premium_rs);
    }
    d << "; max |diff| " << fmt("%.2e", worst);
    if (rain.series.size() != 20) o.pass = false;
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 5
const char* kVarNames[6] = {"parcel", "household", "season", "village", "time", "idiosyncratic"};

Outcome recovery() {
    Outcome o;
    std::ostringstream d;

    GenerativeConfig mcfg;  // 30 villages, 10 times, 33 households and 5 parcels each
    mcfg.variances = {0.9, 0.0, 0.8, 0.6, 0.1, 1.6};
    const auto mgen = generate_panel(mcfg);
    const auto mrecords = transform_panel(mgen.records);
    d << mgen.truth.n_obs << " obs, " << mgen.truth.n_groups[1] << " households, " << mgen.truth.n_groups[0] << " parcels;";
    const auto mle = fit_mle(mrecords, HierarchySpec::full());
    const auto mv = mle.variance_vector();
    d << " MLE";
    for (std::size_t k = 0; k < 6; ++k) {
        const double truth = mcfg.variances[k];
        d << ' ' << kVarNames[k] << '=' << fmt("%.3f", mv[k]);
        if (truth == 0.0) {
            d << "(zero)";
            continue;
        }
        const double se = k < 5 ? mle.level_variances.at(kAllLevels[k]).se : mle.idiosyncratic.se;
        const bool ok = std::abs(mv[k] - truth) <= kRecoveryRelTol * truth ||
                        (std::isfinite(se) && std::abs(mv[k] - truth) <= kRecoverySpread * se);
        if (!ok) d << "(X)";
        o.pass = o.pass && ok;
    }
    const double mle_share = decompose(mle).shares[2];
    const double mle_target = mgen.truth.decomposition.shares[2];
    d << " season share " << fmt("%.3f", mle_share) << " (generating " << fmt("%.3f", mle_target) << ")";

    GenerativeConfig bcfg;
    bcfg.variances = {1.1, 0.004, 0.9, 0.68, 0.26, 1.6};
    bcfg.seed = mcfg.seed + 1;
    const auto bgen = generate_panel(bcfg);
    const auto brecords = transform_panel(bgen.records);
    ChainConfig chain;  // 5000 burn-in + 5000 kept, two chains
    const auto draws = run_gibbs(brecords, HierarchySpec::full(), {}, chain);
    d << "; Bayes (" << bgen.truth.n_obs << " obs)";
    VarianceVector post{};
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& s = draws.summary(kVarNames[k]);
        post[k] = s.mean;
        const double truth = bcfg.variances[k];
        const bool ok = std::abs(s.mean - truth) <= kRecoveryRelTol * truth || std::abs(s.mean - truth) <= kRecoverySpread * s.sd;
        d << ' ' << kVarNames[k] << '=' << fmt("%.3f", s.mean) << (ok ? "" : "(X)");
        o.pass = o.pass && ok;
    }
    const double bayes_share = decompose(post).shares[2];
    const double bayes_target = bgen.truth.decomposition.shares[2];
    d << " season share " << fmt("%.3f", bayes_share) << " (generating " << fmt("%.3f", bayes_target) << ")";
    if (std::abs(mle_share - mle_target) > kSeasonShareTol || std::abs(bayes_share - bayes_target) > kSeasonShareTol)
        o.pass = false;
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 6
Outcome conjugacy() {
    Outcome o;
    GenerativeConfig cfg;
    cfg.villages = 6;
    cfg.times = 4;
    cfg.households_per_village = 5;
    cfg.parcels_per_household = 3;
    cfg.parcel_season_coverage = 0.7;
    cfg.seed = 606;
    const auto records = transform_panel(generate_panel(cfg).records);
    DesignOptions opt;
    opt.drop_first_intercept = true;
    const auto panel = prepare_panel(records, HierarchySpec::full(), opt);
    PriorSpec priors;
    GibbsSampler s(panel, std::vector<Level>(kAllLevels.begin(), kAllLevels.end()), priors, chain_rng(66, 0));
    for (int i = 0; i < 50; ++i) s.sweep(true);
    const double n = static_cast<double>(records.size());
    const double shape = priors.variances[5].shape + n / 2.0;
    const double scale = priors.variances[5].scale + s.residual_ss() / 2.0;
    const double mean = scale / (shape - 1.0);
    const double var = mean * mean / (shape - 2.0);
    double m1 = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < kConjugacyDraws; ++i) {
        s.update_sigma2();
        const double x = s.state().sigma2;
        m1 += x;
        m2 += x * x;
    }
    m1 /= kConjugacyDraws;
    const double v = (m2 - kConjugacyDraws * m1 * m1) / (kConjugacyDraws - 1);
    const double em = std::abs(m1 / mean - 1.0);
    const double ev = std::abs(v / var - 1.0);
    o.pass = em <= kConjugacyTol && ev <= kConjugacyTol;
    o.detail = "mean rel. error " + fmt("%.4f", em) + ", variance rel. error " + fmt("%.4f", ev) + " over " +
               std::to_string(kConjugacyDraws) + " draws";
    return o;
}

// ---------------------------------------------------------------- 7
struct ArmSlopes {
    double left = 0.0;
    double right = 0.0;
};

ArmSlopes arm_slopes(const ZetaProfile& p) {
    ArmSlopes a;
    int nl = 0;
    int nr = 0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        if (p.failed[i]) continue;
        const double dx = p.grid[i] - p.mle_value;
        if (std::abs(dx) < 1e-12) continue;
        const double slope = p.abs_zeta[i] / std::abs(dx);
        if (dx < 0) {
            a.left += slope;
            ++nl;
        } else {
            a.right += slope;
            ++nr;
        }
    }
    a.left /= std::max(nl, 1);
    a.right /= std::max(nr, 1);
    return a;
}

Outcome zeta_sanity() {
    Outcome o;
    GenerativeConfig cfg;
    cfg.villages = 10;
    cfg.times = 3;
    cfg.households_per_village = 8;
    cfg.parcels_per_household = 3;
    cfg.parcel_season_coverage = 0.8;
    cfg.variances[4] = 0.5;
    cfg.seed = 77;
    const auto records = transform_panel(generate_panel(cfg).records);
    const auto fit = fit_mle(records, HierarchySpec::full());

    const auto beta = profile_zeta(records, HierarchySpec::full(), fit, "rice:labor");
    const auto b = arm_slopes(beta);
    const double beta_gap = std::abs(b.left / b.right - 1.0);
    // Piecewise-linear arms: every point's slope within tolerance of its arm mean.
    double worst_arm = 0.0;
    for (std::size_t i = 0; i < beta.grid.size(); ++i) {
        const double dx = beta.grid[i] - beta.mle_value;
        if (std::abs(dx) < 1e-12) continue;
        const double slope = beta.abs_zeta[i] / std::abs(dx);
        worst_arm = std::max(worst_arm, std::abs(slope / (dx < 0 ? b.left : b.right) - 1.0));
    }

    std::ostringstream d;
    d << "beta slopes " << fmt("%.4f", b.left) << '/' << fmt("%.4f", b.right) << " (gap " << fmt("%.4f", beta_gap)
      << ", worst within-arm " << fmt("%.4f", worst_arm) << ")";
    o.pass = beta_gap <= kZetaSlopeTol && worst_arm <= kZetaSlopeTol;

    const auto& tv = fit.level_variances.at(Level::time);
    if (tv.status != VarianceStatus::estimated) {
        o.pass = false;
        d << "; time variance not estimated (" << to_string(tv.status) << ")";
    } else {
        const auto time = profile_zeta(records, HierarchySpec::full(), fit, "time");
        const auto t = arm_slopes(time);
        d << "; 3-group time variance slopes left " << fmt("%.3f", t.left) << " right " << fmt("%.3f", t.right);
        o.pass = o.pass && t.left > t.right;
    }
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 8
Outcome null_ladder() {
    Outcome o;
    GenerativeConfig cfg;
    cfg.seed = 8;
    const auto records = transform_panel(generate_panel(cfg).records);
    struct Spec {
        const char* name;
        HierarchySpec spec;
    };
    const std::vector<Spec> ladder = {
        {"S+V+T", {{Level::season, Level::village, Level::time}, false}},
        {"+H", {{Level::household, Level::season, Level::village, Level::time}, false}},
        {"+P", {{Level::parcel, Level::household, Level::season, Level::village, Level::time}, false}},
        {"full", HierarchySpec::full()},
    };
    std::ostringstream d;
    std::vector<double> share;
    std::vector<double> aic;
    for (const auto& s : ladder) {
        const auto fit = fit_mle(records, s.spec);
        share.push_back(decompose(fit).shares[2]);
        aic.push_back(*fit.metrics.aic);
        d << s.name << " season share " << fmt("%.3f", share.back()) << " AIC " << fmt("%.1f", aic.back()) << "; ";
    }
    // Covariate-free model with every level against the full-covariate model.
    const bool share_up = share[3] > share[2];
    const bool aic_better = aic[3] < aic[2];
    const auto null_draws = run_gibbs(records, ladder[2].spec);
    const auto full_draws = run_gibbs(records, ladder[3].spec);
    const bool dic_better = full_draws.dic < null_draws.dic;
    d << "DIC null " << fmt("%.1f", null_draws.dic) << " full " << fmt("%.1f", full_draws.dic);
    o.pass = share_up && aic_better && dic_better;
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 9
template <class F>
RainfallSeries series_of(Region region, int year, int n_days, F rain) {
    RainfallSeries s;
    s.village_id = "x";
    s.year = year;
    s.region = region;
    for (int i = 0; i < n_days; ++i) s.observations.push_back({s.monsoon_start() + days(i), rain(i)});
    return s;
}

Outcome phase_detection() {
    Outcome o;
    std::ostringstream d;
    struct Case {
        const char* name;
        RainfallSeries series;
        std::optional<Date> phase_one;  // nullopt: detection must fail
    };
    const std::vector<Case> cases = {
        {"early crossing", series_of(Region::eastern_central, 2010, 150, [](int i) { return i == 2 ? 60.0 : 0.0; }),
         make_date(2010, 6, 3)},
        {"exactly 50 mm", series_of(Region::eastern_central, 2010, 150, [](int i) { return i < 5 ? 10.0 : 0.0; }),
         make_date(2010, 7, 1)},
        {"zero June", series_of(Region::eastern_central, 2011, 150, [](int) { return 0.0; }), make_date(2011, 7, 1)},
        {"western", series_of(Region::western, 2012, 150, [](int i) { return i < 9 ? 5.0 : (i == 9 ? 6.0 : 0.0); }),
         make_date(2012, 7, 10)},
        {"truncated", series_of(Region::eastern_central, 2013, 90, [](int i) { return i == 0 ? 80.0 : 1.0; }), std::nullopt},
    };
    for (const auto& c : cases) {
        bool ok = true;
        try {
            const auto w = detect_phases(c.series);
            if (!c.phase_one) {
                ok = false;
            } else {
                const Date p1 = *c.phase_one;
                ok = w[Phase::I].first == p1 && w[Phase::I].last == p1 + days(34) && w[Phase::II].first == p1 + days(35) &&
                     w[Phase::II].last == p1 + days(69) && w[Phase::III].first == p1 + days(70) &&
                     w[Phase::III].last == p1 + days(114);
            }
        } catch (const DomainError& e) {
            // Phase III would end on Sep 23; the last recorded day is Aug 29.
            ok = !c.phase_one && std::string(e.what()).find("2013-08-30..2013-09-23") != std::string::npos;
        }
        d << c.name << (ok ? " ok" : " WRONG") << "; ";
        o.pass = o.pass && ok;
    }
    o.detail = d.str();
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"ICC/share reproduction", icc_reproduction},
        {"actuarial identities", actuarial_identities},
        {"payout function oracle", payout_oracle},
        {"pricing oracle", pricing_oracle},
        {"parameter recovery", recovery},
        {"conjugacy", conjugacy},
        {"zeta profile sanity", zeta_sanity},
        {"null-model ladder", null_ladder},
        {"phase detection", phase_detection},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty()) {
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);
    }
    int failures = 0;
    for (int n : selected) {
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::printf("unknown criterion %d\n", n);
            return 2;
        }
        const auto& [name, check] = criteria[static_cast<std::size_t>(n - 1)];
        Outcome r;
        try {
            r = check();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("threw: ") + e.what();
        }
        std::printf("criterion %d %s: %s | %s\n", n, r.pass ? "PASS" : "FAIL", name, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "test_support.hpp"
#include "yieldrisk/errors.hpp"
#include "yieldrisk/estimation.hpp"

using namespace yieldrisk;

namespace {

// Balanced one-way layout: `groups` villages with `per_group` rows each,
// a single crop and no covariates.
std::vector<TransformedRecord> one_way(const std::vector<std::vector<double>>& y) {
    std::vector<TransformedRecord> out;
    for (std::size_t g = 0; g < y.size(); ++g) {
        for (std::size_t i = 0; i < y[g].size(); ++i) {
            TransformedRecord r;
            r.y = y[g][i];
            r.crop = Crop("rice");
            r.village_id = "v" + std::to_string(g);
            r.household_id = r.village_id + "h" + std::to_string(i);
            r.parcel_id = r.household_id + "p";
            r.time_id = "t" + std::to_string(i);
            out.push_back(r);
        }
    }
    return out;
}

struct AnovaMle {
    double sigma2;
    double sigma2_group;
};

// Closed-form maximum likelihood for the balanced one-way random effects
// model (interior solution).
AnovaMle anova_mle(const std::vector<std::vector<double>>& y) {
    const double a = static_cast<double>(y.size());
    const double m = static_cast<double>(y[0].size());
    double grand = 0.0;
    std::vector<double> means;
    for (const auto& g : y) {
        means.push_back(std::accumulate(g.begin(), g.end(), 0.0) / m);
        grand += means.back();
    }
    grand /= a;
    double ssw = 0.0;
    double ssb = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (double v : y[i]) ssw += (v - means[i]) * (v - means[i]);
        ssb += m * (means[i] - grand) * (means[i] - grand);
    }
    const double s2 = ssw / (a * (m - 1.0));
    return {s2, (ssb / a - s2) / m};
}

HierarchySpec village_only() { return HierarchySpec{{Level::village}, false}; }

}  // namespace

TEST_CASE("OLS recovers noiseless coefficients and season effects") {
    auto records = testing::small_panel(4);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    std::map<std::string, double> season_eff;
    for (auto& r : records) {
        const std::string key = season_key(r.village_id, r.time_id);
        if (!season_eff.count(key)) season_eff[key] = z(rng);
        const double b0 = r.crop.name() == "rice" ? 2.0 : -1.0;
        r.y = b0 + 0.5 * r.x[0] - 0.25 * r.x[1] + 0.1 * r.x[2] + 0.3 * r.x[3] + season_eff[key];
    }
    const auto fit = fit_ols(records, HierarchySpec::full());
    REQUIRE(fit.beta_labels[1] == "rice:labor");
    CHECK(fit.beta[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fit.beta[2] == doctest::Approx(-0.25).epsilon(1e-9));
    CHECK(fit.beta[6] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fit.idiosyncratic.value < 1e-20);
    // Intercept absorbs the first season, ordered by (village, time).
    const std::string first = fit.group_labels.at(Level::season).front();
    CHECK(fit.beta[0] == doctest::Approx(2.0 + season_eff[first]).epsilon(1e-9));
    CHECK(fit.metrics.r_squared.value() == doctest::Approx(1.0));
}

TEST_CASE("OLS residuals are orthogonal to the design") {
    auto records = testing::small_panel(8);
    const Eigen::MatrixXd X = build_design(records, HierarchySpec::full()).values;
    const Eigen::VectorXd y = response_vector(records);
    std::vector<std::string> labels(static_cast<std::size_t>(X.cols()), "c");
    const auto ls = least_squares(X, y, labels);
    CHECK((X.transpose() * ls.residuals).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("OLS rejects a duplicated column and names it") {
    Eigen::MatrixXd X(6, 3);
    X << 1, 2, 2, 1, 3, 3, 1, 5, 5, 1, 7, 7, 1, 1, 1, 1, 4, 4;
    Eigen::VectorXd y(6);
    y << 1, 2, 3, 4, 5, 6;
    try {
        least_squares(X, y, {"a", "b", "b_copy"});
        FAIL("rank deficiency not detected");
    } catch (const RankDeficiencyError& e) {
        REQUIRE(e.columns().size() == 1);
        CHECK((e.columns()[0] == "b" || e.columns()[0] == "b_copy"));
    }
}

TEST_CASE("MLE matches the one-way ANOVA closed form") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> z;
    std::vector<std::vector<double>> y(12, std::vector<double>(6));
    for (auto& g : y) {
        const double eff = 1.3 * z(rng);
        for (auto& v : g) v = 4.0 + eff + z(rng);
    }
    const auto oracle = anova_mle(y);
    REQUIRE(oracle.sigma2_group > 0.0);
    const auto fit = fit_mle(one_way(y), village_only());
    CHECK(fit.idiosyncratic.value == doctest::Approx(oracle.sigma2).epsilon(1e-6));
    CHECK(fit.level_variances.at(Level::village).value == doctest::Approx(oracle.sigma2_group).epsilon(1e-6));
    CHECK(fit.level_variances.at(Level::village).status == VarianceStatus::estimated);
    CHECK(fit.level_variances.at(Level::parcel).status == VarianceStatus::not_modeled);
    // Intercept is the grand mean in the balanced case.
    double grand = 0.0;
    for (const auto& g : y) grand += std::accumulate(g.begin(), g.end(), 0.0);
    CHECK(fit.beta[0] == doctest::Approx(grand / 72.0).epsilon(1e-9));
    CHECK(fit.metrics.aic.value() == doctest::Approx(2.0 * 3.0 - 2.0 * fit.metrics.log_likelihood.value()));
}

TEST_CASE("equal group means put the level variance on the boundary") {
    std::vector<std::vector<double>> y = {{1, 2, 3}, {3, 2, 1}, {2, 1, 3}, {0, 4, 2}};
    const auto fit = fit_mle(one_way(y), village_only());
    const auto& vc = fit.level_variances.at(Level::village);
    CHECK(vc.status == VarianceStatus::boundary);
    CHECK(vc.value == 0.0);
    // With the level at zero the ML residual variance is SST / n.
    const auto oracle = anova_mle(y);
    CHECK(fit.idiosyncratic.value == doctest::Approx(oracle.sigma2 * 2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("single-group level is unidentified") {
    auto records = testing::small_panel(3);
    for (auto& r : records) r.time_id = "t0";
    const auto fit = fit_mle(records, HierarchySpec::full());
    CHECK(fit.level_variances.at(Level::time).status == VarianceStatus::unidentified);
    CHECK_FALSE(fit.warnings.empty());
    CHECK(fit.variance_vector()[4] == 0.0);
}

TEST_CASE("MLE is deterministic and its EM trace never decreases") {
    auto records = testing::small_panel(17, 6, 4, 4, 2);
    const auto a = fit_mle(records, HierarchySpec::full());
    const auto b = fit_mle(records, HierarchySpec::full());
    CHECK(a.variance_vector() == b.variance_vector());
    CHECK(a.beta == b.beta);
    REQUIRE(a.loglik_trace.size() > 1);
    for (std::size_t i = 1; i < a.loglik_trace.size(); ++i) {
        CHECK(a.loglik_trace[i] >= a.loglik_trace[i - 1] - 1e-8 * std::abs(a.loglik_trace[i - 1]));
    }
    CHECK(a.converged);
    for (double v : a.variance_vector()) CHECK(v >= 0.0);
}

TEST_CASE("MLE estimates are a stationary point") {
    auto records = testing::small_panel(23, 6, 4, 4, 2);
    const auto fit = fit_mle(records, HierarchySpec::full());
    // Nudging any estimated variance up or down does not raise the likelihood.
    const double ll = fit.metrics.log_likelihood.value();
    for (Level l : kAllLevels) {
        const auto& vc = fit.level_variances.at(l);
        if (vc.status != VarianceStatus::estimated) continue;
        ZetaGrid g;
        g.explicit_values = {vc.value * 0.97, vc.value * 1.03};
        const auto prof = profile_zeta(records, HierarchySpec::full(), fit, std::string(to_string(l)), g);
        for (double lr : prof.lr) CHECK(lr >= -1e-6 * std::abs(ll));
    }
}

TEST_CASE("fixed-effect zeta profile is straight and passes through zero") {
    auto records = testing::small_panel(31, 8, 5, 5, 3, 0.9);
    const auto fit = fit_mle(records, HierarchySpec::full());
    const auto prof = profile_zeta(records, HierarchySpec::full(), fit, "rice:labor");
    REQUIRE(prof.grid.size() == 21);
    CHECK(prof.abs_zeta[10] == doctest::Approx(0.0).epsilon(1e-6));
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        CHECK_FALSE(prof.failed[i]);
        CHECK((prof.grid[i] < fit.beta[1] ? prof.zeta[i] <= 0.0 : prof.zeta[i] >= 0.0));
    }
    CHECK_THROWS_AS(profile_zeta(records, HierarchySpec::full(), fit, "rice:nothing"), ConfigError);
}

TEST_CASE("variance zeta grid is clipped at zero") {
    auto records = testing::small_panel(41, 3, 4, 3, 2);
    const auto fit = fit_mle(records, HierarchySpec::full());
    const auto prof = profile_zeta(records, HierarchySpec::full(), fit, "village");
    for (double g : prof.grid) CHECK(g >= 0.0);
    for (std::size_t i = 1; i < prof.grid.size(); ++i) CHECK(prof.grid[i] > prof.grid[i - 1]);
}

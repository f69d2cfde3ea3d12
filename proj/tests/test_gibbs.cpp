#include <cmath>
#include <random>

#include <doctest.h>

#include "test_support.hpp"
#include "yieldrisk/errors.hpp"
#include "yieldrisk/gibbs.hpp"

using namespace yieldrisk;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(v.size() - 1);
    return m;
}

PreparedPanel bayes_panel(const std::vector<TransformedRecord>& records) {
    DesignOptions opt;
    opt.drop_first_intercept = true;
    return prepare_panel(records, HierarchySpec::full(), opt);
}

ChainConfig short_chains(int burn, int keep, int chains = 2) {
    ChainConfig c;
    c.burn_in = burn;
    c.keep = keep;
    c.n_chains = chains;
    c.seed = 99;
    return c;
}

}  // namespace

TEST_CASE("idiosyncratic variance full conditional is the analytic inverse gamma") {
    auto records = testing::small_panel(3);
    const auto panel = bayes_panel(records);
    PriorSpec priors;
    priors.variances[5] = {2.0, 1.5};
    GibbsSampler s(panel, {Level::parcel, Level::village}, priors, chain_rng(1, 0));
    const double rss = s.residual_ss();
    const double n = static_cast<double>(records.size());
    const double shape = 2.0 + n / 2.0;
    const double scale = 1.5 + rss / 2.0;
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) {
        s.update_sigma2();
        draws.push_back(s.state().sigma2);
    }
    const auto m = moments(draws);
    CHECK(m.mean == doctest::Approx(scale / (shape - 1.0)).epsilon(0.03));
    CHECK(m.var == doctest::Approx(scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0))).epsilon(0.03));
}

TEST_CASE("level variance full conditional is the analytic inverse gamma") {
    auto records = testing::small_panel(4);
    const auto panel = bayes_panel(records);
    PriorSpec priors;
    priors.variances[3] = {3.0, 0.5};
    GibbsSampler s(panel, {Level::village}, priors, chain_rng(2, 0));
    auto st = s.state();
    st.effects[0] = Eigen::VectorXd::LinSpaced(st.effects[0].size(), -1.0, 1.5);
    s.set_state(st);
    const double q = static_cast<double>(st.effects[0].size());
    const double shape = 3.0 + q / 2.0;
    const double scale = 0.5 + st.effects[0].squaredNorm() / 2.0;
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) {
        s.update_level_variance(0);
        draws.push_back(s.state().level_variance[0]);
    }
    const auto m = moments(draws);
    CHECK(m.mean == doctest::Approx(scale / (shape - 1.0)).epsilon(0.03));
    CHECK(m.var == doctest::Approx(scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0))).epsilon(0.03));
}

TEST_CASE("group effect full conditional matches the normal posterior") {
    auto records = testing::small_panel(6);
    const auto panel = bayes_panel(records);
    GibbsSampler s(panel, {Level::village}, PriorSpec{}, chain_rng(3, 0));
    auto st = s.state();
    st.level_variance[0] = 0.7;
    st.sigma2 = 1.3;
    s.set_state(st);
    // Oracle: residual sums without the level, conjugate normal update.
    const auto& li = panel.index.at(Level::village);
    Eigen::VectorXd partial = panel.y;
    partial.array() -= st.mu;
    partial -= panel.design.values * st.beta;
    std::vector<double> sums(static_cast<std::size_t>(li.n_groups()), 0.0);
    for (std::size_t i = 0; i < li.group_of.size(); ++i) sums[static_cast<std::size_t>(li.group_of[i])] += partial[static_cast<Eigen::Index>(i)];
    std::vector<std::vector<double>> draws(sums.size());
    for (int it = 0; it < 20000; ++it) {
        s.update_effects(0);
        for (std::size_t g = 0; g < sums.size(); ++g) draws[g].push_back(s.state().effects[0][static_cast<Eigen::Index>(g)]);
    }
    for (std::size_t g = 0; g < sums.size(); ++g) {
        const double prec = li.size[g] / 1.3 + 1.0 / 0.7;
        const auto m = moments(draws[g]);
        CHECK(m.mean == doctest::Approx(sums[g] / 1.3 / prec).epsilon(0.03));
        CHECK(m.var == doctest::Approx(1.0 / prec).epsilon(0.03));
    }
}

TEST_CASE("inverse gamma sampler moments") {
    Rng rng = chain_rng(7, 0);
    std::vector<double> d;
    for (int i = 0; i < 40000; ++i) d.push_back(draw_inverse_gamma(6.0, 10.0, rng));
    const auto m = moments(d);
    CHECK(m.mean == doctest::Approx(2.0).epsilon(0.02));
    CHECK(m.var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("chains are reproducible and independent of the worker count") {
    auto records = testing::small_panel(12);
    auto cfg = short_chains(50, 60, 3);
    cfg.workers = 1;
    const auto a = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    cfg.workers = 3;
    const auto b = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    CHECK(a.values == b.values);
    CHECK(a.deviance == b.deviance);
    CHECK(a.values.rows() == 180);
    CHECK(a.chain_values("idiosyncratic", 0) != a.chain_values("idiosyncratic", 1));
    cfg.seed = 100;
    const auto c = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    CHECK(c.values != a.values);
}

TEST_CASE("thinning and parameter layout") {
    auto records = testing::small_panel(13);
    auto cfg = short_chains(10, 40, 2);
    cfg.thin = 4;
    cfg.store_group_effects = true;
    const auto d = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    CHECK(d.draws_per_chain == 10);
    CHECK(d.values.rows() == 20);
    CHECK(d.parameter_names.front() == "rice:labor");
    CHECK(d.column_index("mu") == static_cast<int>(d.beta_labels.size()));
    CHECK(d.parameter_names.back() == "idiosyncratic");
    CHECK(d.group_effect_draws.at(Level::village).rows() == 20);
    CHECK(d.group_effect_means.at(Level::parcel).size() == d.group_labels.at(Level::parcel).size());
    for (Eigen::Index r = 0; r < d.values.rows(); ++r) {
        for (Level l : d.fitted_levels) CHECK(d.values(r, d.column_index(std::string(to_string(l)))) > 0.0);
    }
}

TEST_CASE("invalid chain and prior settings are rejected") {
    auto records = testing::small_panel(1);
    auto cfg = short_chains(10, 10);
    cfg.thin = 20;
    CHECK_THROWS_AS(run_gibbs(records, HierarchySpec::full(), {}, cfg), ConfigError);
    PriorSpec bad;
    bad.variances[2].shape = 0.0;
    CHECK_THROWS_AS(run_gibbs(records, HierarchySpec::full(), bad, short_chains(1, 1)), ConfigError);
}

TEST_CASE("split R-hat and ESS on known sequences") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    std::vector<std::vector<double>> iid(4, std::vector<double>(2000));
    for (auto& c : iid) {
        for (auto& x : c) x = z(rng);
    }
    CHECK(split_rhat(iid) < 1.01);
    CHECK(effective_sample_size(iid) == doctest::Approx(8000.0).epsilon(0.15));

    auto shifted = iid;
    for (auto& x : shifted[0]) x += 3.0;
    CHECK(split_rhat(shifted) > 1.1);

    // AR(1) with phi = 0.9: ESS ~ N (1 - phi) / (1 + phi).
    std::vector<std::vector<double>> ar(4, std::vector<double>(20000));
    for (auto& c : ar) {
        double x = 0.0;
        for (auto& v : c) {
            x = 0.9 * x + std::sqrt(1.0 - 0.81) * z(rng);
            v = x;
        }
    }
    CHECK(effective_sample_size(ar) == doctest::Approx(80000.0 * 0.1 / 1.9).epsilon(0.2));
}

TEST_CASE("joint moves leave the posterior unchanged") {
    auto records = testing::small_panel(77, 5, 4, 3, 2);
    auto cfg = short_chains(2000, 20000, 2);
    const auto with = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    cfg.group_moves = false;
    cfg.seed = 1234;
    cfg.burn_in = 5000;
    cfg.keep = 60000;
    cfg.thin = 3;
    const auto without = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    for (const std::string name : {"idiosyncratic", "season", "parcel", "rice:labor"}) {
        const auto& a = with.summary(name);
        const auto& b = without.summary(name);
        const double se = std::sqrt(a.sd * a.sd / a.ess + b.sd * b.sd / b.ess);
        INFO(name, " ", a.mean, " vs ", b.mean, " se ", se);
        CHECK(std::abs(a.mean - b.mean) < 4.0 * se);
    }
}

TEST_CASE("DIC pieces are consistent") {
    auto records = testing::small_panel(15, 6, 4, 3, 2);
    auto cfg = short_chains(500, 1000);
    const auto d = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    CHECK(d.p_d > 0.0);
    CHECK(d.dic == doctest::Approx(d.mean_deviance + d.p_d));
    CHECK(d.dic == doctest::Approx(2.0 * d.mean_deviance - d.deviance_at_mean));
    cfg.dic_variance_form = true;
    const auto v = run_gibbs(records, HierarchySpec::full(), {}, cfg);
    CHECK(v.p_d > 0.0);

    const auto fit = summarize_fit(d);
    CHECK(fit.method == Method::bayes);
    CHECK(fit.mu.has_value());
    CHECK(fit.metrics.dic.value() == d.dic);
    CHECK(fit.n_obs == records.size());
    const auto h = posterior_histogram(d, "village", 20);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == static_cast<std::size_t>(d.values.rows()));
    CHECK(h.skewness > 0.0);
}

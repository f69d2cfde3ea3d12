#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "yieldrisk/estimation.hpp"

namespace yieldrisk {

struct NormalPrior {
    double mean = 0.0;
    double variance = 1e6;
};

struct InverseGammaPrior {
    double shape = 0.001;
    double scale = 0.001;
};

struct PriorSpec {
    NormalPrior mu;
    Eigen::VectorXd beta_mean;  // empty means zero
    double beta_variance = 1e6;
    // parcel, household, season, village, time, idiosyncratic
    std::array<InverseGammaPrior, 6> variances{};

    /// Throws ConfigError on non-positive shapes, scales or variances.
    void validate() const;
};

struct ChainConfig {
    int burn_in = 5000;
    int keep = 5000;  // iterations after burn-in; every `thin`-th is stored
    int thin = 1;
    int n_chains = 2;
    std::uint64_t seed = 20240101;
    int workers = 0;  // 0: one thread per chain up to the hardware limit
    bool store_group_effects = false;
    // Joint moves that leave the posterior invariant and speed up mixing:
    // location shifts between the grand mean and each level and between
    // nested levels, and a rescaling of each level's effects and variance.
    bool group_moves = true;
    // p_D as half the posterior variance of the deviance instead of
    // mean deviance minus deviance at the posterior mean.
    bool dic_variance_form = false;

    void validate() const;
};

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
    double rhat = 0.0;
    double ess = 0.0;
};

struct PosteriorDraws {
    HierarchySpec spec;
    std::size_t n_obs = 0;
    std::vector<Level> fitted_levels;     // levels sampled (at least two groups)
    std::vector<std::string> beta_labels;
    // Columns: beta labels, "mu", fitted level names, "idiosyncratic".
    std::vector<std::string> parameter_names;
    int n_chains = 0;
    int draws_per_chain = 0;
    Eigen::MatrixXd values;  // rows chain-major
    std::vector<double> deviance;

    std::map<Level, Eigen::VectorXd> group_effect_means;
    std::map<Level, std::vector<std::string>> group_labels;
    std::map<Level, Eigen::MatrixXd> group_effect_draws;  // filled only when requested

    std::vector<ParameterSummary> summaries;
    double mean_deviance = 0.0;
    double deviance_at_mean = 0.0;
    double p_d = 0.0;
    double dic = 0.0;
    std::vector<std::string> warnings;

    int column_index(const std::string& name) const;  // -1 if absent
    std::vector<double> chain_values(const std::string& name, int chain) const;
    const ParameterSummary& summary(const std::string& name) const;
};

using Rng = std::mt19937_64;

/// Stream for one chain; a pure function of (seed, chain).
Rng chain_rng(std::uint64_t seed, int chain);

double draw_inverse_gamma(double shape, double scale, Rng& rng);

/// Single-chain sampler over a prepared panel whose design omits the first
/// crop intercept. Exposed so individual full conditionals can be tested.
class GibbsSampler {
public:
    GibbsSampler(const PreparedPanel& panel, std::vector<Level> fitted, const PriorSpec& priors, Rng rng);

    struct State {
        Eigen::VectorXd beta;
        double mu = 0.0;
        std::vector<Eigen::VectorXd> effects;  // per fitted level
        std::vector<double> level_variance;    // per fitted level
        double sigma2 = 1.0;
    };

    const State& state() const { return state_; }
    void set_state(const State& s);
    Rng& rng() { return rng_; }

    // (mu, beta) drawn jointly.
    void update_fixed();
    void update_beta();
    void update_mu();
    void update_effects(std::size_t level);
    void update_level_variance(std::size_t level);
    void update_sigma2();
    void location_moves();
    void scale_moves();
    void sweep(bool with_group_moves);

    double residual_ss() const { return residual_.squaredNorm(); }
    double deviance() const;

private:
    void recompute_residual();
    void check_finite(const char* what) const;

    const PreparedPanel& panel_;
    std::vector<Level> fitted_;
    std::vector<const LevelIndex*> index_;
    PriorSpec priors_;
    Rng rng_;
    State state_;
    Eigen::VectorXd residual_;
    Eigen::MatrixXd xtx_;
    Eigen::MatrixXd xtx_full_;  // with the leading column of ones
    Eigen::VectorXd x_colsum_;
    struct NestPair {
        std::size_t child;
        std::size_t parent;
        const std::vector<int>* map;
    };
    std::vector<NestPair> nests_;
    long sweeps_ = 0;
};

PosteriorDraws run_gibbs(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                         const PriorSpec& priors = {}, const ChainConfig& config = {});

/// Bayes fit summary: posterior means, posterior SDs as standard errors, and
/// two-sided tail probabilities of the sign of each coefficient.
FitResult summarize_fit(const PosteriorDraws& draws);

struct Histogram {
    std::string parameter;
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
    double skewness = 0.0;
};

Histogram posterior_histogram(const PosteriorDraws& draws, const std::string& parameter, int bins = 40);

/// Split-chain potential scale reduction.
double split_rhat(const std::vector<std::vector<double>>& chains);
/// Effective sample size across chains (Geyer initial monotone sequence).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

}  // namespace yieldrisk

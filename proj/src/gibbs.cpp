#include "yieldrisk/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "yieldrisk/errors.hpp"

namespace yieldrisk {

void PriorSpec::validate() const {
    if (!(mu.variance > 0.0) || !std::isfinite(mu.mean)) throw ConfigError("mu prior needs a positive variance");
    if (!(beta_variance > 0.0)) throw ConfigError("beta prior needs a positive variance");
    for (const auto& ig : variances) {
        if (!(ig.shape > 0.0) || !(ig.scale > 0.0)) {
            throw ConfigError("inverse-gamma priors need positive shape and scale");
        }
    }
}

void ChainConfig::validate() const {
    if (burn_in < 0) throw ConfigError("burn_in must be non-negative");
    if (keep < 1) throw ConfigError("keep must be positive");
    if (thin < 1) throw ConfigError("thin must be positive");
    if (keep / thin < 1) throw ConfigError("thin exceeds keep");
    if (n_chains < 1) throw ConfigError("n_chains must be positive");
    if (workers < 0) throw ConfigError("workers must be non-negative");
}

int PosteriorDraws::column_index(const std::string& name) const {
    auto it = std::find(parameter_names.begin(), parameter_names.end(), name);
    return it == parameter_names.end() ? -1 : static_cast<int>(it - parameter_names.begin());
}

std::vector<double> PosteriorDraws::chain_values(const std::string& name, int chain) const {
    const int c = column_index(name);
    if (c < 0) throw ConfigError("unknown parameter '" + name + "'");
    if (chain < 0 || chain >= n_chains) throw ConfigError("chain out of range");
    std::vector<double> out(static_cast<std::size_t>(draws_per_chain));
    for (int i = 0; i < draws_per_chain; ++i) out[static_cast<std::size_t>(i)] = values(chain * draws_per_chain + i, c);
    return out;
}

const ParameterSummary& PosteriorDraws::summary(const std::string& name) const {
    for (const auto& s : summaries) {
        if (s.name == name) return s;
    }
    throw ConfigError("unknown parameter '" + name + "'");
}

Rng chain_rng(std::uint64_t seed, int chain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chain), 0x9e3779b9u};
    return Rng(seq);
}

double draw_inverse_gamma(double shape, double scale, Rng& rng) {
    std::gamma_distribution<double> g(shape, 1.0);
    return scale / g(rng);
}

// ---------------------------------------------------------------------------

GibbsSampler::GibbsSampler(const PreparedPanel& panel, std::vector<Level> fitted, const PriorSpec& priors,
                           Rng rng)
    : panel_(panel), fitted_(std::move(fitted)), priors_(priors), rng_(std::move(rng)) {
    const Eigen::Index p = panel_.design.cols();
    if (priors_.beta_mean.size() == 0) priors_.beta_mean = Eigen::VectorXd::Zero(p);
    if (priors_.beta_mean.size() != p) throw ConfigError("beta prior mean has the wrong length");
    for (Level l : fitted_) index_.push_back(&panel_.index.at(l));
    for (std::size_t c = 0; c < fitted_.size(); ++c) {
        for (const auto& pm : index_[c]->parents) {
            auto it = std::find(fitted_.begin(), fitted_.end(), pm.parent);
            if (it != fitted_.end()) {
                nests_.push_back({c, static_cast<std::size_t>(it - fitted_.begin()), &pm.group});
            }
        }
    }
    xtx_ = panel_.design.values.transpose() * panel_.design.values;
    x_colsum_ = panel_.design.values.colwise().sum().transpose();
    xtx_full_.resize(p + 1, p + 1);
    xtx_full_(0, 0) = static_cast<double>(panel_.y.size());
    xtx_full_.block(1, 0, p, 1) = x_colsum_;
    xtx_full_.block(0, 1, 1, p) = x_colsum_.transpose();
    xtx_full_.bottomRightCorner(p, p) = xtx_;

    const double ybar = panel_.y.mean();
    const double vy = std::max((panel_.y.array() - ybar).square().mean(), 1e-8);
    state_.beta = Eigen::VectorXd::Zero(p);
    state_.mu = ybar;
    for (const auto* li : index_) {
        state_.effects.push_back(Eigen::VectorXd::Zero(li->n_groups()));
        state_.level_variance.push_back(vy / static_cast<double>(fitted_.size() + 1));
    }
    state_.sigma2 = vy / static_cast<double>(fitted_.size() + 1);
    recompute_residual();
}

void GibbsSampler::set_state(const State& s) {
    if (s.beta.size() != state_.beta.size() || s.effects.size() != state_.effects.size()) {
        throw ConfigError("sampler state has the wrong shape");
    }
    state_ = s;
    recompute_residual();
}

void GibbsSampler::recompute_residual() {
    residual_ = panel_.y;
    residual_.array() -= state_.mu;
    if (state_.beta.size() > 0) residual_ -= panel_.design.values * state_.beta;
    for (std::size_t l = 0; l < index_.size(); ++l) {
        const auto& g = index_[l]->group_of;
        for (std::size_t i = 0; i < g.size(); ++i) residual_[static_cast<Eigen::Index>(i)] -= state_.effects[l][g[i]];
    }
}

void GibbsSampler::check_finite(const char* what) const {
    bool ok = std::isfinite(state_.mu) && std::isfinite(state_.sigma2) && state_.beta.allFinite();
    for (std::size_t l = 0; l < fitted_.size() && ok; ++l) {
        ok = std::isfinite(state_.level_variance[l]) && state_.effects[l].allFinite();
    }
    if (!ok) {
        throw NumericalError("non-finite value in Gibbs update of " + std::string(what) + " at sweep " +
                             std::to_string(sweeps_));
    }
}

void GibbsSampler::update_fixed() {
    const Eigen::Index p = state_.beta.size();
    const auto& X = panel_.design.values;
    const double s2 = state_.sigma2;
    const double b = priors_.beta_variance;
    Eigen::MatrixXd prec = xtx_full_ / s2;
    prec(0, 0) += 1.0 / priors_.mu.variance;
    prec.diagonal().tail(p).array() += 1.0 / b;
    Eigen::VectorXd current(p + 1);
    current << state_.mu, state_.beta;
    Eigen::VectorXd xr(p + 1);
    xr << residual_.sum(), X.transpose() * residual_;
    Eigen::VectorXd rhs = (xr + xtx_full_ * current) / s2;
    rhs[0] += priors_.mu.mean / priors_.mu.variance;
    rhs.tail(p) += priors_.beta_mean / b;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericalError("fixed-effect conditional precision is not positive definite");
    const Eigen::VectorXd mean = llt.solve(rhs);
    std::normal_distribution<double> z;
    Eigen::VectorXd e(p + 1);
    for (Eigen::Index k = 0; k <= p; ++k) e[k] = z(rng_);
    const Eigen::VectorXd draw = mean + llt.matrixU().solve(e);
    const Eigen::VectorXd delta = draw - current;
    residual_.array() -= delta[0];
    if (p > 0) residual_ -= X * delta.tail(p);
    state_.mu = draw[0];
    state_.beta = draw.tail(p);
    check_finite("mu and beta");
}

void GibbsSampler::update_beta() {
    const Eigen::Index p = state_.beta.size();
    if (p == 0) return;
    const auto& X = panel_.design.values;
    const double s2 = state_.sigma2;
    const double b = priors_.beta_variance;
    Eigen::MatrixXd prec = xtx_ / s2;
    prec.diagonal().array() += 1.0 / b;
    const Eigen::VectorXd rhs = (X.transpose() * residual_ + xtx_ * state_.beta) / s2 + priors_.beta_mean / b;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericalError("beta conditional precision is not positive definite");
    const Eigen::VectorXd mean = llt.solve(rhs);
    std::normal_distribution<double> z;
    Eigen::VectorXd e(p);
    for (Eigen::Index k = 0; k < p; ++k) e[k] = z(rng_);
    const Eigen::VectorXd draw = mean + llt.matrixU().solve(e);
    residual_ -= X * (draw - state_.beta);
    state_.beta = draw;
    check_finite("beta");
}

void GibbsSampler::update_effects(std::size_t l) {
    const auto& li = *index_[l];
    Eigen::VectorXd& nu = state_.effects[l];
    const Eigen::Index q = nu.size();
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(q);
    for (std::size_t i = 0; i < li.group_of.size(); ++i) sums[li.group_of[i]] += residual_[static_cast<Eigen::Index>(i)];
    const double s2 = state_.sigma2;
    const double tau2 = state_.level_variance[l];
    std::normal_distribution<double> z;
    Eigen::VectorXd delta(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        const double nj = static_cast<double>(li.size[static_cast<std::size_t>(j)]);
        const double prec = nj / s2 + 1.0 / tau2;
        const double mean = (sums[j] + nj * nu[j]) / s2 / prec;
        const double draw = mean + z(rng_) / std::sqrt(prec);
        delta[j] = draw - nu[j];
        nu[j] = draw;
    }
    for (std::size_t i = 0; i < li.group_of.size(); ++i) residual_[static_cast<Eigen::Index>(i)] -= delta[li.group_of[i]];
    check_finite(std::string(to_string(fitted_[l])).c_str());
}

void GibbsSampler::update_mu() {
    const double n = static_cast<double>(residual_.size());
    const double s2 = state_.sigma2;
    const double prec = n / s2 + 1.0 / priors_.mu.variance;
    const double mean = ((residual_.sum() + n * state_.mu) / s2 + priors_.mu.mean / priors_.mu.variance) / prec;
    std::normal_distribution<double> z;
    const double draw = mean + z(rng_) / std::sqrt(prec);
    residual_.array() -= draw - state_.mu;
    state_.mu = draw;
    check_finite("mu");
}

void GibbsSampler::update_level_variance(std::size_t l) {
    const auto& prior = priors_.variances[static_cast<std::size_t>(fitted_[l])];
    const Eigen::VectorXd& nu = state_.effects[l];
    const double shape = prior.shape + 0.5 * static_cast<double>(nu.size());
    const double scale = prior.scale + 0.5 * nu.squaredNorm();
    state_.level_variance[l] = draw_inverse_gamma(shape, scale, rng_);
    check_finite(std::string(to_string(fitted_[l])).c_str());
}

void GibbsSampler::update_sigma2() {
    const auto& prior = priors_.variances[5];
    const double shape = prior.shape + 0.5 * static_cast<double>(residual_.size());
    const double scale = prior.scale + 0.5 * residual_.squaredNorm();
    state_.sigma2 = draw_inverse_gamma(shape, scale, rng_);
    check_finite("idiosyncratic");
}

void GibbsSampler::location_moves() {
    std::normal_distribution<double> z;
    // Grand mean against each level: mu - c, nu + c.
    for (std::size_t l = 0; l < fitted_.size(); ++l) {
        Eigen::VectorXd& nu = state_.effects[l];
        const double tau2 = state_.level_variance[l];
        const double b = priors_.mu.variance;
        const double prec = 1.0 / b + static_cast<double>(nu.size()) / tau2;
        const double mean = ((state_.mu - priors_.mu.mean) / b - nu.sum() / tau2) / prec;
        const double c = mean + z(rng_) / std::sqrt(prec);
        state_.mu -= c;
        nu.array() += c;
    }
    // Parent group against its child groups: parent - c, children + c.
    for (const auto& nest : nests_) {
        Eigen::VectorXd& child = state_.effects[nest.child];
        Eigen::VectorXd& parent = state_.effects[nest.parent];
        const double tc = state_.level_variance[nest.child];
        const double tp = state_.level_variance[nest.parent];
        const auto& map = *nest.map;
        Eigen::VectorXd child_sum = Eigen::VectorXd::Zero(parent.size());
        Eigen::VectorXd child_count = Eigen::VectorXd::Zero(parent.size());
        for (std::size_t k = 0; k < map.size(); ++k) {
            child_sum[map[k]] += child[static_cast<Eigen::Index>(k)];
            child_count[map[k]] += 1.0;
        }
        Eigen::VectorXd shift(parent.size());
        for (Eigen::Index j = 0; j < parent.size(); ++j) {
            const double prec = 1.0 / tp + child_count[j] / tc;
            const double mean = (parent[j] / tp - child_sum[j] / tc) / prec;
            shift[j] = mean + z(rng_) / std::sqrt(prec);
        }
        parent -= shift;
        for (std::size_t k = 0; k < map.size(); ++k) child[static_cast<Eigen::Index>(k)] += shift[map[k]];
    }
    check_finite("location move");
}

void GibbsSampler::scale_moves() {
    // Rescale nu_l -> a nu_l and tau2_l -> a^2 tau2_l. The conditional of a
    // is Gaussian times |a|^(-2 shape - 1) exp(-scale / (a^2 tau2)); the
    // Gaussian part is proposed exactly and the rest enters the acceptance.
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    for (std::size_t l = 0; l < fitted_.size(); ++l) {
        const auto& li = *index_[l];
        Eigen::VectorXd& nu = state_.effects[l];
        const auto& prior = priors_.variances[static_cast<std::size_t>(fitted_[l])];
        // r0 = residual + Z nu; m = (Z nu)' r0 / |Z nu|^2.
        double zz = 0.0;
        double zr = 0.0;
        for (std::size_t i = 0; i < li.group_of.size(); ++i) {
            const double zn = nu[li.group_of[i]];
            zz += zn * zn;
            zr += zn * residual_[static_cast<Eigen::Index>(i)];
        }
        if (!(zz > 0.0)) continue;
        const double mean = 1.0 + zr / zz;
        const double sd = std::sqrt(state_.sigma2 / zz);
        const double a = mean + sd * z(rng_);
        if (a == 0.0) continue;
        const double tau2 = state_.level_variance[l];
        const double log_w_new = (-2.0 * prior.shape - 1.0) * std::log(std::abs(a)) - prior.scale / (a * a * tau2);
        const double log_w_old = -prior.scale / tau2;
        if (std::log(u(rng_)) >= log_w_new - log_w_old) continue;
        for (std::size_t i = 0; i < li.group_of.size(); ++i) {
            residual_[static_cast<Eigen::Index>(i)] -= (a - 1.0) * nu[li.group_of[i]];
        }
        nu *= a;
        state_.level_variance[l] *= a * a;
    }
    check_finite("scale move");
}

void GibbsSampler::sweep(bool with_group_moves) {
    ++sweeps_;
    update_fixed();
    for (std::size_t l = 0; l < fitted_.size(); ++l) update_effects(l);
    if (with_group_moves && !fitted_.empty()) {
        location_moves();
        scale_moves();
    }
    for (std::size_t l = 0; l < fitted_.size(); ++l) update_level_variance(l);
    update_sigma2();
}

double GibbsSampler::deviance() const {
    const double n = static_cast<double>(residual_.size());
    return n * std::log(2.0 * std::numbers::pi * state_.sigma2) + residual_.squaredNorm() / state_.sigma2;
}

// ---------------------------------------------------------------------------

namespace {

struct ChainOutput {
    Eigen::MatrixXd values;
    std::vector<double> deviance;
    std::vector<Eigen::VectorXd> effect_sums;
    std::vector<Eigen::MatrixXd> effect_draws;
};

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ChainOutput run_chain(const PreparedPanel& panel, const std::vector<Level>& fitted, const PriorSpec& priors,
                      const ChainConfig& cfg, int chain) {
    GibbsSampler sampler(panel, fitted, priors, chain_rng(cfg.seed, chain));
    // Overdispersed starting point, drawn from the chain's own stream.
    {
        GibbsSampler::State s = sampler.state();
        std::normal_distribution<double> z;
        const double sd = std::sqrt(std::max(s.sigma2 * static_cast<double>(fitted.size() + 1), 1e-8));
        s.mu += 0.5 * sd * z(sampler.rng());
        for (double& v : s.level_variance) v *= std::exp(z(sampler.rng()));
        s.sigma2 *= std::exp(0.5 * z(sampler.rng()));
        sampler.set_state(s);
    }
    const Eigen::Index p = panel.design.cols();
    const auto L = fitted.size();
    const int kept = cfg.keep / cfg.thin;
    ChainOutput out;
    out.values.resize(kept, p + 2 + static_cast<Eigen::Index>(L));
    out.deviance.reserve(static_cast<std::size_t>(kept));
    for (const auto& e : sampler.state().effects) {
        out.effect_sums.push_back(Eigen::VectorXd::Zero(e.size()));
        if (cfg.store_group_effects) out.effect_draws.emplace_back(kept, e.size());
    }
    for (int it = 0; it < cfg.burn_in; ++it) sampler.sweep(cfg.group_moves);
    int row = 0;
    for (int it = 1; it <= kept * cfg.thin; ++it) {
        sampler.sweep(cfg.group_moves);
        if (it % cfg.thin != 0) continue;
        const auto& s = sampler.state();
        out.values.row(row).head(p) = s.beta.transpose();
        out.values(row, p) = s.mu;
        for (std::size_t l = 0; l < L; ++l) {
            out.values(row, p + 1 + static_cast<Eigen::Index>(l)) = s.level_variance[l];
            out.effect_sums[l] += s.effects[l];
            if (cfg.store_group_effects) out.effect_draws[l].row(row) = s.effects[l].transpose();
        }
        out.values(row, p + 1 + static_cast<Eigen::Index>(L)) = s.sigma2;
        out.deviance.push_back(sampler.deviance());
        ++row;
    }
    return out;
}

}  // namespace

PosteriorDraws run_gibbs(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                         const PriorSpec& priors, const ChainConfig& config) {
    priors.validate();
    config.validate();
    DesignOptions design_options;
    design_options.drop_first_intercept = true;
    const PreparedPanel panel = prepare_panel(records, spec, design_options);

    PosteriorDraws draws;
    draws.spec = spec;
    draws.n_obs = static_cast<std::size_t>(panel.y.size());
    draws.beta_labels = panel.design.column_labels;
    for (const auto& li : panel.index.levels) {
        if (li.n_groups() >= 2) {
            draws.fitted_levels.push_back(li.level);
        } else {
            draws.warnings.push_back("level '" + std::string(to_string(li.level)) +
                                     "' has a single group; its variance is unidentified");
        }
    }
    draws.parameter_names = draws.beta_labels;
    draws.parameter_names.push_back("mu");
    for (Level l : draws.fitted_levels) draws.parameter_names.emplace_back(to_string(l));
    draws.parameter_names.push_back("idiosyncratic");
    draws.n_chains = config.n_chains;
    draws.draws_per_chain = config.keep / config.thin;

    std::vector<ChainOutput> chains(static_cast<std::size_t>(config.n_chains));
    std::vector<std::exception_ptr> errors(chains.size());
    int workers = config.workers;
    if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, config.n_chains);
    for (int start = 0; start < config.n_chains; start += workers) {
        std::vector<std::thread> pool;
        for (int c = start; c < std::min(start + workers, config.n_chains); ++c) {
            pool.emplace_back([&, c] {
                try {
                    chains[static_cast<std::size_t>(c)] = run_chain(panel, draws.fitted_levels, priors, config, c);
                } catch (...) {
                    errors[static_cast<std::size_t>(c)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    const Eigen::Index per = draws.draws_per_chain;
    const Eigen::Index total = per * config.n_chains;
    const Eigen::Index cols = static_cast<Eigen::Index>(draws.parameter_names.size());
    draws.values.resize(total, cols);
    for (int c = 0; c < config.n_chains; ++c) {
        auto& ch = chains[static_cast<std::size_t>(c)];
        draws.values.middleRows(c * per, per) = ch.values;
        draws.deviance.insert(draws.deviance.end(), ch.deviance.begin(), ch.deviance.end());
    }
    for (std::size_t l = 0; l < draws.fitted_levels.size(); ++l) {
        const Level level = draws.fitted_levels[l];
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(chains.front().effect_sums[l].size());
        for (const auto& ch : chains) sum += ch.effect_sums[l];
        draws.group_effect_means[level] = sum / static_cast<double>(total);
        draws.group_labels[level] = panel.index.at(level).labels;
        if (config.store_group_effects) {
            Eigen::MatrixXd all(total, sum.size());
            for (int c = 0; c < config.n_chains; ++c) {
                all.middleRows(c * per, per) = chains[static_cast<std::size_t>(c)].effect_draws[l];
            }
            draws.group_effect_draws[level] = std::move(all);
        }
    }
    chains.clear();

    // Summaries and convergence diagnostics.
    for (Eigen::Index k = 0; k < cols; ++k) {
        ParameterSummary s;
        s.name = draws.parameter_names[static_cast<std::size_t>(k)];
        std::vector<double> col(draws.values.col(k).data(), draws.values.col(k).data() + total);
        s.mean = draws.values.col(k).mean();
        s.sd = total > 1 ? std::sqrt((draws.values.col(k).array() - s.mean).square().sum() /
                                     static_cast<double>(total - 1))
                         : 0.0;
        std::vector<std::vector<double>> per_chain;
        for (int c = 0; c < config.n_chains; ++c) {
            per_chain.emplace_back(col.begin() + c * per, col.begin() + (c + 1) * per);
        }
        s.rhat = split_rhat(per_chain);
        s.ess = effective_sample_size(per_chain);
        std::sort(col.begin(), col.end());
        s.q025 = quantile_sorted(col, 0.025);
        s.q50 = quantile_sorted(col, 0.5);
        s.q975 = quantile_sorted(col, 0.975);
        if (k > static_cast<Eigen::Index>(draws.beta_labels.size()) && std::isfinite(s.rhat) && s.rhat > 1.1) {
            draws.warnings.push_back("split R-hat for '" + s.name + "' is " + format_double(s.rhat) +
                                     " (above 1.1)");
        }
        draws.summaries.push_back(std::move(s));
    }

    // DIC from the conditional deviance.
    const double n = static_cast<double>(panel.y.size());
    double dsum = 0.0;
    for (double d : draws.deviance) dsum += d;
    draws.mean_deviance = dsum / static_cast<double>(draws.deviance.size());
    const Eigen::Index p = panel.design.cols();
    Eigen::VectorXd resid = panel.y;
    resid.array() -= draws.summaries[static_cast<std::size_t>(p)].mean;
    if (p > 0) {
        Eigen::VectorXd bbar(p);
        for (Eigen::Index k = 0; k < p; ++k) bbar[k] = draws.summaries[static_cast<std::size_t>(k)].mean;
        resid -= panel.design.values * bbar;
    }
    for (Level l : draws.fitted_levels) {
        const auto& li = panel.index.at(l);
        const auto& nu = draws.group_effect_means.at(l);
        for (std::size_t i = 0; i < li.group_of.size(); ++i) resid[static_cast<Eigen::Index>(i)] -= nu[li.group_of[i]];
    }
    const double s2bar = draws.summaries.back().mean;
    draws.deviance_at_mean = n * std::log(2.0 * std::numbers::pi * s2bar) + resid.squaredNorm() / s2bar;
    if (config.dic_variance_form) {
        double v = 0.0;
        for (double d : draws.deviance) v += (d - draws.mean_deviance) * (d - draws.mean_deviance);
        v /= static_cast<double>(std::max<std::size_t>(draws.deviance.size() - 1, 1));
        draws.p_d = 0.5 * v;
    } else {
        draws.p_d = draws.mean_deviance - draws.deviance_at_mean;
    }
    draws.dic = draws.mean_deviance + draws.p_d;
    return draws;
}

FitResult summarize_fit(const PosteriorDraws& draws) {
    FitResult fit;
    fit.method = Method::bayes;
    fit.spec = draws.spec;
    fit.beta_labels = draws.beta_labels;
    const auto p = static_cast<Eigen::Index>(draws.beta_labels.size());
    fit.beta.resize(p);
    fit.standard_errors.resize(p);
    fit.p_values.resize(p);
    const Eigen::Index rows = draws.values.rows();
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto& s = draws.summaries[static_cast<std::size_t>(k)];
        fit.beta[k] = s.mean;
        fit.standard_errors[k] = s.sd;
        const double positive = static_cast<double>((draws.values.col(k).array() > 0.0).count());
        const double frac = positive / static_cast<double>(rows);
        fit.p_values[k] = std::min(1.0, 2.0 * std::min(frac, 1.0 - frac));
    }
    fit.mu = draws.summary("mu").mean;
    for (Level l : kAllLevels) {
        VarianceComponent vc;
        vc.status = draws.spec.has(l) ? VarianceStatus::unidentified : VarianceStatus::not_modeled;
        fit.level_variances[l] = vc;
    }
    bool converged = true;
    for (Level l : draws.fitted_levels) {
        const auto& s = draws.summary(std::string(to_string(l)));
        fit.level_variances[l] = VarianceComponent{s.mean, s.sd, VarianceStatus::estimated};
        fit.group_effects[l] = draws.group_effect_means.at(l);
        fit.group_labels[l] = draws.group_labels.at(l);
        if (!(s.rhat <= 1.1)) converged = false;
    }
    const auto& si = draws.summary("idiosyncratic");
    fit.idiosyncratic = VarianceComponent{si.mean, si.sd, VarianceStatus::estimated};
    if (!(si.rhat <= 1.1)) converged = false;
    fit.n_obs = draws.n_obs;
    fit.metrics.dic = draws.dic;
    fit.metrics.p_d = draws.p_d;
    fit.converged = converged;
    fit.iterations = draws.draws_per_chain;
    fit.warnings = draws.warnings;
    return fit;
}

Histogram posterior_histogram(const PosteriorDraws& draws, const std::string& parameter, int bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    const int c = draws.column_index(parameter);
    if (c < 0) throw ConfigError("unknown parameter '" + parameter + "'");
    const auto col = draws.values.col(c);
    Histogram h;
    h.parameter = parameter;
    const double lo = col.minCoeff();
    double hi = col.maxCoeff();
    if (hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + b * width);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        auto b = static_cast<int>((col[i] - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    const double m = col.mean();
    const double m2 = (col.array() - m).square().mean();
    const double m3 = (col.array() - m).cube().mean();
    h.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return h;
}

}  // namespace yieldrisk

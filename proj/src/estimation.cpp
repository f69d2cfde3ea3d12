#include "yieldrisk/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "optimize.hpp"
#include "yieldrisk/errors.hpp"
#include "yieldrisk/mixed_model.hpp"

namespace yieldrisk {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::ols: return "ols";
        case Method::mle: return "mle";
        case Method::bayes: return "bayes";
    }
    return "?";
}

std::string_view to_string(VarianceStatus s) {
    switch (s) {
        case VarianceStatus::estimated: return "estimated";
        case VarianceStatus::boundary: return "boundary";
        case VarianceStatus::unidentified: return "unidentified";
        case VarianceStatus::not_modeled: return "not_modeled";
    }
    return "?";
}

std::array<double, 6> FitResult::variance_vector() const {
    std::array<double, 6> v{};
    for (std::size_t k = 0; k < kAllLevels.size(); ++k) {
        auto it = level_variances.find(kAllLevels[k]);
        if (it == level_variances.end()) continue;
        const auto st = it->second.status;
        if (st == VarianceStatus::estimated || st == VarianceStatus::boundary) v[k] = it->second.value;
    }
    v[5] = idiosyncratic.value;
    return v;
}

PreparedPanel prepare_panel(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                            const DesignOptions& options) {
    spec.validate();
    if (records.empty()) throw ConfigError("panel has no observations");
    PreparedPanel p;
    p.spec = spec;
    p.index = build_index(records, spec);
    p.design = build_design(records, spec, options);
    p.y = response_vector(records);
    return p;
}

namespace {

double normal_two_sided_p(double z) {
    if (!std::isfinite(z)) return std::numeric_limits<double>::quiet_NaN();
    static const boost::math::normal_distribution<double> std_normal;
    return 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(z)));
}

void mark_absent_levels(FitResult& fit, const HierarchySpec& spec) {
    for (Level l : kAllLevels) {
        fit.level_variances[l] = VarianceComponent{0.0, std::numeric_limits<double>::quiet_NaN(),
                                                   spec.has(l) ? VarianceStatus::unidentified
                                                               : VarianceStatus::not_modeled};
    }
}

}  // namespace

LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const std::vector<std::string>& labels) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p) {
        throw RankDeficiencyError("least squares needs more observations (" + std::to_string(n) +
                                      ") than columns (" + std::to_string(p) + ")",
                                  {});
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p) {
        std::vector<std::string> dependent;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < p; ++k) {
            const auto col = static_cast<std::size_t>(perm[k]);
            dependent.push_back(col < labels.size() ? labels[col] : "column " + std::to_string(col));
        }
        std::sort(dependent.begin(), dependent.end());
        std::string msg = "design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                          std::to_string(p) + "); collinear column(s):";
        for (const auto& d : dependent) msg += " " + d;
        throw RankDeficiencyError(msg, dependent);
    }
    LeastSquares ls;
    ls.coef = qr.solve(y);
    ls.residuals = y - X * ls.coef;
    ls.rss = ls.residuals.squaredNorm();
    ls.df = n - p;
    ls.sigma2 = ls.rss / static_cast<double>(ls.df);
    const double tss = (y.array() - y.mean()).matrix().squaredNorm();
    ls.r_squared = tss > 0.0 ? 1.0 - ls.rss / tss : 0.0;
    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::VectorXd diag_perm = Rinv.rowwise().squaredNorm();
    ls.se.resize(p);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = 0; k < p; ++k) ls.se[perm[k]] = std::sqrt(ls.sigma2 * diag_perm[k]);
    return ls;
}

FitResult fit_ols(std::span<const TransformedRecord> records, const HierarchySpec& spec) {
    spec.validate();
    if (records.empty()) throw ConfigError("panel has no observations");
    const DesignMatrix design = build_design(records, spec);
    const Eigen::VectorXd y = response_vector(records);

    std::map<std::pair<std::string, std::string>, int> season_ids;
    for (const auto& r : records) season_ids.emplace(std::make_pair(r.village_id, r.time_id), 0);
    std::vector<std::string> season_labels;
    int next = 0;
    for (auto& [key, id] : season_ids) {
        id = next++;
        season_labels.push_back(season_key(key.first, key.second));
    }
    const Eigen::Index p = design.cols();
    const Eigen::Index s = static_cast<Eigen::Index>(season_ids.size());
    const Eigen::Index n = static_cast<Eigen::Index>(records.size());

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, p + s - 1);
    X.leftCols(p) = design.values;
    std::vector<std::string> labels = design.column_labels;
    for (Eigen::Index k = 1; k < s; ++k) labels.push_back("season:" + season_labels[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = records[static_cast<std::size_t>(i)];
        const int id = season_ids.at({r.village_id, r.time_id});
        if (id > 0) X(i, p + id - 1) = 1.0;
    }

    const LeastSquares ls = least_squares(X, y, labels);
    boost::math::students_t_distribution<double> tdist(static_cast<double>(ls.df));

    FitResult fit;
    fit.method = Method::ols;
    fit.spec = spec;
    fit.n_obs = records.size();
    fit.beta_labels = design.column_labels;
    fit.beta = ls.coef.head(p);
    fit.standard_errors = ls.se.head(p);
    fit.p_values.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double t = fit.beta[k] / fit.standard_errors[k];
        fit.p_values[k] = std::isfinite(t)
                              ? 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(t)))
                              : std::numeric_limits<double>::quiet_NaN();
    }
    for (Level l : kAllLevels) fit.level_variances[l] = VarianceComponent{};
    Eigen::VectorXd seasons = Eigen::VectorXd::Zero(s);
    seasons.tail(s - 1) = ls.coef.tail(s - 1);
    fit.group_effects[Level::season] = seasons;
    fit.group_labels[Level::season] = season_labels;
    fit.idiosyncratic = VarianceComponent{
        ls.sigma2, ls.sigma2 * std::sqrt(2.0 / static_cast<double>(ls.df)), VarianceStatus::estimated};
    const double s2_ml = ls.rss / static_cast<double>(n);
    const double ll = -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * s2_ml) + 1.0);
    fit.metrics.log_likelihood = ll;
    fit.metrics.aic = 2.0 * static_cast<double>(X.cols() + 1) - 2.0 * ll;
    fit.metrics.r_squared = ls.r_squared;
    return fit;
}

// ---------------------------------------------------------------------------
// Maximum likelihood

namespace {

struct MleProblem {
    PreparedPanel panel;
    std::vector<Level> fitted;  // levels with at least two groups
    std::vector<const LevelIndex*> level_ptrs;
};

MleProblem make_problem(std::span<const TransformedRecord> records, const HierarchySpec& spec) {
    MleProblem prob{prepare_panel(records, spec), {}, {}};
    for (const auto& li : prob.panel.index.levels) {
        if (li.n_groups() >= 2) {
            prob.fitted.push_back(li.level);
            prob.level_ptrs.push_back(&prob.panel.index.at(li.level));
        }
    }
    return prob;
}

// Maximizes the profile likelihood over the log-variances marked free.
// Returns the optimized theta. `trace` receives EM log-likelihoods.
struct OptimizeOutcome {
    Eigen::VectorXd theta;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
    bool monotone = true;
};

OptimizeOutcome maximize(const MixedModel& model, Eigen::VectorXd theta, const std::vector<bool>& free,
                         const MleOptions& opt, bool run_em) {
    const Eigen::Index d = theta.size();
    const double floor_var = std::exp(opt.log_variance_floor);
    OptimizeOutcome out;
    int iter = 0;

    if (run_em) {
        double prev = -std::numeric_limits<double>::infinity();
        while (iter < opt.max_iter) {
            const auto ev = model.evaluate(theta, true);
            ++iter;
            out.trace.push_back(ev.log_likelihood);
            if (std::isfinite(prev) && ev.log_likelihood < prev - 1e-9 * std::abs(prev)) out.monotone = false;
            const double change = std::abs(ev.log_likelihood - prev) / std::max(1.0, std::abs(ev.log_likelihood));
            prev = ev.log_likelihood;
            if (change < opt.em_switch_tolerance) break;
            const Eigen::VectorXd next = model.em_update(theta, ev);
            for (Eigen::Index k = 0; k < d; ++k) {
                if (free[static_cast<std::size_t>(k)]) theta[k] = std::max(next[k], floor_var);
            }
        }
    }

    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < d; ++k) {
        if (free[static_cast<std::size_t>(k)]) idx.push_back(k);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd phi(m), lower(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        phi[k] = std::log(theta[idx[static_cast<std::size_t>(k)]]);
        lower[k] = opt.log_variance_floor;
    }
    const Eigen::VectorXd base = theta;
    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        Eigen::VectorXd th = base;
        for (Eigen::Index k = 0; k < m; ++k) th[idx[static_cast<std::size_t>(k)]] = std::exp(x[k]);
        MixedModel::Evaluation ev;
        try {
            ev = model.evaluate(th, true);
        } catch (const NumericalError&) {
            grad = Eigen::VectorXd::Zero(m);
            return std::numeric_limits<double>::infinity();
        }
        grad.resize(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const auto j = idx[static_cast<std::size_t>(k)];
            grad[k] = -ev.gradient[j] * th[j];
        }
        return -ev.log_likelihood;
    };
    const int remaining = std::max(1, opt.max_iter - iter);
    auto res = detail::minimize_bfgs(objective, phi, lower, opt.tolerance, remaining);
    iter += res.iterations;
    for (Eigen::Index k = 0; k < m; ++k) theta[idx[static_cast<std::size_t>(k)]] = std::exp(res.x[k]);
    out.theta = theta;
    out.log_likelihood = -res.f;
    out.iterations = iter;
    out.converged = res.converged;
    return out;
}

Eigen::VectorXd initial_theta(const PreparedPanel& panel, std::size_t n_levels) {
    Eigen::VectorXd coef = panel.design.values.colPivHouseholderQr().solve(panel.y);
    double v = (panel.y - panel.design.values * coef).squaredNorm() / static_cast<double>(panel.y.size());
    if (!(v > 0.0)) v = 1.0;
    Eigen::VectorXd theta(static_cast<Eigen::Index>(n_levels) + 1);
    theta[0] = 0.5 * v;
    for (std::size_t l = 0; l < n_levels; ++l) theta[static_cast<Eigen::Index>(l) + 1] = 0.5 * v / static_cast<double>(n_levels);
    return theta;
}

// Observed-information standard errors for the variance parameters not on
// the boundary, from central differences of the analytic score.
Eigen::VectorXd variance_standard_errors(const MixedModel& model, const Eigen::VectorXd& theta,
                                         const std::vector<bool>& interior) {
    const Eigen::Index d = theta.size();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < d; ++k) {
        if (interior[static_cast<std::size_t>(k)]) idx.push_back(k);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd se = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
    if (m == 0) return se;
    Eigen::MatrixXd H(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index j = idx[static_cast<std::size_t>(a)];
        const double h = 1e-4 * theta[j];
        Eigen::VectorXd up = theta, dn = theta;
        up[j] += h;
        dn[j] -= h;
        const Eigen::VectorXd gu = model.evaluate(up, true).gradient;
        const Eigen::VectorXd gd = model.evaluate(dn, true).gradient;
        for (Eigen::Index b = 0; b < m; ++b) H(b, a) = (gu[idx[static_cast<std::size_t>(b)]] - gd[idx[static_cast<std::size_t>(b)]]) / (2.0 * h);
    }
    H = 0.5 * (H + H.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return se;
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
    for (Eigen::Index a = 0; a < m; ++a) {
        const double v = cov(a, a);
        se[idx[static_cast<std::size_t>(a)]] = v > 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
    }
    return se;
}

FitResult fit_fixed_only(const PreparedPanel& panel) {
    // No level has two or more groups: the model reduces to least squares
    // with the ML variance estimate.
    const LeastSquares ls = least_squares(panel.design.values, panel.y, panel.design.column_labels);
    const double n = static_cast<double>(panel.y.size());
    FitResult fit;
    fit.method = Method::mle;
    fit.spec = panel.spec;
    fit.n_obs = panel.index.n_obs;
    fit.beta_labels = panel.design.column_labels;
    fit.beta = ls.coef;
    fit.standard_errors = ls.se * std::sqrt(static_cast<double>(ls.df) / n);
    fit.p_values.resize(fit.beta.size());
    for (Eigen::Index k = 0; k < fit.beta.size(); ++k) fit.p_values[k] = normal_two_sided_p(fit.beta[k] / fit.standard_errors[k]);
    mark_absent_levels(fit, panel.spec);
    const double s2 = ls.rss / n;
    fit.idiosyncratic = VarianceComponent{s2, s2 * std::sqrt(2.0 / n), VarianceStatus::estimated};
    const double ll = -0.5 * n * (std::log(2.0 * std::numbers::pi * s2) + 1.0);
    fit.metrics.log_likelihood = ll;
    fit.metrics.aic = 2.0 * static_cast<double>(fit.beta.size() + 1) - 2.0 * ll;
    fit.warnings.push_back("no level has two or more groups; all level variances unidentified");
    return fit;
}

}  // namespace

FitResult fit_mle(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                  const MleOptions& options) {
    MleProblem prob = make_problem(records, spec);
    const PreparedPanel& panel = prob.panel;
    if (prob.fitted.empty()) return fit_fixed_only(panel);

    const MixedModel model(panel.y, panel.design.values, prob.level_ptrs);
    const std::size_t L = prob.fitted.size();
    const std::vector<bool> all_free(L + 1, true);

    OptimizeOutcome opt = maximize(model, initial_theta(panel, L), all_free, options, true);
    if (!opt.converged && opt.iterations >= options.max_iter) {
        std::vector<double> last(opt.theta.data(), opt.theta.data() + opt.theta.size());
        throw ConvergenceError("maximum likelihood did not converge within " +
                                   std::to_string(options.max_iter) + " iterations",
                               last);
    }

    // Pin negligible level variances to the floor when doing so costs nothing.
    const double floor_var = std::exp(options.log_variance_floor);
    std::vector<bool> boundary(L + 1, false);
    Eigen::VectorXd theta = opt.theta;
    double best = opt.log_likelihood;
    for (std::size_t l = 0; l < L; ++l) {
        const auto k = static_cast<Eigen::Index>(l) + 1;
        if (theta[k] > 1e-4 * theta.sum()) continue;
        Eigen::VectorXd trial = theta;
        trial[k] = floor_var;
        const double ll = model.evaluate(trial, false).log_likelihood;
        if (ll >= best - options.tolerance * std::abs(best)) {
            theta = trial;
            best = std::max(best, ll);
            boundary[l + 1] = true;
        }
    }
    for (std::size_t l = 0; l < L; ++l) {
        if (theta[static_cast<Eigen::Index>(l) + 1] <= floor_var * (1.0 + 1e-9)) boundary[l + 1] = true;
    }

    const auto ev = model.evaluate(theta, true);
    std::vector<bool> interior(L + 1);
    for (std::size_t k = 0; k <= L; ++k) interior[k] = !boundary[k];
    const Eigen::VectorXd vse = variance_standard_errors(model, theta, interior);

    FitResult fit;
    fit.method = Method::mle;
    fit.spec = spec;
    fit.n_obs = records.size();
    fit.beta_labels = panel.design.column_labels;
    fit.beta = ev.beta;
    fit.standard_errors = ev.beta_cov.diagonal().cwiseSqrt();
    fit.p_values.resize(fit.beta.size());
    for (Eigen::Index k = 0; k < fit.beta.size(); ++k) fit.p_values[k] = normal_two_sided_p(fit.beta[k] / fit.standard_errors[k]);
    mark_absent_levels(fit, spec);
    for (std::size_t l = 0; l < L; ++l) {
        const auto k = static_cast<Eigen::Index>(l) + 1;
        VarianceComponent vc;
        vc.status = boundary[l + 1] ? VarianceStatus::boundary : VarianceStatus::estimated;
        vc.value = boundary[l + 1] ? 0.0 : theta[k];
        vc.se = vse[k];
        fit.level_variances[prob.fitted[l]] = vc;
        const Level level = prob.fitted[l];
        fit.group_effects[level] = ev.effects.segment(model.level_offset(static_cast<int>(l)), model.level_size(static_cast<int>(l)));
        fit.group_labels[level] = panel.index.at(level).labels;
    }
    for (const auto& li : panel.index.levels) {
        if (li.n_groups() < 2) {
            fit.warnings.push_back("level '" + std::string(to_string(li.level)) +
                                   "' has a single group; its variance is unidentified");
        }
    }
    fit.idiosyncratic = VarianceComponent{theta[0], vse[0], VarianceStatus::estimated};
    fit.metrics.log_likelihood = ev.log_likelihood;
    fit.metrics.aic = 2.0 * static_cast<double>(fit.beta.size() + static_cast<Eigen::Index>(L) + 1) -
                      2.0 * ev.log_likelihood;
    fit.iterations = opt.iterations;
    fit.converged = opt.converged;
    fit.loglik_trace = opt.trace;
    if (!opt.monotone) fit.warnings.push_back("EM log-likelihood decreased between iterations");
    if (!opt.converged) fit.warnings.push_back("quasi-Newton polish stopped before meeting the tolerance");
    return fit;
}

// ---------------------------------------------------------------------------
// Zeta profiles

ZetaProfile profile_zeta(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                         const FitResult& fit, const std::string& parameter, const ZetaGrid& grid_spec,
                         const MleOptions& options, int workers) {
    if (fit.method != Method::mle) throw ConfigError("zeta profiles need a maximum-likelihood fit");
    MleProblem prob = make_problem(records, spec);
    const PreparedPanel& panel = prob.panel;
    const std::size_t L = prob.fitted.size();

    // Locate the parameter.
    std::optional<std::size_t> var_slot;  // index into theta
    std::optional<Eigen::Index> beta_col;
    double estimate = 0.0, se = std::numeric_limits<double>::quiet_NaN();
    if (parameter == "idiosyncratic") {
        var_slot = 0;
        estimate = fit.idiosyncratic.value;
        se = fit.idiosyncratic.se;
    } else if (parameter.find(':') == std::string::npos) {
        const Level level = level_from_string(parameter);
        auto it = std::find(prob.fitted.begin(), prob.fitted.end(), level);
        if (it == prob.fitted.end()) throw ConfigError("level '" + parameter + "' is not estimable in this model");
        var_slot = static_cast<std::size_t>(it - prob.fitted.begin()) + 1;
        estimate = fit.level_variances.at(level).value;
        se = fit.level_variances.at(level).se;
    } else {
        auto it = std::find(fit.beta_labels.begin(), fit.beta_labels.end(), parameter);
        if (it == fit.beta_labels.end()) throw ConfigError("unknown parameter '" + parameter + "'");
        beta_col = static_cast<Eigen::Index>(it - fit.beta_labels.begin());
        estimate = fit.beta[*beta_col];
        se = fit.standard_errors[*beta_col];
    }

    ZetaProfile prof;
    prof.parameter = parameter;
    prof.mle_value = estimate;
    if (!grid_spec.explicit_values.empty()) {
        prof.grid = grid_spec.explicit_values;
    } else {
        if (!(se > 0.0) || !std::isfinite(se)) {
            const auto v = fit.variance_vector();
            double total = 0.0;
            for (double x : v) total += x;
            se = estimate > 0.0 ? estimate : 0.1 * total;
        }
        const int half = std::max(1, grid_spec.points / 2);
        double lo = estimate - grid_spec.half_width_se * se;
        const double hi = estimate + grid_spec.half_width_se * se;
        if (var_slot) lo = std::max(lo, 0.0);
        for (int i = half; i >= 1; --i) {
            const double v = estimate - (estimate - lo) * i / half;
            if (prof.grid.empty() || v > prof.grid.back()) prof.grid.push_back(v);
        }
        if (prof.grid.empty() || estimate > prof.grid.back()) prof.grid.push_back(estimate);
        for (int i = 1; i <= half; ++i) prof.grid.push_back(estimate + (hi - estimate) * i / half);
    }

    // Reference maximum under the same optimizer settings.
    Eigen::VectorXd theta_hat(static_cast<Eigen::Index>(L) + 1);
    theta_hat[0] = fit.idiosyncratic.value;
    const double floor_var = std::exp(options.log_variance_floor);
    for (std::size_t l = 0; l < L; ++l) {
        theta_hat[static_cast<Eigen::Index>(l) + 1] = std::max(fit.level_variances.at(prob.fitted[l]).value, floor_var);
    }

    Eigen::MatrixXd X = panel.design.values;
    Eigen::VectorXd xcol;
    if (beta_col) {
        xcol = X.col(*beta_col);
        const Eigen::Index p = X.cols();
        Eigen::MatrixXd reduced(X.rows(), p - 1);
        reduced.leftCols(*beta_col) = X.leftCols(*beta_col);
        reduced.rightCols(p - 1 - *beta_col) = X.rightCols(p - 1 - *beta_col);
        X = std::move(reduced);
    }
    const MixedModel full_model(panel.y, panel.design.values, prob.level_ptrs);
    const double ll_hat = full_model.evaluate(theta_hat, false).log_likelihood;
    const MixedModel base_model(panel.y, X, prob.level_ptrs);

    const std::size_t npts = prof.grid.size();
    prof.zeta.assign(npts, 0.0);
    prof.abs_zeta.assign(npts, 0.0);
    prof.lr.assign(npts, 0.0);
    std::vector<char> failed(npts, 0);
    MleOptions inner = options;
    inner.max_iter = std::max(200, options.max_iter);

    auto run_range = [&](std::size_t begin, std::size_t stride) {
        MixedModel model(base_model);
        for (std::size_t i = begin; i < npts; i += stride) {
            const double v = prof.grid[i];
            try {
                Eigen::VectorXd theta = theta_hat;
                std::vector<bool> free(L + 1, true);
                if (var_slot) {
                    theta[static_cast<Eigen::Index>(*var_slot)] = std::max(v, floor_var);
                    free[*var_slot] = false;
                } else {
                    model.set_response(panel.y - v * xcol);
                }
                const auto out = maximize(model, theta, free, inner, false);
                const double lr = 2.0 * (ll_hat - out.log_likelihood);
                prof.lr[i] = lr;
                const double root = std::sqrt(std::max(lr, 0.0));
                prof.zeta[i] = v < estimate ? -root : root;
                prof.abs_zeta[i] = root;
            } catch (const Error&) {
                failed[i] = 1;
            }
        }
    };
    const std::size_t nworkers = static_cast<std::size_t>(std::max(1, workers));
    if (nworkers == 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(run_range, w, nworkers);
        for (auto& t : pool) t.join();
    }
    prof.failed.assign(failed.begin(), failed.end());
    return prof;
}

}  // namespace yieldrisk

#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "yieldrisk/data_model.hpp"
#include "yieldrisk/hierarchy.hpp"

namespace yieldrisk {

enum class Method { ols, mle, bayes };
std::string_view to_string(Method m);

enum class VarianceStatus {
    estimated,
    boundary,      // optimizer pinned the log-variance at the floor; reported as 0
    unidentified,  // the level has a single group
    not_modeled    // the level is absent from the hierarchy
};
std::string_view to_string(VarianceStatus s);

struct VarianceComponent {
    double value = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
    VarianceStatus status = VarianceStatus::not_modeled;
};

struct FitMetrics {
    std::optional<double> log_likelihood;
    std::optional<double> aic;
    std::optional<double> dic;
    std::optional<double> p_d;
    std::optional<double> r_squared;
};

struct FitResult {
    Method method = Method::ols;
    HierarchySpec spec;
    std::size_t n_obs = 0;

    std::vector<std::string> beta_labels;
    Eigen::VectorXd beta;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd p_values;  // two-sided
    std::optional<double> mu;  // explicit grand mean (Bayes only)

    std::map<Level, VarianceComponent> level_variances;  // every level, status says which apply
    VarianceComponent idiosyncratic;

    std::map<Level, Eigen::VectorXd> group_effects;
    std::map<Level, std::vector<std::string>> group_labels;

    FitMetrics metrics;
    bool normality_assumed = true;
    bool converged = true;
    int iterations = 0;
    std::vector<double> loglik_trace;  // MLE: log-likelihood after each EM step
    std::vector<std::string> warnings;

    /// (parcel, household, season, village, time, idiosyncratic); levels that
    /// are not modelled or unidentified contribute 0.
    std::array<double, 6> variance_vector() const;
};

/// Everything the fitters need from a panel.
struct PreparedPanel {
    HierarchySpec spec;
    GroupIndex index;
    DesignMatrix design;
    Eigen::VectorXd y;
};

PreparedPanel prepare_panel(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                            const DesignOptions& options = {});

struct LeastSquares {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    Eigen::VectorXd residuals;
    double sigma2 = 0.0;  // RSS / (n - rank)
    double rss = 0.0;
    double r_squared = 0.0;
    Eigen::Index df = 0;
};

/// Classical least squares. Rank deficiency throws RankDeficiencyError
/// naming the columns left outside the pivoted QR basis.
LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const std::vector<std::string>& labels);

/// Least squares with season fixed effects (drop-first dummies; the dropped
/// season is the lexicographically first (village, time) pair).
FitResult fit_ols(std::span<const TransformedRecord> records, const HierarchySpec& spec);

struct MleOptions {
    double tolerance = 1e-8;
    int max_iter = 5000;
    // EM runs until the relative change drops below this, then quasi-Newton
    // polishing takes over.
    double em_switch_tolerance = 1e-6;
    double log_variance_floor = -30.0;
};

FitResult fit_mle(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                  const MleOptions& options = {});

/// Profiled parameter: either a variance ("parcel" ... "time",
/// "idiosyncratic") or a fixed-effect label such as "rice:labor".
struct ZetaGrid {
    int points = 21;
    double half_width_se = 4.0;
    std::vector<double> explicit_values;  // overrides the default grid when non-empty
};

struct ZetaProfile {
    std::string parameter;
    double mle_value = 0.0;
    std::vector<double> grid;
    std::vector<double> zeta;      // signed root
    std::vector<double> abs_zeta;  // |zeta|
    std::vector<double> lr;        // 2 (lnL_max - lnL_profile)
    std::vector<bool> failed;      // inner maximization failed at this point
};

ZetaProfile profile_zeta(std::span<const TransformedRecord> records, const HierarchySpec& spec,
                         const FitResult& fit, const std::string& parameter, const ZetaGrid& grid = {},
                         const MleOptions& options = {}, int workers = 1);

}  // namespace yieldrisk

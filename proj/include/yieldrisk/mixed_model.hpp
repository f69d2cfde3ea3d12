#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "yieldrisk/hierarchy.hpp"

namespace yieldrisk {

/// Diagonal of (L L^T)^{-1} for a lower-triangular column-major factor whose
/// row indices are sorted within each column (Takahashi recurrences, computed
/// on the filled pattern of L only).
Eigen::VectorXd selected_inverse_diagonal(const Eigen::SparseMatrix<double>& L);

/// Gaussian linear model with independent random intercepts per grouping
/// level:
///
///   y = X b + sum_l Z_l u_l + e,   u_l ~ N(0, s_l I),   e ~ N(0, s0 I).
///
/// Variance parameters are passed as theta = (s0, s_1, ..., s_L). For a given
/// theta the fixed effects are profiled out by generalized least squares, so
/// `evaluate` returns the profile log-likelihood together with everything EM
/// and gradient-based optimizers need. All work goes through a sparse
/// Cholesky factor of Z'Z/s0 + diag(1/s_l).
class MixedModel {
public:
    MixedModel(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const std::vector<const LevelIndex*>& levels);
    MixedModel(const MixedModel& other);
    MixedModel& operator=(const MixedModel&) = delete;
    ~MixedModel();

    struct Evaluation {
        double log_likelihood = 0.0;
        Eigen::VectorXd beta;
        Eigen::MatrixXd beta_cov;    // (X' V^-1 X)^-1
        Eigen::VectorXd effects;     // BLUPs, stacked by level
        Eigen::VectorXd effect_sq;   // per level: |u_l|^2
        Eigen::VectorXd traces;      // per level: trace of the level block of C^-1
        double conditional_rss = 0;  // |y - Xb - Zu|^2
        Eigen::VectorXd gradient;    // d loglik / d theta
        bool has_traces = false;
    };

    /// With `traces` false the selected inversion is skipped and only
    /// log-likelihood, beta and effects are filled in.
    Evaluation evaluate(const Eigen::VectorXd& theta, bool traces = true) const;

    /// One expectation-maximization update of theta at the GLS beta.
    Eigen::VectorXd em_update(const Eigen::VectorXd& theta, const Evaluation& ev) const;

    /// Replaces the response (used when a fixed effect is held at a value).
    void set_response(const Eigen::VectorXd& y);

    Eigen::Index n_obs() const { return n_; }
    Eigen::Index n_fixed() const { return XtX_.rows(); }
    int n_levels() const { return static_cast<int>(sizes_.size()); }
    int level_size(int l) const { return sizes_[static_cast<std::size_t>(l)]; }
    int level_offset(int l) const { return offsets_[static_cast<std::size_t>(l)]; }

private:
    struct Factor;

    Eigen::Index n_ = 0;
    std::vector<int> sizes_, offsets_;
    std::vector<std::vector<int>> group_of_;
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    Eigen::SparseMatrix<double> ZtZ_;
    Eigen::MatrixXd ZtX_, XtX_;
    Eigen::VectorXd Zty_, Xty_;
    double yty_ = 0.0;
    std::unique_ptr<Factor> factor_;

    void compute_cross_products();
};

}  // namespace yieldrisk

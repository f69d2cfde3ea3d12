#include "yieldrisk/mixed_model.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "yieldrisk/errors.hpp"

namespace yieldrisk {

struct MixedModel::Factor {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
    Eigen::SparseMatrix<double> C;
    std::vector<int> diag_pos;  // position of C(j,j) in C's value array
};

MixedModel::MixedModel(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                       const std::vector<const LevelIndex*>& levels)
    : n_(y.size()), X_(X), y_(y) {
    if (X.rows() != y.size()) throw ConfigError("design and response lengths differ");
    int offset = 0;
    for (const LevelIndex* l : levels) {
        if (static_cast<Eigen::Index>(l->group_of.size()) != n_) {
            throw ConfigError("group index length differs from response length");
        }
        sizes_.push_back(l->n_groups());
        offsets_.push_back(offset);
        group_of_.push_back(l->group_of);
        offset += l->n_groups();
    }
    const int q = offset;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n_) * levels.size() * levels.size());
    for (Eigen::Index n = 0; n < n_; ++n) {
        for (std::size_t a = 0; a < levels.size(); ++a) {
            const int ia = offsets_[a] + group_of_[a][static_cast<std::size_t>(n)];
            for (std::size_t b = 0; b < levels.size(); ++b) {
                const int ib = offsets_[b] + group_of_[b][static_cast<std::size_t>(n)];
                trips.emplace_back(ia, ib, 1.0);
            }
        }
    }
    ZtZ_.resize(q, q);
    ZtZ_.setFromTriplets(trips.begin(), trips.end());
    ZtZ_.makeCompressed();

    compute_cross_products();

    factor_ = std::make_unique<Factor>();
    factor_->C = ZtZ_;
    factor_->diag_pos.resize(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(factor_->C, j); it; ++it) {
            if (it.row() == j) {
                factor_->diag_pos[static_cast<std::size_t>(j)] =
                    static_cast<int>(&it.valueRef() - factor_->C.valuePtr());
            }
        }
    }
    factor_->llt.analyzePattern(factor_->C);
}

MixedModel::MixedModel(const MixedModel& other)
    : n_(other.n_),
      sizes_(other.sizes_),
      offsets_(other.offsets_),
      group_of_(other.group_of_),
      X_(other.X_),
      y_(other.y_),
      ZtZ_(other.ZtZ_),
      ZtX_(other.ZtX_),
      XtX_(other.XtX_),
      Zty_(other.Zty_),
      Xty_(other.Xty_),
      yty_(other.yty_),
      factor_(std::make_unique<Factor>()) {
    factor_->C = other.factor_->C;
    factor_->diag_pos = other.factor_->diag_pos;
    factor_->llt.analyzePattern(factor_->C);
}

MixedModel::~MixedModel() = default;

void MixedModel::compute_cross_products() {
    const Eigen::Index q = ZtZ_.rows();
    const Eigen::Index p = X_.cols();
    ZtX_ = Eigen::MatrixXd::Zero(q, p);
    Zty_ = Eigen::VectorXd::Zero(q);
    for (Eigen::Index n = 0; n < n_; ++n) {
        for (std::size_t l = 0; l < sizes_.size(); ++l) {
            const int j = offsets_[l] + group_of_[l][static_cast<std::size_t>(n)];
            ZtX_.row(j) += X_.row(n);
            Zty_[j] += y_[n];
        }
    }
    XtX_ = X_.transpose() * X_;
    Xty_ = X_.transpose() * y_;
    yty_ = y_.squaredNorm();
}

void MixedModel::set_response(const Eigen::VectorXd& y) {
    if (y.size() != n_) throw ConfigError("response length changed");
    y_ = y;
    compute_cross_products();
}

MixedModel::Evaluation MixedModel::evaluate(const Eigen::VectorXd& theta, bool traces) const {
    const int L = n_levels();
    if (theta.size() != L + 1) throw ConfigError("variance vector has wrong length");
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        if (!(theta[k] > 0.0) || !std::isfinite(theta[k])) {
            throw NumericalError("variance parameters must be positive and finite");
        }
    }
    const double s0 = theta[0];
    const Eigen::Index q = ZtZ_.rows();
    const Eigen::Index p = XtX_.rows();

    Factor& f = *factor_;
    Eigen::Map<Eigen::VectorXd>(f.C.valuePtr(), f.C.nonZeros()) =
        Eigen::Map<const Eigen::VectorXd>(ZtZ_.valuePtr(), ZtZ_.nonZeros()) / s0;
    for (int l = 0; l < L; ++l) {
        const double prec = 1.0 / theta[l + 1];
        for (int g = 0; g < sizes_[static_cast<std::size_t>(l)]; ++g) {
            f.C.valuePtr()[f.diag_pos[static_cast<std::size_t>(offsets_[static_cast<std::size_t>(l)] + g)]] += prec;
        }
    }
    f.llt.factorize(f.C);
    if (f.llt.info() != Eigen::Success) throw NumericalError("random-effects system is not positive definite");

    Evaluation ev;
    const Eigen::MatrixXd A = f.llt.solve(ZtX_) / s0;
    const Eigen::VectorXd b = f.llt.solve(Zty_) / s0;
    const Eigen::MatrixXd S = XtX_ / s0 - ZtX_.transpose() * A / s0;
    const Eigen::VectorXd rb = Xty_ / s0 - ZtX_.transpose() * b / s0;
    if (p > 0) {
        Eigen::LLT<Eigen::MatrixXd> sllt(S);
        if (sllt.info() != Eigen::Success) throw NumericalError("fixed-effects information is singular");
        ev.beta = sllt.solve(rb);
        ev.beta_cov = sllt.solve(Eigen::MatrixXd::Identity(p, p));
    } else {
        ev.beta = Eigen::VectorXd::Zero(0);
        ev.beta_cov = Eigen::MatrixXd::Zero(0, 0);
    }
    ev.effects = b - A * ev.beta;

    const double rtr = yty_ - 2.0 * ev.beta.dot(Xty_) + ev.beta.dot(XtX_ * ev.beta);
    const Eigen::VectorXd Ztr = Zty_ - ZtX_ * ev.beta;
    const double quad = rtr / s0 - Ztr.dot(ev.effects) / s0;

    const auto& Lmat = f.llt.matrixL().nestedExpression();
    double logdet_c = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) logdet_c += 2.0 * std::log(Lmat.valuePtr()[Lmat.outerIndexPtr()[j]]);
    double logdet_v = static_cast<double>(n_) * std::log(s0) + logdet_c;
    for (int l = 0; l < L; ++l) logdet_v += sizes_[static_cast<std::size_t>(l)] * std::log(theta[l + 1]);
    ev.log_likelihood =
        -0.5 * (static_cast<double>(n_) * std::log(2.0 * std::numbers::pi) + logdet_v + quad);

    ev.effect_sq.resize(L);
    for (int l = 0; l < L; ++l) {
        ev.effect_sq[l] = ev.effects.segment(offsets_[static_cast<std::size_t>(l)], sizes_[static_cast<std::size_t>(l)]).squaredNorm();
    }
    ev.conditional_rss = rtr - 2.0 * ev.effects.dot(Ztr) + ev.effects.dot(ZtZ_ * ev.effects);

    if (traces) {
        const Eigen::VectorXd zdiag = selected_inverse_diagonal(Lmat);
        const auto& perm = f.llt.permutationP().indices();
        ev.traces = Eigen::VectorXd::Zero(L);
        for (int l = 0; l < L; ++l) {
            for (int g = 0; g < sizes_[static_cast<std::size_t>(l)]; ++g) {
                ev.traces[l] += zdiag[perm[offsets_[static_cast<std::size_t>(l)] + g]];
            }
        }
        ev.has_traces = true;

        ev.gradient.resize(L + 1);
        double trace_ratio = 0.0;
        for (int l = 0; l < L; ++l) {
            const double s = theta[l + 1];
            const double ql = sizes_[static_cast<std::size_t>(l)];
            trace_ratio += ev.traces[l] / s;
            ev.gradient[l + 1] = -0.5 * (ql - ev.traces[l] / s - ev.effect_sq[l] / s) / s;
        }
        ev.gradient[0] =
            -0.5 * ((static_cast<double>(n_ - q) + trace_ratio) / s0 - ev.conditional_rss / (s0 * s0));
    }
    return ev;
}

Eigen::VectorXd MixedModel::em_update(const Eigen::VectorXd& theta, const Evaluation& ev) const {
    if (!ev.has_traces) throw ConfigError("EM update needs an evaluation with traces");
    const int L = n_levels();
    Eigen::VectorXd next(L + 1);
    double trace_ratio = 0.0;
    for (int l = 0; l < L; ++l) {
        const double ql = sizes_[static_cast<std::size_t>(l)];
        next[l + 1] = (ev.effect_sq[l] + ev.traces[l]) / ql;
        trace_ratio += ev.traces[l] / theta[l + 1];
    }
    const double q = static_cast<double>(ZtZ_.rows());
    next[0] = (ev.conditional_rss + theta[0] * (q - trace_ratio)) / static_cast<double>(n_);
    return next;
}

}  // namespace yieldrisk

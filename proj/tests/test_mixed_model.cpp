#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "yieldrisk/estimation.hpp"
#include "yieldrisk/mixed_model.hpp"

using namespace yieldrisk;

namespace {

// Dense marginal likelihood, the textbook route: V = s0 I + sum_l s_l Z_l Z_l'.
double dense_loglik(const PreparedPanel& panel, const Eigen::VectorXd& theta, Eigen::VectorXd* beta_out) {
    const auto n = panel.y.size();
    Eigen::MatrixXd V = theta[0] * Eigen::MatrixXd::Identity(n, n);
    for (std::size_t l = 0; l < panel.index.levels.size(); ++l) {
        const auto& g = panel.index.levels[l].group_of;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (g[static_cast<std::size_t>(i)] == g[static_cast<std::size_t>(j)]) V(i, j) += theta[static_cast<Eigen::Index>(l) + 1];
            }
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    const Eigen::MatrixXd& X = panel.design.values;
    const Eigen::MatrixXd ViX = llt.solve(X);
    const Eigen::VectorXd beta = (X.transpose() * ViX).ldlt().solve(ViX.transpose() * panel.y);
    if (beta_out) *beta_out = beta;
    const Eigen::VectorXd r = panel.y - X * beta;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + logdet + r.dot(llt.solve(r)));
}

std::vector<const LevelIndex*> level_ptrs(const PreparedPanel& p) {
    std::vector<const LevelIndex*> out;
    for (const auto& l : p.index.levels) out.push_back(&l);
    return out;
}

}  // namespace

TEST_CASE("selected inverse diagonal matches a dense inverse") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 40;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (u(rng) > 0.8) B(i, j) = u(rng);
        }
    }
    Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Eigen::SparseMatrix<double> S = A.sparseView();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt(S);
    REQUIRE(llt.info() == Eigen::Success);
    const Eigen::VectorXd zd = selected_inverse_diagonal(llt.matrixL().nestedExpression());
    const Eigen::MatrixXd Ainv = A.inverse();
    const auto& perm = llt.permutationP().indices();
    for (int i = 0; i < n; ++i) CHECK(zd[perm[i]] == doctest::Approx(Ainv(i, i)).epsilon(1e-10));
}

TEST_CASE("sparse profile likelihood agrees with the dense marginal likelihood") {
    const auto records = testing::small_panel(3);
    const PreparedPanel panel = prepare_panel(records, HierarchySpec::full());
    const MixedModel model(panel.y, panel.design.values, level_ptrs(panel));
    Eigen::VectorXd theta(6);
    theta << 1.1, 0.6, 0.2, 0.4, 0.5, 0.3;
    const auto ev = model.evaluate(theta);
    Eigen::VectorXd beta_dense;
    const double ll = dense_loglik(panel, theta, &beta_dense);
    CHECK(ev.log_likelihood == doctest::Approx(ll).epsilon(1e-10));
    for (Eigen::Index k = 0; k < beta_dense.size(); ++k) CHECK(ev.beta[k] == doctest::Approx(beta_dense[k]).epsilon(1e-8));

    SUBCASE("analytic score matches finite differences") {
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
            const double h = 1e-6;
            Eigen::VectorXd up = theta, dn = theta;
            up[k] += h;
            dn[k] -= h;
            const double fd = (dense_loglik(panel, up, nullptr) - dense_loglik(panel, dn, nullptr)) / (2 * h);
            CHECK(ev.gradient[k] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("EM updates never decrease the likelihood") {
    const auto records = testing::small_panel(11, 6, 4, 4, 3);
    const PreparedPanel panel = prepare_panel(records, HierarchySpec::full());
    const MixedModel model(panel.y, panel.design.values, level_ptrs(panel));
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(6, 0.5);
    double prev = -1e300;
    for (int it = 0; it < 50; ++it) {
        const auto ev = model.evaluate(theta);
        CHECK(ev.log_likelihood >= prev - 1e-9 * std::abs(prev));
        prev = ev.log_likelihood;
        theta = model.em_update(theta, ev);
    }
}

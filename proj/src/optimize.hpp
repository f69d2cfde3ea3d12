#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace yieldrisk::detail {

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Objective returns f(x) and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Quasi-Newton minimization with a lower bound per coordinate. Coordinates
// sitting on their bound with the gradient pointing outward are held fixed.
inline BfgsResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x,
                                const Eigen::VectorXd& lower, double rel_tol, int max_iter,
                                double grad_tol = 1e-4) {
    const Eigen::Index d = x.size();
    x = x.cwiseMax(lower);
    BfgsResult res;
    Eigen::VectorXd g(d);
    double f = objective(x, g);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);

    auto projected_gradient = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& grad) {
        Eigen::VectorXd pg = grad;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (at[i] <= lower[i] && grad[i] > 0.0) pg[i] = 0.0;
        }
        return pg;
    };

    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd pg = projected_gradient(x, g);
        if (pg.lpNorm<Eigen::Infinity>() < 1e-10) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dir = -(H * pg);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (x[i] <= lower[i] && g[i] > 0.0) dir[i] = 0.0;
        }
        if (dir.dot(pg) >= 0.0) {
            H.setIdentity();
            dir = -pg;
        }
        // Keep steps in log-variance space modest.
        const double max_step = dir.lpNorm<Eigen::Infinity>();
        if (max_step > 5.0) dir *= 5.0 / max_step;

        double step = 1.0;
        Eigen::VectorXd xn(d), gn(d);
        double fn = f;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            xn = (x + step * dir).cwiseMax(lower);
            fn = objective(xn, gn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent possible at this resolution; treat as converged.
            res.converged = pg.lpNorm<Eigen::Infinity>() < grad_tol * 10.0;
            break;
        }
        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd yv = gn - g;
        const double change = std::abs(f - fn) / std::max(1.0, std::abs(f));
        x = xn;
        g = gn;
        f = fn;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
            H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) +
                rho * s * s.transpose();
        }
        if (change < rel_tol && projected_gradient(x, g).lpNorm<Eigen::Infinity>() < grad_tol) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.f = f;
    return res;
}

}  // namespace yieldrisk::detail

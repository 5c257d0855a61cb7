#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

namespace bbsmix {

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;  // on ||grad||_inf / (1 + |f|)
    double step_tolerance = 1e-10;     // on ||dx|| / (1 + ||x||)
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd grad;
    int n_iterations = 0;
    bool converged = false;
};

// Quasi-Newton minimizer with Armijo backtracking. The objective returns f
// and fills grad; +inf marks an infeasible point and makes the line search
// backtrack (it is never differentiated).
template <typename FG>
BfgsResult bfgs_minimize(FG&& fg, Eigen::VectorXd x0, const BfgsOptions& opt = {}) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    const int k = static_cast<int>(x0.size());
    BfgsResult res;
    res.x = std::move(x0);
    res.grad.resize(k);
    res.f = fg(res.x, res.grad);
    if (!std::isfinite(res.f)) return res;  // infeasible start

    MatrixXd Hinv = MatrixXd::Identity(k, k);
    VectorXd g_new(k);

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        res.n_iterations = iter;
        if (res.grad.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance * (1.0 + std::fabs(res.f))) {
            res.converged = true;
            return res;
        }

        VectorXd dir = -(Hinv * res.grad);
        double slope = res.grad.dot(dir);
        if (!(slope < 0.0)) {  // lost positive definiteness; reset
            Hinv.setIdentity();
            dir = -res.grad;
            slope = res.grad.dot(dir);
        }

        // Armijo backtracking.
        constexpr double c1 = 1e-4;
        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = res.x + step * dir;
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= res.f + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // Cannot make progress along any tried step; report what we have.
            res.converged = res.grad.lpNorm<Eigen::Infinity>() <=
                            std::sqrt(opt.gradient_tolerance) * (1.0 + std::fabs(res.f));
            return res;
        }

        const VectorXd s = x_new - res.x;
        const VectorXd yv = g_new - res.grad;
        const double sy = s.dot(yv);

        const bool small_step = s.norm() <= opt.step_tolerance * (1.0 + res.x.norm());
        res.x = x_new;
        res.f = f_new;
        res.grad = g_new;
        if (small_step) {
            res.n_iterations = iter + 1;
            res.converged = true;
            return res;
        }

        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (iter == 0) Hinv *= sy / yv.squaredNorm();  // initial scaling
            const double rho = 1.0 / sy;
            const MatrixXd I = MatrixXd::Identity(k, k);
            Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) +
                   rho * s * s.transpose();
        }
    }
    res.n_iterations = opt.max_iterations;
    res.converged = res.grad.lpNorm<Eigen::Infinity>() <=
                    opt.gradient_tolerance * (1.0 + std::fabs(res.f));
    return res;
}

// Adapts a value-only objective for bfgs_minimize via central differences.
template <typename F>
auto with_numeric_gradient(F f) {
    return [f](const Eigen::VectorXd& x, Eigen::VectorXd& grad) -> double {
        const double fx = f(x);
        if (!std::isfinite(fx)) {
            grad.setZero(x.size());
            return fx;
        }
        Eigen::VectorXd xp = x;
        for (int j = 0; j < x.size(); ++j) {
            const double h = 6e-6 * std::max(1.0, std::fabs(x[j]));
            xp[j] = x[j] + h;
            const double fp = f(xp);
            xp[j] = x[j] - h;
            const double fm = f(xp);
            xp[j] = x[j];
            if (std::isfinite(fp) && std::isfinite(fm)) {
                grad[j] = (fp - fm) / (2.0 * h);
            } else if (std::isfinite(fp)) {
                grad[j] = (fp - fx) / h;
            } else if (std::isfinite(fm)) {
                grad[j] = (fx - fm) / h;
            } else {
                grad[j] = 0.0;
            }
        }
        return fx;
    };
}

}  // namespace bbsmix

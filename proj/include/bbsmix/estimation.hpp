#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bbsmix/bfgs.hpp"
#include "bbsmix/errors.hpp"
#include "bbsmix/likelihood.hpp"
#include "bbsmix/rng.hpp"

namespace bbsmix {

struct FitConfig {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    double step_tolerance = 1e-10;
    double alpha_floor = 1e-4;
    std::optional<Theta> init;     // user start; default: data-driven
    int n_starts = 1;              // extra random restarts beyond the init
    std::uint64_t seed = 20240915; // perturbation stream for multi-start
    bool compute_se = true;
};

struct FitResult {
    Theta theta_hat;
    std::vector<std::string> param_names;
    Vector se;       // packed; empty when unavailable
    Vector z_stats;
    Vector p_values;
    double loglik_at_max = -kLogInf;
    double aic = kLogInf;
    double bic = kLogInf;
    int n_iterations = 0;
    bool converged = false;
    bool se_available = false;
    Matrix information_matrix;       // observed information at theta_hat
    std::optional<double> profiled_nu;  // set by the tobit-t grid profile

    int n_params() const { return theta_hat.dim(); }
};

struct WaldRow {
    std::string name;
    double estimate;
    double se;
    double z;
    double p;
    std::string stars;
    bool available;
};

inline std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

namespace detail {

// Newton steps for logistic regression of `success` on X; separation-guarded.
inline Vector logistic_init(const Matrix& X, const std::vector<bool>& success) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    Vector beta = Vector::Zero(p);
    for (int it = 0; it < 25; ++it) {
        Vector eta = X * beta;
        Vector grad = Vector::Zero(p);
        Matrix W = Matrix::Zero(p, p);
        for (int i = 0; i < n; ++i) {
            const double tau = logistic(eta[i]);
            grad += ((success[i] ? 1.0 : 0.0) - tau) * X.row(i).transpose();
            W += tau * (1.0 - tau) * X.row(i).transpose() * X.row(i);
        }
        W.diagonal().array() += 1e-8;
        const Vector step = W.ldlt().solve(grad);
        beta += step;
        // Separation guard: keep every fitted linear predictor within +-10.
        const double eta_max = (X * beta).lpNorm<Eigen::Infinity>();
        if (eta_max > 10.0) beta *= 10.0 / eta_max;
        if (step.lpNorm<Eigen::Infinity>() < 1e-8) break;
    }
    return beta;
}

inline Matrix fd_hessian_of_score(const CensoredDataset& d, const Theta& t) {
    const Vector packed = t.packed();
    const int k = static_cast<int>(packed.size());
    Matrix H(k, k);
    for (int j = 0; j < k; ++j) {
        const double h = 1e-6 * std::max(1.0, std::fabs(packed[j]));
        Vector xp = packed, xm = packed;
        xp[j] += h;
        xm[j] -= h;
        const ScoreVector sp = score(d, Theta::unpack(xp, d.p1(), d.p2()));
        const ScoreVector sm = score(d, Theta::unpack(xm, d.p1(), d.p2()));
        H.col(j) = (sp.packed() - sm.packed()) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
}

inline std::vector<std::string> default_param_names(int p1, int p2) {
    std::vector<std::string> names;
    names.push_back("alpha");
    for (int j = 0; j < p1; ++j) names.push_back("beta1[" + std::to_string(j) + "]");
    for (int j = 0; j < p2; ++j) names.push_back("beta2[" + std::to_string(j) + "]");
    return names;
}

// Standard errors from the inverse information matrix; declines politely
// when the matrix is not positive definite.
inline void fill_inference(FitResult& fr, const Matrix& info, int n_obs) {
    fr.information_matrix = info;
    const int k = static_cast<int>(info.rows());
    fr.se_available = false;
    if (!info.allFinite()) return;
    Eigen::LLT<Matrix> llt(info);
    Matrix inv;
    if (llt.info() == Eigen::Success) {
        inv = llt.solve(Matrix::Identity(k, k));
    } else {
        Eigen::FullPivLU<Matrix> lu(info);
        if (!lu.isInvertible()) return;
        inv = lu.inverse();
    }
    Vector se(k), z(k), p(k);
    for (int j = 0; j < k; ++j) {
        if (!(inv(j, j) > 0.0) || !std::isfinite(inv(j, j))) return;
        se[j] = std::sqrt(inv(j, j));
    }
    const Vector est = fr.theta_hat.packed();
    for (int j = 0; j < k; ++j) {
        z[j] = est[j] / se[j];
        p[j] = 2.0 * std_normal_cdf(-std::fabs(z[j]));
    }
    fr.se = se;
    fr.z_stats = z;
    fr.p_values = p;
    fr.se_available = true;
    (void)n_obs;
}

}  // namespace detail

// Data-driven starting point: OLS for beta1 on the uncensored rows, a moment
// match for alpha, and a short logistic regression for beta2.
inline Theta initialize(const CensoredDataset& d) {
    const int n = d.n();
    const int n_unc = n - d.m;
    if (n_unc < d.p1())
        throw FitError(FitError::Kind::too_few_uncensored,
                       "initialize: fewer uncensored rows than continuous-component parameters");

    Matrix X1u(n_unc, d.p1());
    Vector yu(n_unc);
    int r = 0;
    for (int i = 0; i < n; ++i) {
        if (!d.is_censored[i]) {
            X1u.row(r) = d.X1.row(i);
            yu[r] = d.y[i];
            ++r;
        }
    }

    Theta t;
    t.beta1 = X1u.colPivHouseholderQr().solve(yu);

    // E[4 sinh^2((Y - mu)/2)] = alpha^2 under the log-BS law.
    const Vector resid = yu - X1u * t.beta1;
    double acc = 0.0;
    for (int i = 0; i < n_unc; ++i) {
        const double s = std::sinh(clamp_exp_arg(0.5 * resid[i]));
        acc += 4.0 * s * s;
    }
    t.alpha = std::sqrt(acc / n_unc);
    if (!(t.alpha > 1e-4)) t.alpha = 1e-4;

    std::vector<bool> uncensored(n);
    for (int i = 0; i < n; ++i) uncensored[i] = !d.is_censored[i];
    t.beta2 = detail::logistic_init(d.X2, uncensored);
    return t;
}

// Maximum-likelihood fit of the Bernoulli/BS mixture. Optimizes over
// (log alpha, beta1, beta2) so alpha stays positive.
inline FitResult fit_bernoulli_bs(const CensoredDataset& d, const FitConfig& cfg = {}) {
    const int p1 = d.p1(), p2 = d.p2();
    if (d.m == 0)
        throw FitError(FitError::Kind::not_identifiable,
                       "fit_bernoulli_bs: no censored observations, so the point-mass weight is "
                       "not identified; fit the tobit-bs model instead");
    if (static_cast<double>(d.m) / d.n() > 0.95)
        throw FitError(FitError::Kind::over_censored,
                       "fit_bernoulli_bs: more than 95% of rows are censored; estimates would be "
                       "unreliable (see the alpha=4 simulation cells)");
    if (d.n() - d.m < p1 + 1)
        throw FitError(FitError::Kind::too_few_uncensored,
                       "fit_bernoulli_bs: need at least p1+1 uncensored rows");

    const Theta t0 = cfg.init ? *cfg.init : initialize(d);

    auto objective = [&](const Vector& x, Vector& grad) -> double {
        Theta t = Theta::unpack(x, p1, p2);
        t.alpha = std::exp(std::clamp(x[0], -40.0, 40.0));
        ScoreVector sc;
        const double ll = loglik_and_score(d, t, sc);
        if (!std::isfinite(ll)) {
            grad.setZero(x.size());
            return kLogInf;
        }
        grad = -sc.packed();
        grad[0] *= t.alpha;  // chain rule for log-alpha
        return -ll;
    };

    auto theta_at = [&](const Vector& x) {
        Theta t = Theta::unpack(x, p1, p2);
        t.alpha = std::max(std::exp(std::clamp(x[0], -40.0, 40.0)), cfg.alpha_floor);
        return t;
    };

    // The optimizer converges on the log-alpha gradient; the contract is on
    // the theta-scale score, so polish with a tightened tolerance if needed.
    auto run_one = [&](Vector xs) {
        BfgsOptions bopt;
        bopt.max_iterations = cfg.max_iterations;
        bopt.gradient_tolerance = cfg.gradient_tolerance;
        bopt.step_tolerance = cfg.step_tolerance;
        BfgsResult r = bfgs_minimize(objective, std::move(xs), bopt);
        for (int round = 0; round < 3 && std::isfinite(r.f); ++round) {
            const Theta th = theta_at(r.x);
            const double gnorm = score(d, th).packed().lpNorm<Eigen::Infinity>();
            if (gnorm <= cfg.gradient_tolerance * (1.0 + std::fabs(r.f))) break;
            bopt.gradient_tolerance *= 0.5 * std::min(1.0, th.alpha);
            const int used = r.n_iterations;
            r = bfgs_minimize(objective, r.x, bopt);
            r.n_iterations += used;
        }
        return r;
    };

    Vector x0 = t0.packed();
    x0[0] = std::log(std::max(t0.alpha, cfg.alpha_floor));

    BfgsResult best = run_one(x0);
    Rng rng(derive_seed(cfg.seed, 0xb5u));
    for (int s = 1; s < cfg.n_starts; ++s) {
        Vector xs = x0;
        for (int j = 0; j < xs.size(); ++j) xs[j] += 0.3 * rng.normal();
        BfgsResult r = run_one(xs);
        // Best final log-likelihood wins; near-ties go to the smaller theta.
        if (r.f < best.f - 1e-8 ||
            (std::fabs(r.f - best.f) <= 1e-8 && r.x.norm() < best.x.norm())) {
            best = r;
        }
    }

    FitResult fr;
    fr.theta_hat = theta_at(best.x);
    fr.param_names = detail::default_param_names(p1, p2);
    fr.loglik_at_max = -best.f;
    fr.n_iterations = best.n_iterations;

    const ScoreVector sc = score(d, fr.theta_hat);
    const double gnorm = sc.packed().lpNorm<Eigen::Infinity>();
    fr.converged = gnorm <= cfg.gradient_tolerance * (1.0 + std::fabs(fr.loglik_at_max)) ||
                   (best.converged &&
                    gnorm <= std::sqrt(cfg.gradient_tolerance) * (1.0 + std::fabs(fr.loglik_at_max)));

    const int k = fr.n_params();
    fr.aic = -2.0 * fr.loglik_at_max + 2.0 * k;
    fr.bic = -2.0 * fr.loglik_at_max + std::log(static_cast<double>(d.n())) * k;

    if (cfg.compute_se) {
        Matrix info = observed_information(d, fr.theta_hat);
        const Matrix info_fd = -detail::fd_hessian_of_score(d, fr.theta_hat);
        const double scale = std::max(1.0, info_fd.cwiseAbs().maxCoeff());
        if (!info.allFinite() ||
            (info - info_fd).cwiseAbs().maxCoeff() > 5e-3 * scale) {
            info = info_fd;  // analytic form failed its self-check here
        }
        detail::fill_inference(fr, info, d.n());
    }
    return fr;
}

inline std::vector<WaldRow> wald_table(const FitResult& fr) {
    const Vector est = fr.theta_hat.packed();
    std::vector<WaldRow> rows;
    for (int j = 0; j < est.size(); ++j) {
        WaldRow row;
        row.name = j < static_cast<int>(fr.param_names.size()) ? fr.param_names[j] : "";
        row.estimate = est[j];
        row.available = fr.se_available;
        if (fr.se_available) {
            row.se = fr.se[j];
            row.z = fr.z_stats[j];
            row.p = fr.p_values[j];
            row.stars = significance_stars(row.p);
        } else {
            row.se = row.z = row.p = kNaN;
            row.stars = "";
        }
        rows.push_back(row);
    }
    return rows;
}

struct RefitResult {
    FitResult fit;
    CensoredDataset data;       // reduced design matrices
    std::vector<int> kept1;     // retained X1 column indices
    std::vector<int> kept2;     // retained X2 column indices
};

namespace detail {

inline bool is_intercept_column(const Matrix& X, int j) {
    for (int i = 0; i < X.rows(); ++i)
        if (X(i, j) != 1.0) return false;
    return true;
}

inline Matrix select_columns(const Matrix& X, const std::vector<int>& cols) {
    Matrix out(X.rows(), static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = X.col(cols[j]);
    return out;
}

}  // namespace detail

// Drops non-significant non-intercept covariates (at `level`) from each
// component independently and refits the reduced model.
inline RefitResult refit_significant(const CensoredDataset& d, const FitResult& fr, double level,
                                     const FitConfig& cfg = {}) {
    if (!fr.se_available)
        throw FitError(FitError::Kind::diverged,
                       "refit_significant: standard errors unavailable in the initial fit");
    const int p1 = d.p1(), p2 = d.p2();
    RefitResult out;
    for (int j = 0; j < p1; ++j) {
        if (detail::is_intercept_column(d.X1, j) || fr.p_values[1 + j] < level)
            out.kept1.push_back(j);
    }
    for (int j = 0; j < p2; ++j) {
        if (detail::is_intercept_column(d.X2, j) || fr.p_values[1 + p1 + j] < level)
            out.kept2.push_back(j);
    }
    if (out.kept1.empty() || out.kept2.empty())
        throw FitError(FitError::Kind::diverged,
                       "refit_significant: a component would be left with no columns");

    out.data = d;
    out.data.X1 = detail::select_columns(d.X1, out.kept1);
    out.data.X2 = detail::select_columns(d.X2, out.kept2);

    FitConfig sub = cfg;
    sub.init.reset();
    out.fit = fit_bernoulli_bs(out.data, sub);
    return out;
}

}  // namespace bbsmix

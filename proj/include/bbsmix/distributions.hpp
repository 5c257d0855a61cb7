#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bbsmix/math.hpp"
#include "bbsmix/rng.hpp"

namespace bbsmix {

// Birnbaum-Saunders on (0, inf): shape alpha, scale sigma (= median).
struct BSParams {
    double alpha;
    double sigma;

    BSParams(double alpha_, double sigma_) : alpha(alpha_), sigma(sigma_) {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::domain_error("BSParams: alpha must be > 0");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::domain_error("BSParams: sigma must be > 0");
    }
};

// Log of a BS variate: shape alpha, location mu = log(sigma).
struct LogBSParams {
    double alpha;
    double mu;

    LogBSParams(double alpha_, double mu_) : alpha(alpha_), mu(mu_) {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::domain_error("LogBSParams: alpha must be > 0");
        if (!std::isfinite(mu)) throw std::domain_error("LogBSParams: mu must be finite");
    }
};

inline double bs_pdf(double t, const BSParams& p) {
    if (!(t > 0.0)) throw std::domain_error("bs_pdf: t must be > 0");
    const double a = p.alpha, s = p.sigma;
    const double z = (std::sqrt(t / s) - std::sqrt(s / t)) / a;
    const double jac = (std::sqrt(1.0 / (s * t)) + std::sqrt(s) / (t * std::sqrt(t))) / (2.0 * a);
    return jac * std_normal_pdf(z);
}

inline double bs_cdf(double t, const BSParams& p) {
    if (t <= 0.0) return 0.0;
    const double z = (std::sqrt(t / p.sigma) - std::sqrt(p.sigma / t)) / p.alpha;
    return std_normal_cdf(z);
}

// Closed-form inverse of bs_cdf; also the sampling transform.
inline double bs_quantile(double prob, const BSParams& p) {
    const double z = std_normal_quantile(prob);
    const double h = 0.5 * p.alpha * z;
    const double root = h + std::sqrt(h * h + 1.0);
    return p.sigma * root * root;
}

inline double logbs_pdf(double y, const LogBSParams& p) {
    const double w = clamp_exp_arg(0.5 * (y - p.mu));
    const double sh = std::sinh(w);
    return (1.0 / p.alpha) * kInvSqrt2Pi * std::cosh(w) *
           std::exp(-2.0 / (p.alpha * p.alpha) * sh * sh);
}

// log cosh(w) without overflow: |w| + log1p(exp(-2|w|)) - log 2.
inline double log_cosh(double w) {
    const double aw = std::fabs(w);
    return aw + std::log1p(std::exp(-2.0 * std::min(aw, kExpArgMax))) - M_LN2;
}

// Stays finite far into the tails where logbs_pdf underflows.
inline double logbs_logpdf(double y, const LogBSParams& p) {
    const double w = clamp_exp_arg(0.5 * (y - p.mu));
    const double log_zeta1 = std::log(2.0 / p.alpha) + log_cosh(w);
    const double sh = std::sinh(w);
    const double half_zeta2_sq = 2.0 / (p.alpha * p.alpha) * sh * sh;
    return -M_LN2 - 0.5 * kLog2Pi + log_zeta1 - half_zeta2_sq;
}

inline double logbs_cdf(double y, const LogBSParams& p) {
    const double w = clamp_exp_arg(0.5 * (y - p.mu));
    return std_normal_cdf(2.0 / p.alpha * std::sinh(w));
}

inline double logbs_log_cdf(double y, const LogBSParams& p) {
    const double w = clamp_exp_arg(0.5 * (y - p.mu));
    return log_std_normal_cdf(2.0 / p.alpha * std::sinh(w));
}

inline double logbs_quantile(double prob, const LogBSParams& p) {
    const double z = std_normal_quantile(prob);
    return p.mu + 2.0 * std::asinh(0.5 * p.alpha * z);
}

// One draw: T = sigma * (alpha Z / 2 + sqrt((alpha Z / 2)^2 + 1))^2.
inline double sample_bs_one(const BSParams& p, Rng& rng) {
    const double h = 0.5 * p.alpha * rng.normal();
    const double root = h + std::sqrt(h * h + 1.0);
    return p.sigma * root * root;
}

inline double sample_logbs_one(const LogBSParams& p, Rng& rng) {
    return p.mu + 2.0 * std::asinh(0.5 * p.alpha * rng.normal());
}

inline std::vector<double> sample_bs(const BSParams& p, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_bs: n must be >= 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& t : out) t = sample_bs_one(p, rng);
    return out;
}

inline double lognormal_logpdf(double t, double mu, double sigma) {
    if (!(t > 0.0)) throw std::domain_error("lognormal_logpdf: t must be > 0");
    const double z = (std::log(t) - mu) / sigma;
    return std_normal_logpdf(z) - std::log(sigma) - std::log(t);
}

inline double lognormal_cdf(double t, double mu, double sigma) {
    if (t <= 0.0) return 0.0;
    return std_normal_cdf((std::log(t) - mu) / sigma);
}

}  // namespace bbsmix

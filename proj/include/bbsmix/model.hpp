#pragma once

#include <cmath>
#include <stdexcept>

#include "bbsmix/dataset.hpp"
#include "bbsmix/distributions.hpp"
#include "bbsmix/math.hpp"

namespace bbsmix {

// Full parameter vector of the mixture model, packed as (alpha, beta1, beta2).
struct Theta {
    double alpha = 1.0;
    Vector beta1;
    Vector beta2;

    int dim() const { return 1 + static_cast<int>(beta1.size() + beta2.size()); }

    Vector packed() const {
        Vector v(dim());
        v[0] = alpha;
        v.segment(1, beta1.size()) = beta1;
        v.segment(1 + beta1.size(), beta2.size()) = beta2;
        return v;
    }

    static Theta unpack(const Vector& v, int p1, int p2) {
        if (v.size() != 1 + p1 + p2) throw std::invalid_argument("Theta::unpack: bad size");
        Theta t;
        t.alpha = v[0];
        t.beta1 = v.segment(1, p1);
        t.beta2 = v.segment(1 + p1, p2);
        return t;
    }
};

// Logit link: tau = exp(eta) / (1 + exp(eta)), stable over |eta| <= 700.
inline double link_tau(double eta) {
    const double tau = logistic(eta);
    // Never exactly 0 or 1 so that log(tau) and log(1-tau) stay usable.
    constexpr double kTiny = 1e-308;
    if (tau < kTiny) return kTiny;
    if (tau > 1.0 - 1e-16) return 1.0 - 1e-16;
    return tau;
}

// Per-observation intermediates shared by the likelihood, score and Hessian.
// The zeta^c entries use the detection limit c in place of y_i.
struct MixtureDensityTerms {
    Vector mu;        // x1_i' beta1
    Vector eta;       // x2_i' beta2
    Vector tau;       // P(continuous component)
    Vector pi;        // 1 - tau
    Vector zeta1;     // (2/alpha) cosh((y_i - mu_i)/2)
    Vector zeta2;     // (2/alpha) sinh((y_i - mu_i)/2)
    Vector zeta1c;    // (2/alpha) cosh((c - mu_i)/2)
    Vector zeta2c;    // (2/alpha) sinh((c - mu_i)/2)
    Vector log_zeta1; // log-domain copy, finite where zeta1 overflows
    Vector log_Phi_zeta2c;
    double alpha = 1.0;
    double c = 0.0;

    int n() const { return static_cast<int>(mu.size()); }
};

inline MixtureDensityTerms compute_terms(const CensoredDataset& d, const Theta& t) {
    if (t.beta1.size() != d.p1() || t.beta2.size() != d.p2())
        throw std::invalid_argument("compute_terms: parameter/design dimension mismatch");
    if (!(t.alpha > 0.0)) throw std::domain_error("compute_terms: alpha must be > 0");

    const int n = d.n();
    MixtureDensityTerms r;
    r.alpha = t.alpha;
    r.c = d.c;
    r.mu = d.X1 * t.beta1;
    r.eta = d.X2 * t.beta2;
    r.tau.resize(n);
    r.pi.resize(n);
    r.zeta1.resize(n);
    r.zeta2.resize(n);
    r.zeta1c.resize(n);
    r.zeta2c.resize(n);
    r.log_zeta1.resize(n);
    r.log_Phi_zeta2c.resize(n);

    const double two_over_alpha = 2.0 / t.alpha;
    for (int i = 0; i < n; ++i) {
        r.tau[i] = link_tau(r.eta[i]);
        r.pi[i] = 1.0 - r.tau[i];
        const double w = clamp_exp_arg(0.5 * (d.y[i] - r.mu[i]));
        r.zeta1[i] = two_over_alpha * std::cosh(w);
        r.zeta2[i] = two_over_alpha * std::sinh(w);
        r.log_zeta1[i] = std::log(two_over_alpha) + log_cosh(w);
        const double wc = clamp_exp_arg(0.5 * (d.c - r.mu[i]));
        r.zeta1c[i] = two_over_alpha * std::cosh(wc);
        r.zeta2c[i] = two_over_alpha * std::sinh(wc);
        r.log_Phi_zeta2c[i] = log_std_normal_cdf(r.zeta2c[i]);
    }
    return r;
}

// Log density of observation i under the mixture:
//   censored:   log(pi_i + tau_i * Phi(zeta2c_i))
//   uncensored: log(tau_i) + log-BS log density at y_i.
inline double mixture_log_density(int i, const CensoredDataset& d,
                                  const MixtureDensityTerms& terms) {
    const double eta = terms.eta[i];
    if (d.is_censored[i]) {
        // log((1 + e^eta Phi) / (1 + e^eta)) via two softplus terms.
        return log1pexp(eta + terms.log_Phi_zeta2c[i]) - log1pexp(eta);
    }
    const double log_tau = eta - log1pexp(eta);
    const double half_zeta2_sq = 0.5 * terms.zeta2[i] * terms.zeta2[i];
    const double logpdf = -M_LN2 - 0.5 * kLog2Pi + terms.log_zeta1[i] - half_zeta2_sq;
    return log_tau + logpdf;
}

// CDF of observation i's law on the log scale. The point mass sits at c, so
// the function equals the censored-cell mass on all of (-inf, c].
inline double mixture_cdf(double y_query, int i, const MixtureDensityTerms& terms) {
    const double pi = terms.pi[i];
    const double tau = terms.tau[i];
    if (y_query <= terms.c) {
        return pi + tau * std_normal_cdf(terms.zeta2c[i]);
    }
    const LogBSParams law(terms.alpha, terms.mu[i]);
    return pi + tau * logbs_cdf(y_query, law);
}

// Survival 1 - G(y), computed through the normal upper tail so it keeps
// precision when G is near 1.
inline double mixture_survival(double y_query, int i, const MixtureDensityTerms& terms) {
    const double tau = terms.tau[i];
    const double z = y_query <= terms.c
                         ? terms.zeta2c[i]
                         : 2.0 / terms.alpha *
                               std::sinh(clamp_exp_arg(0.5 * (y_query - terms.mu[i])));
    return tau * std_normal_cdf(-z);
}

}  // namespace bbsmix

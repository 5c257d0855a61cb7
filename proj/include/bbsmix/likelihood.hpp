#pragma once

#include <cmath>

#include "bbsmix/model.hpp"

namespace bbsmix {

// First partial derivatives of the mixture log-likelihood, packed in Theta
// order (alpha, beta1, beta2).
struct ScoreVector {
    double d_alpha = 0.0;
    Vector d_beta1;
    Vector d_beta2;

    Vector packed() const {
        Vector v(1 + d_beta1.size() + d_beta2.size());
        v[0] = d_alpha;
        v.segment(1, d_beta1.size()) = d_beta1;
        v.segment(1 + d_beta1.size(), d_beta2.size()) = d_beta2;
        return v;
    }
};

namespace detail {

// 0 * inf = 0 here: the exponentially small factor always wins against the
// polynomial one in the censored-branch derivative terms.
inline double mul0(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

// Shared per-row quantities of the censored branch, all safe for extreme
// eta and zeta2c. With E = e^eta, F = Phi(zeta2c), p = phi(zeta2c) and
// A = 1 + E*F:  ratio_p = E*p/A, ratio_F = E*F/A, inv_A = 1/A.
struct CensoredRatios {
    double ratio_p;
    double ratio_F;
    double inv_A;
};

inline CensoredRatios censored_ratios(double eta, double zeta2c, double log_Phi_zeta2c) {
    const double logA = log1pexp(eta + log_Phi_zeta2c);
    const double logp = -0.5 * zeta2c * zeta2c - 0.5 * kLog2Pi;
    CensoredRatios r;
    r.ratio_p = std::exp(eta + logp - logA);
    r.ratio_F = std::exp(eta + log_Phi_zeta2c - logA);
    r.inv_A = std::exp(-logA);
    return r;
}

}  // namespace detail

// Mixture log-likelihood; -inf (never NaN) when a term degenerates.
inline double loglik(const CensoredDataset& d, const Theta& t) {
    const MixtureDensityTerms terms = compute_terms(d, t);
    double sum = 0.0;
    for (int i = 0; i < d.n(); ++i) {
        const double li = mixture_log_density(i, d, terms);
        if (!std::isfinite(li)) return -kLogInf;
        sum += li;
    }
    return sum;
}

// Log-likelihood and analytic score in one pass over the data.
inline double loglik_and_score(const CensoredDataset& d, const Theta& t, ScoreVector& sc) {
    const MixtureDensityTerms terms = compute_terms(d, t);
    const double alpha = t.alpha;

    sc.d_alpha = 0.0;
    sc.d_beta1 = Vector::Zero(d.p1());
    sc.d_beta2 = Vector::Zero(d.p2());

    double value = 0.0;
    for (int i = 0; i < d.n(); ++i) {
        const double li = mixture_log_density(i, d, terms);
        if (!std::isfinite(li)) {
            value = -kLogInf;
        } else if (std::isfinite(value)) {
            value += li;
        }

        if (d.is_censored[i]) {
            const auto r = detail::censored_ratios(terms.eta[i], terms.zeta2c[i],
                                                   terms.log_Phi_zeta2c[i]);
            sc.d_alpha += -detail::mul0(r.ratio_p, terms.zeta2c[i]) / alpha;
            sc.d_beta1 += -0.5 * detail::mul0(r.ratio_p, terms.zeta1c[i]) * d.X1.row(i).transpose();
            sc.d_beta2 += (r.ratio_F - terms.tau[i]) * d.X2.row(i).transpose();
        } else {
            const double z1 = terms.zeta1[i];
            const double z2 = terms.zeta2[i];
            sc.d_alpha += (z2 * z2 - 1.0) / alpha;
            sc.d_beta1 += 0.5 * (z1 * z2 - z2 / z1) * d.X1.row(i).transpose();
            sc.d_beta2 += (1.0 - terms.tau[i]) * d.X2.row(i).transpose();
        }
    }
    return value;
}

inline ScoreVector score(const CensoredDataset& d, const Theta& t) {
    ScoreVector sc;
    loglik_and_score(d, t, sc);
    return sc;
}

// Analytic Hessian of the log-likelihood, assembled from the per-row block
// scalars g, k1, k2, d, v1, v2. The censored-branch expressions are
// differentiated directly from the log-likelihood and validated against
// finite differences of the score in the tests.
inline Matrix hessian(const CensoredDataset& d, const Theta& t) {
    const MixtureDensityTerms terms = compute_terms(d, t);
    const double alpha = t.alpha;
    const int n = d.n(), p1 = d.p1(), p2 = d.p2();

    double g_sum = 0.0;
    Vector k1(n), k2(n), dd(n), v1(n), v2(n);

    for (int i = 0; i < n; ++i) {
        const double tau = terms.tau[i];
        if (d.is_censored[i]) {
            const auto r = detail::censored_ratios(terms.eta[i], terms.zeta2c[i],
                                                   terms.log_Phi_zeta2c[i]);
            const double z1c = terms.zeta1c[i];
            const double z2c = terms.zeta2c[i];
            const double rp_z2 = detail::mul0(r.ratio_p, z2c);
            const double rp_z1 = detail::mul0(r.ratio_p, z1c);

            g_sum += (detail::mul0(rp_z2, 2.0 - z2c * z2c) - rp_z2 * rp_z2) / (alpha * alpha);
            k1[i] = -(detail::mul0(rp_z1, z2c * z2c - 1.0) + rp_z1 * rp_z2) / (2.0 * alpha);
            k2[i] = -rp_z2 * r.inv_A / alpha;
            dd[i] = -0.5 * rp_z1 * r.inv_A;
            v1[i] = -0.25 * (detail::mul0(rp_z2, z1c * z1c - 1.0) + rp_z1 * rp_z1);
            v2[i] = r.ratio_F * r.inv_A - tau * (1.0 - tau);
        } else {
            const double z1 = terms.zeta1[i];
            const double z2 = terms.zeta2[i];
            const double w = clamp_exp_arg(0.5 * (d.y[i] - terms.mu[i]));
            const double ch = std::cosh(w);
            const double sech2 = 1.0 / (ch * ch);

            g_sum += -(3.0 * z2 * z2 - 1.0) / (alpha * alpha);
            k1[i] = -z1 * z2 / alpha;
            k2[i] = 0.0;
            dd[i] = 0.0;
            v1[i] = 0.25 * (sech2 - z1 * z1 - z2 * z2);
            v2[i] = -tau * (1.0 - tau);
        }
    }

    const Vector k1x = d.X1.transpose() * k1;
    const Vector k2x = d.X2.transpose() * k2;
    const Matrix cross = d.X1.transpose() * dd.asDiagonal() * d.X2;

    Matrix H(1 + p1 + p2, 1 + p1 + p2);
    H(0, 0) = g_sum;
    H.block(0, 1, 1, p1) = k1x.transpose();
    H.block(0, 1 + p1, 1, p2) = k2x.transpose();
    H.block(1, 0, p1, 1) = k1x;
    H.block(1 + p1, 0, p2, 1) = k2x;
    H.block(1, 1, p1, p1) = d.X1.transpose() * v1.asDiagonal() * d.X1;
    H.block(1, 1 + p1, p1, p2) = cross;
    H.block(1 + p1, 1, p2, p1) = cross.transpose();
    H.block(1 + p1, 1 + p1, p2, p2) = d.X2.transpose() * v2.asDiagonal() * d.X2;
    // The diagonal blocks come out of gemm a last-ulp off symmetric.
    H = 0.5 * (H + H.transpose()).eval();
    return H;
}

// Observed Fisher information: negative Hessian at the evaluation point.
inline Matrix observed_information(const CensoredDataset& d, const Theta& t) {
    return -hessian(d, t);
}

}  // namespace bbsmix

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bbsmix/estimation.hpp"
#include "bbsmix/model.hpp"
#include "bbsmix/rng.hpp"
#include "bbsmix/tobit.hpp"

namespace bbsmix {

// A fitted conditional law per observation: enough surface to compute
// survival probabilities and to simulate new responses for envelopes.
class FittedModel {
  public:
    virtual ~FittedModel() = default;
    virtual int n() const = 0;
    virtual double threshold() const = 0;
    // S(y | x_i); for censored rows callers evaluate at the threshold.
    virtual double survival(int i, double y) const = 0;
    // One observed response draw (already clamped to the threshold).
    virtual double simulate_response(int i, Rng& rng) const = 0;
    virtual std::string tag() const = 0;
};

class MixtureFittedModel final : public FittedModel {
  public:
    MixtureFittedModel(const CensoredDataset& d, const Theta& theta)
        : terms_(compute_terms(d, theta)) {}

    int n() const override { return terms_.n(); }
    double threshold() const override { return terms_.c; }

    double survival(int i, double y) const override { return mixture_survival(y, i, terms_); }

    double simulate_response(int i, Rng& rng) const override {
        const double u = rng.uniform();
        if (u < terms_.pi[i]) return terms_.c;  // point-mass branch
        const double y = terms_.mu[i] + 2.0 * std::asinh(0.5 * terms_.alpha * rng.normal());
        return y <= terms_.c ? terms_.c : y;
    }

    std::string tag() const override { return "bernoulli-bs"; }

  private:
    MixtureDensityTerms terms_;
};

class TobitFittedModel final : public FittedModel {
  public:
    TobitFittedModel(const TobitSpec& spec, const TobitData& data, const Vector& beta,
                     double scale)
        : spec_(spec), mu_(data.X * beta), scale_(scale) {}

    int n() const override { return static_cast<int>(mu_.size()); }
    double threshold() const override { return spec_.xi; }

    double survival(int i, double y) const override {
        const double z = (y - mu_[i]) / scale_;
        switch (spec_.law) {
            case TobitLaw::normal:
            case TobitLaw::log_normal: return std_normal_cdf(-z);
            case TobitLaw::student_t: return 1.0 - student_t_cdf(z, spec_.nu);
            case TobitLaw::bs: {
                const double w = clamp_exp_arg(0.5 * (y - mu_[i]));
                return std_normal_cdf(-2.0 / scale_ * std::sinh(w));
            }
        }
        return 0.0;
    }

    double simulate_response(int i, Rng& rng) const override {
        double eps;
        switch (spec_.law) {
            case TobitLaw::normal:
            case TobitLaw::log_normal: eps = scale_ * rng.normal(); break;
            case TobitLaw::student_t: eps = scale_ * rng.student_t(spec_.nu); break;
            case TobitLaw::bs: eps = 2.0 * std::asinh(0.5 * scale_ * rng.normal()); break;
        }
        const double y = mu_[i] + eps;
        return y <= spec_.xi ? spec_.xi : y;
    }

    std::string tag() const override { return tobit_law_name(spec_.law); }

  private:
    TobitSpec spec_;
    Vector mu_;
    double scale_;
};

// Generalized Cox-Snell residuals r_i = -log S_hat(y_i). EXP(1) under a
// correctly specified model.
struct ResidualSet {
    Vector r;
    Vector sorted_r;
    std::vector<bool> is_censored;
    std::vector<bool> capped;  // survival underflowed; residual clamped
    std::string model_tag;

    double mean() const { return r.size() > 0 ? r.mean() : kNaN; }
    double variance() const {
        if (r.size() < 2) return kNaN;
        const double m = r.mean();
        return (r.array() - m).square().sum() / (r.size() - 1.0);
    }
};

inline ResidualSet gcs_residuals(const FittedModel& model, const Vector& y,
                                 const std::vector<bool>& is_censored) {
    const int n = model.n();
    ResidualSet rs;
    rs.r.resize(n);
    rs.is_censored = is_censored;
    rs.capped.assign(n, false);
    rs.model_tag = model.tag();
    const double cap = -std::log(std::numeric_limits<double>::epsilon());
    for (int i = 0; i < n; ++i) {
        // Censored rows are evaluated at the censoring point.
        const double yq = is_censored[i] ? model.threshold() : y[i];
        const double s = model.survival(i, yq);
        if (s > 0.0) {
            rs.r[i] = std::min(-std::log(s), cap);
            rs.capped[i] = -std::log(s) > cap;
        } else {
            rs.r[i] = cap;
            rs.capped[i] = true;
        }
    }
    rs.sorted_r = rs.r;
    std::sort(rs.sorted_r.begin(), rs.sorted_r.end());
    return rs;
}

inline ResidualSet gcs_residuals(const FitResult& fit, const CensoredDataset& d) {
    MixtureFittedModel model(d, fit.theta_hat);
    return gcs_residuals(model, d.y, d.is_censored);
}

// Per-rank envelope bands from B model-based replicates, plus the EXP(1)
// theoretical quantiles -log(1 - (i - 0.5)/n).
struct EnvelopeBands {
    Vector theoretical;
    Vector lower;
    Vector median;
    Vector upper;
    int B_requested = 0;
    int B_used = 0;
    double level = 0.95;

    double band_width_mean() const { return (upper - lower).mean(); }
};

namespace detail {

// Quantile with plotting position h = (B+1)p, clamped to the extremes; at
// B = 19 and level 0.95 the bands are exactly the per-rank min/max.
inline double envelope_quantile(const std::vector<double>& sorted, double p) {
    const int B = static_cast<int>(sorted.size());
    const double h = (B + 1.0) * p;
    if (h <= 1.0) return sorted.front();
    if (h >= B) return sorted.back();
    const int lo = static_cast<int>(std::floor(h));
    const double frac = h - lo;
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

}  // namespace detail

// Optional per-replicate hook: given simulated responses and their censoring
// flags, produce that replicate's sorted residuals (used for refitting).
using EnvelopeResidualFn =
    std::function<std::optional<Vector>(const Vector& y_sim, const std::vector<bool>& cens_sim)>;

inline EnvelopeBands simulate_envelope(const FittedModel& model, int B, double level,
                                       std::uint64_t seed,
                                       const EnvelopeResidualFn& refit_hook = nullptr) {
    if (B < 19) throw std::invalid_argument("simulate_envelope: need B >= 19");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("simulate_envelope: level must be in (0,1)");

    const int n = model.n();
    std::vector<std::vector<double>> rank_values(n);
    for (auto& rv : rank_values) rv.reserve(B);

    int used = 0;
    for (int b = 0; b < B; ++b) {
        Rng rng(derive_seed(seed, 0xe57u, static_cast<std::uint64_t>(b)));
        Vector y_sim(n);
        std::vector<bool> cens_sim(n);
        for (int i = 0; i < n; ++i) {
            y_sim[i] = model.simulate_response(i, rng);
            cens_sim[i] = y_sim[i] <= model.threshold();
        }

        Vector sorted;
        if (refit_hook) {
            auto maybe = refit_hook(y_sim, cens_sim);
            if (!maybe) continue;  // replicate dropped (e.g. refit failed)
            sorted = *maybe;
        } else {
            sorted = gcs_residuals(model, y_sim, cens_sim).sorted_r;
        }
        for (int i = 0; i < n; ++i) rank_values[i].push_back(sorted[i]);
        ++used;
    }
    if (used == 0) throw FitError(FitError::Kind::diverged, "simulate_envelope: all replicates failed");

    EnvelopeBands bands;
    bands.B_requested = B;
    bands.B_used = used;
    bands.level = level;
    bands.theoretical.resize(n);
    bands.lower.resize(n);
    bands.median.resize(n);
    bands.upper.resize(n);
    const double p_lo = 0.5 * (1.0 - level);
    const double p_hi = 0.5 * (1.0 + level);
    for (int i = 0; i < n; ++i) {
        auto& rv = rank_values[i];
        std::sort(rv.begin(), rv.end());
        bands.theoretical[i] = -std::log(1.0 - (i + 0.5) / n);
        bands.lower[i] = detail::envelope_quantile(rv, p_lo);
        bands.median[i] = detail::envelope_quantile(rv, 0.5);
        bands.upper[i] = detail::envelope_quantile(rv, p_hi);
    }
    return bands;
}

inline EnvelopeBands simulate_envelope(const FitResult& fit, const CensoredDataset& d, int B,
                                       double level, std::uint64_t seed, bool refit = false) {
    MixtureFittedModel model(d, fit.theta_hat);
    if (!refit) return simulate_envelope(model, B, level, seed);

    EnvelopeResidualFn hook = [&](const Vector& y_sim,
                                  const std::vector<bool>& cens_sim) -> std::optional<Vector> {
        CensoredDataset ds = d;
        ds.y = y_sim;
        ds.is_censored = cens_sim;
        ds.m = 0;
        for (int i = 0; i < ds.n(); ++i) {
            ds.raw[i] = std::exp(y_sim[i]);
            ds.m += cens_sim[i] ? 1 : 0;
        }
        try {
            FitConfig cfg;
            cfg.compute_se = false;
            const FitResult refit_fr = fit_bernoulli_bs(ds, cfg);
            if (!refit_fr.converged) return std::nullopt;
            return gcs_residuals(refit_fr, ds).sorted_r;
        } catch (const FitError&) {
            return std::nullopt;
        }
    };
    return simulate_envelope(model, B, level, seed, hook);
}

// Descriptive statistics in the style used for summarizing a raw response
// column: SD with denominator n-1, CV in percent, moment skewness and
// non-excess kurtosis.
struct DescribeStats {
    int n = 0;
    double min = kNaN;
    double max = kNaN;
    double mean = kNaN;
    double median = kNaN;
    double sd = kNaN;
    std::optional<double> cv_percent;
    std::optional<double> cs;  // skewness
    std::optional<double> ck;  // kurtosis
};

inline DescribeStats describe(const Vector& x) {
    const int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("describe: need at least 2 observations");

    DescribeStats s;
    s.n = n;
    s.min = x.minCoeff();
    s.max = x.maxCoeff();
    s.mean = x.mean();

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    if (s.min == s.max) {  // constant input: no spread to normalize by
        s.sd = 0.0;
        if (s.mean != 0.0) s.cv_percent = 0.0;
        return s;
    }

    const Eigen::ArrayXd dev = x.array() - s.mean;
    const double m2 = dev.square().mean();
    const double m3 = dev.cube().mean();
    const double m4 = dev.square().square().mean();
    s.sd = std::sqrt(dev.square().sum() / (n - 1.0));

    if (s.mean != 0.0) s.cv_percent = 100.0 * s.sd / s.mean;
    if (m2 > 0.0) {
        s.cs = m3 / std::pow(m2, 1.5);
        s.ck = m4 / (m2 * m2);
    }
    return s;
}

}  // namespace bbsmix

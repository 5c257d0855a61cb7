#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bbsmix/likelihood.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bbsmix;
using Catch::Approx;
using testutil::make_theta;
using testutil::random_mixture_dataset;
using testutil::random_theta;

namespace {

Theta perturbed(const Theta& t, std::uint64_t seed) {
    Rng rng(seed);
    Theta out = t;
    out.alpha = std::max(0.05, t.alpha * (1.0 + 0.2 * rng.normal()));
    for (int j = 0; j < out.beta1.size(); ++j) out.beta1[j] += 0.2 * rng.normal();
    for (int j = 0; j < out.beta2.size(); ++j) out.beta2[j] += 0.2 * rng.normal();
    return out;
}

}  // namespace

// ============================================================================
// loglik
// ============================================================================

TEST_CASE("loglik is near zero when all rows sit in the point mass", "[likelihood]") {
    const Theta t = make_theta(1.0, {0.5}, {-40.0});  // tau ~ 0: pure point mass
    Matrix X = Matrix::Ones(6, 1);
    Vector y = Vector::Constant(6, -1.0);
    const CensoredDataset d = build_dataset(y, -1.0, X, X, true);
    REQUIRE(d.m == 6);

    const double ll = loglik(d, t);
    CHECK(ll <= 0.0);
    CHECK(ll > -1e-10);
}

TEST_CASE("loglik equals the summed per-observation likelihood oracle", "[likelihood]") {
    const Theta t = make_theta(1.0, {0.2, 0.5}, {1.0, 2.0});
    Matrix X1(5, 2), X2(5, 2);
    Vector y(5);
    X1 << 1, 0.15, 1, -0.3, 1, 0.75, 1, 0.05, 1, -0.6;
    X2 = X1;
    y << -0.9, 0.8, -0.9, 2.1, 0.1;
    const CensoredDataset d = build_dataset(y, -0.9, X1, X2, true);
    REQUIRE(d.m == 2);

    double expected = 0.0;
    for (int i = 0; i < 5; ++i) {
        const double mu = X1.row(i).dot(t.beta1);
        const double eta = X2.row(i).dot(t.beta2);
        const double tau = std::exp(eta) / (1.0 + std::exp(eta));
        if (d.is_censored[i]) {
            const double zc = 2.0 / t.alpha * std::sinh(0.5 * (d.c - mu));
            expected += std::log((1.0 - tau) + tau * std_normal_cdf(zc));
        } else {
            const double w = 0.5 * (y[i] - mu);
            const double dens = 1.0 / (t.alpha * std::sqrt(2.0 * M_PI)) * std::cosh(w) *
                                std::exp(-2.0 / (t.alpha * t.alpha) * std::sinh(w) * std::sinh(w));
            expected += std::log(tau * dens);
        }
    }
    CHECK(loglik(d, t) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("loglik is exchangeable across row permutations", "[likelihood]") {
    const Theta t = random_theta(2, 2, 31);
    const CensoredDataset d = random_mixture_dataset(t, 25, -0.4, 77);

    CensoredDataset rev = d;
    const int n = d.n();
    for (int i = 0; i < n; ++i) {
        rev.y[i] = d.y[n - 1 - i];
        rev.raw[i] = d.raw[n - 1 - i];
        rev.is_censored[i] = d.is_censored[n - 1 - i];
        rev.X1.row(i) = d.X1.row(n - 1 - i);
        rev.X2.row(i) = d.X2.row(n - 1 - i);
    }
    CHECK(loglik(rev, t) == Approx(loglik(d, t)).epsilon(1e-13));
}

TEST_CASE("loglik returns -inf, not NaN, on irrecoverable underflow", "[likelihood]") {
    const Theta t = make_theta(0.05, {900.0}, {5.0});
    Matrix X = Matrix::Ones(2, 1);
    Vector y(2);
    y << 1.0, 2.0;  // mu = 900 pushes sinh^2 past the double range
    const CensoredDataset d = build_dataset(y, -1.0, X, X, true);
    const double ll = loglik(d, t);
    CHECK(std::isinf(ll));
    CHECK(ll < 0.0);
}

// ============================================================================
// score vs finite differences
// ============================================================================

TEST_CASE("analytic score matches finite differences of loglik", "[likelihood][oracle]") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Theta gen = random_theta(2, 2, 1000 + seed);
        const CensoredDataset d = random_mixture_dataset(gen, 50, -0.4, 2000 + seed);
        if (d.m == 0 || d.m == d.n()) continue;
        const Theta at = perturbed(gen, 3000 + seed);

        auto f = [&](const Eigen::VectorXd& x) {
            return loglik(d, Theta::unpack(x, d.p1(), d.p2()));
        };
        const Vector fd = oracle::fd_gradient(f, at.packed(), 1e-6);
        const Vector an = score(d, at).packed();

        for (int j = 0; j < an.size(); ++j) {
            INFO("seed " << seed << " coord " << j);
            CHECK(std::fabs(an[j] - fd[j]) <= 1e-6 * std::max(1.0, std::fabs(fd[j])));
        }
        ++checked;
    }
    CHECK(checked >= 18);
}

TEST_CASE("score beta2 block on uncensored-only data", "[likelihood]") {
    const Theta t = make_theta(0.9, {0.3, 0.4}, {0.2, -0.5});
    Rng rng(8);
    const int n = 30;
    Matrix X1(n, 2), X2(n, 2);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        X1.row(i) << 1.0, rng.uniform(-1.0, 1.0);
        X2.row(i) << 1.0, rng.uniform(-1.0, 1.0);
        y[i] = 5.0 + rng.normal();  // far above the limit: nothing censored
    }
    const CensoredDataset d = build_dataset(y, -30.0, X1, X2, true);
    REQUIRE(d.m == 0);

    Vector expected = Vector::Zero(2);
    for (int i = 0; i < n; ++i)
        expected += (1.0 - link_tau(X2.row(i).dot(t.beta2))) * X2.row(i).transpose();
    const ScoreVector sc = score(d, t);
    CHECK(sc.d_beta2[0] == Approx(expected[0]).epsilon(1e-12));
    CHECK(sc.d_beta2[1] == Approx(expected[1]).epsilon(1e-12));
}

// ============================================================================
// hessian vs finite differences of the score
// ============================================================================

TEST_CASE("analytic hessian matches finite differences of the score", "[likelihood][oracle]") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Theta gen = random_theta(2, 2, 5000 + seed);
        const CensoredDataset d = random_mixture_dataset(gen, 50, -0.4, 6000 + seed);
        if (d.m == 0 || d.m == d.n()) continue;
        const Theta at = perturbed(gen, 7000 + seed);

        auto sfn = [&](const Eigen::VectorXd& x) {
            return score(d, Theta::unpack(x, d.p1(), d.p2())).packed();
        };
        const Matrix fd = oracle::fd_jacobian(sfn, at.packed(), 1e-6);
        const Matrix an = hessian(d, at);

        const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
        INFO("seed " << seed);
        CHECK((an - fd).cwiseAbs().maxCoeff() <= 1e-5 * scale);
        ++checked;
    }
    CHECK(checked >= 18);
}

TEST_CASE("hessian is exactly symmetric and uncensored rows zero out d and k2",
          "[likelihood]") {
    const Theta t = random_theta(2, 2, 42);
    Rng rng(43);
    const int n = 20;
    Matrix X1(n, 2), X2(n, 2);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        X1.row(i) << 1.0, rng.uniform(-1.0, 1.0);
        X2.row(i) << 1.0, rng.uniform(-1.0, 1.0);
        y[i] = 3.0 + 0.3 * rng.normal();
    }
    const CensoredDataset d = build_dataset(y, -20.0, X1, X2, true);
    REQUIRE(d.m == 0);

    const Matrix H = hessian(d, t);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // alpha x beta2 and beta1 x beta2 cross blocks vanish without censoring
    CHECK(H.block(0, 3, 1, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(H.block(1, 3, 2, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observed information is the negative hessian", "[likelihood]") {
    const Theta t = random_theta(2, 2, 55);
    const CensoredDataset d = random_mixture_dataset(t, 40, -0.4, 56);
    const Matrix H = hessian(d, t);
    const Matrix I = observed_information(d, t);
    CHECK((I + H).cwiseAbs().maxCoeff() == 0.0);
    CHECK((I - I.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("score stays finite in extreme but representable regimes", "[likelihood]") {
    // Small alpha and a wide linear predictor range: the censored-branch
    // ratios must not produce NaN through 0 * inf.
    const Theta t = make_theta(0.05, {0.0, 3.0}, {30.0, -60.0});
    const CensoredDataset d = random_mixture_dataset(make_theta(0.5, {0.0, 1.0}, {1.0, 2.0}),
                                                     60, 0.0, 321);
    const ScoreVector sc = score(d, t);
    CHECK(std::isfinite(sc.d_alpha));
    CHECK(sc.d_beta1.allFinite());
    CHECK(sc.d_beta2.allFinite());
    const Matrix H = hessian(d, t);
    CHECK(H.allFinite());
}

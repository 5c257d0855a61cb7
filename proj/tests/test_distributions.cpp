#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bbsmix/distributions.hpp"
#include "oracles.hpp"

using namespace bbsmix;
using Catch::Approx;

namespace {

// Breakpoints along the log-BS support chosen through the normal transform,
// so the adaptive quadrature starts with the peak bracketed.
std::vector<double> logbs_breaks(double alpha, double mu) {
    std::vector<double> breaks;
    for (double z : {-40.0, -20.0, -8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0, 20.0, 40.0})
        breaks.push_back(mu + 2.0 * std::asinh(0.5 * alpha * z));
    return breaks;
}

}  // namespace

// ============================================================================
// Scalar normal / Student-t helpers
// ============================================================================

TEST_CASE("standard normal pdf/cdf reference values", "[math]") {
    CHECK(std_normal_cdf(0.0) == Approx(0.5).margin(1e-15));
    CHECK(std_normal_cdf(1.959964) == Approx(0.9750000009035576).margin(1e-12));
    CHECK(std_normal_cdf(1.0) == Approx(0.8413447460685429).margin(1e-13));
    CHECK(std_normal_cdf(-2.5) == Approx(0.0062096653257761352).margin(1e-14));
    CHECK(std_normal_cdf(0.5) == Approx(0.6914624612740131).margin(1e-13));
    CHECK(std_normal_pdf(0.0) == Approx(0.3989422804014327).margin(1e-15));

    // 1e-12 absolute accuracy on |x| <= 8
    CHECK(std_normal_cdf(8.0) == Approx(1.0).margin(1e-12));
    CHECK(std_normal_cdf(-8.0) == Approx(6.22096057427178e-16).margin(1e-12));
}

TEST_CASE("normal quantile inverts the cdf", "[math]") {
    CHECK(std_normal_quantile(0.5) == Approx(0.0).margin(1e-15));
    CHECK(std_normal_quantile(0.975) == Approx(1.959963984540054).margin(1e-12));
    CHECK(std_normal_quantile(0.025) == Approx(-1.959963984540054).margin(1e-12));
    CHECK(std_normal_quantile(0.999) == Approx(3.0902323061678136).margin(1e-12));
    CHECK(std_normal_quantile(1e-10) == Approx(-6.361340902404056).margin(1e-10));
    for (double p : {1e-8, 1e-3, 0.2, 0.5, 0.77, 1.0 - 1e-6}) {
        CHECK(std_normal_cdf(std_normal_quantile(p)) == Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("log normal cdf matches deep-tail reference values", "[math]") {
    CHECK(log_std_normal_cdf(-5.0) == Approx(-15.064998393988726).epsilon(1e-13));
    CHECK(log_std_normal_cdf(-10.0) == Approx(-53.23128515051247).epsilon(1e-13));
    CHECK(log_std_normal_cdf(-20.0) == Approx(-203.91715537109726).epsilon(1e-13));
    CHECK(log_std_normal_cdf(-37.0) == Approx(-689.0305855768906).epsilon(1e-13));
    CHECK(log_std_normal_cdf(-50.0) == Approx(-1254.8313611394199).epsilon(1e-13));
    CHECK(log_std_normal_cdf(-100.0) == Approx(-5005.524208694205).epsilon(1e-13));
    CHECK(log_std_normal_cdf(0.0) == Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(log_std_normal_cdf(5.0) == Approx(std::log(std_normal_cdf(5.0))).epsilon(1e-14));
}

TEST_CASE("student t pdf/cdf", "[math]") {
    CHECK(student_t_cdf(0.0, 5.0) == Approx(0.5).margin(1e-15));
    CHECK(student_t_cdf(2.015048373333333, 5.0) == Approx(0.95).margin(1e-12));
    CHECK(student_t_cdf(1.0, 5.0) == Approx(0.8183912661754387).margin(1e-12));
    CHECK(student_t_cdf(-2.0, 10.0) == Approx(0.036694017385370183).margin(1e-12));
    CHECK(student_t_pdf(1.0, 5.0) == Approx(0.21967979735098057).margin(1e-13));
    CHECK(student_t_pdf(0.0, 7.0) == Approx(0.38499145083226733).margin(1e-13));
    CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(student_t_pdf(1.0, -3.0), std::domain_error);

    // symmetry
    for (double x : {0.3, 1.7, 4.0}) {
        CHECK(student_t_cdf(x, 6.0) + student_t_cdf(-x, 6.0) == Approx(1.0).margin(1e-13));
    }
}

// ============================================================================
// Birnbaum-Saunders on the positive scale
// ============================================================================

TEST_CASE("bs_pdf reference values from direct high-precision evaluation", "[distributions]") {
    CHECK(bs_pdf(1.0, BSParams(0.5, 1.0)) == Approx(0.7978845608028654).epsilon(1e-13));
    CHECK(bs_pdf(2.0, BSParams(1.5, 0.8)) == Approx(0.12050302774236494).epsilon(1e-13));
}

TEST_CASE("bs_pdf rejects bad arguments", "[distributions]") {
    CHECK_THROWS_AS(bs_pdf(0.0, BSParams(1.0, 1.0)), std::domain_error);
    CHECK_THROWS_AS(bs_pdf(-1.0, BSParams(1.0, 1.0)), std::domain_error);
    CHECK_THROWS_AS(BSParams(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(BSParams(1.0, -2.0), std::domain_error);
}

TEST_CASE("sigma is the median of BS for any alpha", "[distributions]") {
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        for (double sigma : {0.5, 1.0, 3.0}) {
            CHECK(bs_cdf(sigma, BSParams(alpha, sigma)) == Approx(0.5).margin(1e-14));
        }
    }
}

TEST_CASE("bs_pdf integrates to one", "[distributions]") {
    const BSParams p(1.0, 1.0);
    std::vector<double> breaks;
    for (double z : {-38.0, -20.0, -8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0, 20.0, 38.0}) {
        const double h = 0.5 * p.alpha * z;
        const double root = h + std::sqrt(h * h + 1.0);
        breaks.push_back(p.sigma * root * root);
    }
    const double mass =
        oracle::integrate_segments([&](double t) { return bs_pdf(t, p); }, breaks);
    CHECK(mass == Approx(1.0).margin(1e-8));
}

TEST_CASE("bs quantile inverts bs cdf", "[distributions]") {
    const BSParams p(0.7, 2.0);
    for (double prob : {0.01, 0.2, 0.5, 0.8, 0.99}) {
        CHECK(bs_cdf(bs_quantile(prob, p), p) == Approx(prob).epsilon(1e-12));
    }
}

// ============================================================================
// log-BS
// ============================================================================

TEST_CASE("logbs_pdf is symmetric about mu", "[distributions]") {
    const LogBSParams p(0.8, 1.3);
    for (double h : {0.1, 1.0, 3.0}) {
        CHECK(logbs_pdf(p.mu + h, p) == Approx(logbs_pdf(p.mu - h, p)).epsilon(1e-14));
    }
}

TEST_CASE("logbs_pdf normalization across shapes", "[distributions]") {
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const LogBSParams p(alpha, 0.0);
        const double mass = oracle::integrate_segments(
            [&](double y) { return logbs_pdf(y, p); }, logbs_breaks(alpha, 0.0));
        INFO("alpha = " << alpha);
        CHECK(mass == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("logbs_pdf value at the center", "[distributions]") {
    CHECK(logbs_pdf(0.0, LogBSParams(1.0, 0.0)) == Approx(0.3989422804014327).epsilon(1e-14));
}

TEST_CASE("logbs_logpdf agrees with log of pdf and survives the tails", "[distributions]") {
    const LogBSParams p(1.0, 0.0);
    for (double y : {-2.0, 0.0, 2.0}) {
        CHECK(logbs_logpdf(y, p) == Approx(std::log(logbs_pdf(y, p))).epsilon(1e-12));
    }
    CHECK(logbs_logpdf(0.0, p) == Approx(-0.9189385332046727).epsilon(1e-14));

    // Far tail where the density itself underflows: stays finite.
    const LogBSParams tight(0.1, 0.0);
    const double tail = logbs_logpdf(40.0, tight);
    CHECK(std::isfinite(tail));
    CHECK(tail < -1e8);  // astronomically unlikely, but a real number
    CHECK(logbs_pdf(40.0, tight) == 0.0);  // the plain pdf underflows here
}

TEST_CASE("logbs_cdf basics", "[distributions]") {
    for (double alpha : {0.3, 0.7, 2.5}) {
        const LogBSParams p(alpha, -0.4);
        CHECK(logbs_cdf(p.mu, p) == Approx(0.5).margin(1e-14));
        // y chosen so the normal argument is exactly 1
        const double y1 = p.mu + 2.0 * std::asinh(0.5 * alpha);
        CHECK(logbs_cdf(y1, p) == Approx(0.8413447460685429).epsilon(1e-13));
    }
}

TEST_CASE("logbs_cdf is nondecreasing with correct limits", "[distributions]") {
    for (double alpha : {0.1, 4.0}) {
        const LogBSParams p(alpha, 0.5);
        double prev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double y = -30.0 + 60.0 * i / 999.0;
            const double F = logbs_cdf(y, p);
            CHECK(F >= prev);
            CHECK(F <= 1.0);
            prev = F;
        }
        CHECK(logbs_cdf(-1e4, p) == Approx(0.0).margin(1e-300));
        CHECK(logbs_cdf(1e4, p) == Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("logbs_cdf agrees with the integral of logbs_pdf", "[distributions]") {
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const LogBSParams p(alpha, 0.2);
        for (double z_hi : {-1.0, 0.5, 2.0}) {
            const double y_hi = p.mu + 2.0 * std::asinh(0.5 * alpha * z_hi);
            auto breaks = logbs_breaks(alpha, p.mu);
            std::vector<double> trimmed;
            for (double b : breaks)
                if (b < y_hi) trimmed.push_back(b);
            trimmed.push_back(y_hi);
            const double mass = oracle::integrate_segments(
                [&](double y) { return logbs_pdf(y, p); }, trimmed);
            INFO("alpha = " << alpha << " z_hi = " << z_hi);
            CHECK(mass == Approx(logbs_cdf(y_hi, p)).margin(1e-7));
        }
    }
}

TEST_CASE("bs and logbs agree through the change of variables", "[distributions]") {
    Rng rng(991);
    for (int k = 0; k < 200; ++k) {
        const double alpha = 0.1 + 3.0 * rng.uniform();
        const double sigma = 0.2 + 4.0 * rng.uniform();
        const double t = bs_quantile(0.01 + 0.98 * rng.uniform(), BSParams(alpha, sigma));
        const double lhs = bs_pdf(t, BSParams(alpha, sigma)) * t;
        const double rhs = logbs_pdf(std::log(t), LogBSParams(alpha, std::log(sigma)));
        CHECK(lhs == Approx(rhs).epsilon(1e-10));
    }
}

// ============================================================================
// Sampling
// ============================================================================

TEST_CASE("sample_bs is deterministic given the seed", "[distributions][sampling]") {
    const auto a = sample_bs(BSParams(0.8, 1.5), 64, 1234);
    const auto b = sample_bs(BSParams(0.8, 1.5), 64, 1234);
    const auto c = sample_bs(BSParams(0.8, 1.5), 64, 1235);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("sample_bs empirical median near sigma", "[distributions][sampling]") {
    auto draws = sample_bs(BSParams(1.0, 1.0), 100000, 777);
    std::sort(draws.begin(), draws.end());
    const double med = 0.5 * (draws[49999] + draws[50000]);
    CHECK(med > 0.98);
    CHECK(med < 1.02);
}

TEST_CASE("sample_bs passes a KS check against the analytic cdf", "[distributions][sampling]") {
    for (double alpha : {0.5, 2.0}) {
        const BSParams p(alpha, 1.0);
        auto draws = sample_bs(p, 100000, 4242);
        const double d =
            oracle::ks_statistic(std::move(draws), [&](double t) { return bs_cdf(t, p); });
        INFO("alpha = " << alpha);
        CHECK(d < 0.006);
    }
}

TEST_CASE("normalizing transform of BS draws is standard normal", "[distributions][sampling]") {
    const double alpha = 1.3, sigma = 2.0;
    auto draws = sample_bs(BSParams(alpha, sigma), 100000, 515151);
    std::vector<double> z(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        z[i] = 2.0 / alpha * std::sinh(0.5 * (std::log(draws[i]) - std::log(sigma)));
    const double d = oracle::ks_statistic(std::move(z), [](double x) { return std_normal_cdf(x); });
    // KS critical value at level 0.01 for n = 1e5
    CHECK(d < 0.005147);
}

TEST_CASE("lognormal helpers", "[distributions]") {
    CHECK(lognormal_cdf(1.0, 0.0, 1.0) == Approx(0.5).margin(1e-15));
    CHECK(lognormal_cdf(0.0, 0.0, 1.0) == 0.0);
    CHECK(std::exp(lognormal_logpdf(2.0, 0.3, 0.7)) ==
          Approx(std_normal_pdf((std::log(2.0) - 0.3) / 0.7) / (0.7 * 2.0)).epsilon(1e-13));
}

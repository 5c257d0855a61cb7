#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "bbsmix/estimation.hpp"
#include "bbsmix/rng.hpp"

namespace bbsmix {

// Monte Carlo study configuration. Defaults mirror the reference design:
// one Uniform(0,1) covariate in both components, point mass at T = 1 so the
// fitting detection limit is c = 0 on the log scale.
struct MCConfig {
    std::vector<double> alphas{0.1, 0.5, 1.0, 2.0, 4.0};
    std::vector<int> ns{100, 300, 500};
    Vector beta1 = (Vector(2) << 0.2, 0.5).finished();
    Vector beta2 = (Vector(2) << 1.0, 2.0).finished();
    int replications = 5000;
    std::uint64_t seed = 20240915;
    bool impute_refit = false;  // retry failed fits with multi-start
    int threads = 0;            // 0: BBSMIX_THREADS env var, else hardware
};

struct MCCell {
    double alpha;
    int n;
    std::string parameter;
    double mean;
    double bias;
    double mse;
    int n_failed;
};

struct MCSummary {
    std::vector<MCCell> cells;
};

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BBSMIX_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// One synthetic dataset: covariate x ~ Uniform(0,1) shared by both
// components, response T = 1 with probability 1 - tau(x), otherwise
// exp(x1'beta1) times a BS(alpha, 1) multiplier. Censoring is observed only
// through y <= 0, so continuous draws that land at or below 0 are censored
// along with the point mass.
inline CensoredDataset generate_dataset(const Theta& theta, int n, std::uint64_t seed) {
    if (theta.beta1.size() != 2 || theta.beta2.size() != 2)
        throw std::invalid_argument("generate_dataset: expects intercept + one covariate");
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");

    Rng rng(seed);
    Matrix X(n, 2);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform();
        X(i, 0) = 1.0;
        X(i, 1) = x;
        const double tau = link_tau(theta.beta2[0] + theta.beta2[1] * x);
        if (rng.uniform() < 1.0 - tau) {
            y[i] = 0.0;  // T = 1
        } else {
            const double mu = theta.beta1[0] + theta.beta1[1] * x;
            y[i] = mu + 2.0 * std::asinh(0.5 * theta.alpha * rng.normal());
        }
    }
    return build_dataset(y, /*ldl=*/0.0, X, X, /*already_log=*/true);
}

namespace detail {

struct ReplicateOutcome {
    bool ok = false;
    Vector estimate;
};

inline ReplicateOutcome run_replicate(const Theta& truth, int n, std::uint64_t seed,
                                      bool impute_refit) {
    ReplicateOutcome out;
    try {
        const CensoredDataset d = generate_dataset(truth, n, seed);
        FitConfig cfg;
        cfg.compute_se = false;
        FitResult fr = fit_bernoulli_bs(d, cfg);
        if (!fr.converged && impute_refit) {
            cfg.n_starts = 4;
            cfg.seed = derive_seed(seed, 0x5eedu);
            fr = fit_bernoulli_bs(d, cfg);
        }
        if (fr.converged) {
            out.ok = true;
            out.estimate = fr.theta_hat.packed();
        }
    } catch (const FitError&) {
        // counted as a failure
    }
    return out;
}

}  // namespace detail

// Runs the full grid. Replicates are independent streams keyed by
// (alpha index, n index, replicate), so any thread count gives the same
// summary bit for bit.
inline MCSummary run_study(const MCConfig& cfg) {
    if (cfg.replications < 1) throw std::invalid_argument("run_study: replications must be >= 1");
    const int n_threads = resolve_thread_count(cfg.threads);

    MCSummary summary;
    const std::vector<std::string> param_names = {"alpha", "beta1_0", "beta1_1", "beta2_0",
                                                  "beta2_1"};

    for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
        Theta truth;
        truth.alpha = cfg.alphas[ai];
        truth.beta1 = cfg.beta1;
        truth.beta2 = cfg.beta2;
        const Vector truth_packed = truth.packed();

        for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
            const int n = cfg.ns[ni];
            std::vector<detail::ReplicateOutcome> outcomes(cfg.replications);

            std::atomic<int> next{0};
            auto worker = [&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= cfg.replications) break;
                    const std::uint64_t seed = derive_seed(cfg.seed, ai, ni, r);
                    outcomes[r] = detail::run_replicate(truth, n, seed, cfg.impute_refit);
                }
            };
            if (n_threads <= 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
                for (auto& th : pool) th.join();
            }

            // Fixed-order reduction keeps the summary reproducible.
            const int k = static_cast<int>(truth_packed.size());
            Vector sum = Vector::Zero(k), sum_sq_err = Vector::Zero(k);
            int ok_count = 0;
            for (const auto& o : outcomes) {
                if (!o.ok) continue;
                ++ok_count;
                sum += o.estimate;
                sum_sq_err += (o.estimate - truth_packed).array().square().matrix();
            }
            const int failed = cfg.replications - ok_count;
            for (int j = 0; j < k; ++j) {
                MCCell cell;
                cell.alpha = cfg.alphas[ai];
                cell.n = n;
                cell.parameter = param_names[j];
                if (ok_count > 0) {
                    cell.mean = sum[j] / ok_count;
                    cell.bias = cell.mean - truth_packed[j];
                    cell.mse = sum_sq_err[j] / ok_count;
                } else {
                    cell.mean = cell.bias = cell.mse = kNaN;
                }
                cell.n_failed = failed;
                summary.cells.push_back(cell);
            }
        }
    }
    return summary;
}

}  // namespace bbsmix

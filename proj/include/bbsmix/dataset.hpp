#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bbsmix/errors.hpp"

namespace bbsmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Left-censored regression data on the log scale. Rows with y <= c are
// recorded at exactly c; the raw (original-scale) responses are kept for
// baselines that work on the positive scale.
struct CensoredDataset {
    Vector y;                      // log-scale responses, censored rows = c
    std::vector<bool> is_censored; // indicator per row
    Matrix X1;                     // continuous-component design
    Matrix X2;                     // logit-component design
    double c = 0.0;                // log-scale detection limit
    int m = 0;                     // number of censored rows
    Vector raw;                    // original-scale responses (exp of y)

    int n() const { return static_cast<int>(y.size()); }
    int p1() const { return static_cast<int>(X1.cols()); }
    int p2() const { return static_cast<int>(X2.cols()); }
};

namespace detail {

inline void check_full_rank(const Matrix& X, const std::string& name) {
    if (X.rows() < X.cols())
        throw InputError(name + ": fewer rows than columns");
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < X.cols())
        throw InputError(name + ": design matrix is rank deficient");
}

inline void check_finite(const Matrix& X, const std::string& name) {
    if (!X.allFinite()) throw InputError(name + ": contains NaN or Inf");
}

}  // namespace detail

// Assembles a CensoredDataset. `raw_response` is on the original positive
// scale unless `already_log`; `ldl` is the detection limit on the same scale.
// Any response at or below the limit is censored and stored at c = log(ldl).
inline CensoredDataset build_dataset(const Vector& raw_response, double ldl, const Matrix& X1,
                                     const Matrix& X2, bool already_log = false) {
    const int n = static_cast<int>(raw_response.size());
    if (n == 0) throw InputError("build_dataset: empty response");
    if (X1.rows() != n || X2.rows() != n)
        throw InputError("build_dataset: design matrix row count does not match response");
    detail::check_finite(X1, "X1");
    detail::check_finite(X2, "X2");
    detail::check_full_rank(X1, "X1");
    detail::check_full_rank(X2, "X2");
    if (!raw_response.allFinite()) throw InputError("response: contains NaN or Inf");

    CensoredDataset d;
    d.X1 = X1;
    d.X2 = X2;
    d.y.resize(n);
    d.raw.resize(n);
    d.is_censored.assign(n, false);

    if (already_log) {
        if (!std::isfinite(ldl)) throw InputError("build_dataset: detection limit must be finite");
        d.c = ldl;
        for (int i = 0; i < n; ++i) {
            d.y[i] = raw_response[i];
            d.raw[i] = std::exp(raw_response[i]);
        }
    } else {
        if (!(ldl > 0.0)) throw InputError("build_dataset: detection limit must be > 0");
        d.c = std::log(ldl);
        for (int i = 0; i < n; ++i) {
            if (!(raw_response[i] > 0.0))
                throw InputError("build_dataset: nonpositive response at row " +
                                 std::to_string(i + 1));
            d.y[i] = std::log(raw_response[i]);
            d.raw[i] = raw_response[i];
        }
    }

    d.m = 0;
    for (int i = 0; i < n; ++i) {
        if (d.y[i] <= d.c) {
            d.is_censored[i] = true;
            d.y[i] = d.c;
            d.raw[i] = std::exp(d.c);
            ++d.m;
        }
    }
    return d;
}

}  // namespace bbsmix

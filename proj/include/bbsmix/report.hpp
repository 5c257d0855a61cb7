#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbsmix/diagnostics.hpp"
#include "bbsmix/estimation.hpp"
#include "bbsmix/simulation.hpp"

namespace bbsmix {

inline constexpr int kReportSchemaVersion = 1;

// Fit report consumed by the CLI's JSON output. Schema is versioned and
// pinned by tests; keep key changes deliberate.
inline nlohmann::json fit_report(const FitResult& fr, const std::string& model, int n, int m) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["model"] = model;
    j["n"] = n;
    j["m"] = m;
    j["converged"] = fr.converged;
    j["n_iterations"] = fr.n_iterations;
    j["loglik"] = fr.loglik_at_max;
    j["aic"] = fr.aic;
    j["bic"] = fr.bic;

    const Vector est = fr.theta_hat.packed();
    j["names"] = fr.param_names;
    j["estimates"] = std::vector<double>(est.begin(), est.end());
    if (fr.se_available) {
        j["se"] = std::vector<double>(fr.se.begin(), fr.se.end());
        j["z"] = std::vector<double>(fr.z_stats.begin(), fr.z_stats.end());
        j["p"] = std::vector<double>(fr.p_values.begin(), fr.p_values.end());
        std::vector<std::string> stars;
        for (const auto& row : wald_table(fr)) stars.push_back(row.stars);
        j["stars"] = stars;
    } else {
        j["se"] = nullptr;
        j["z"] = nullptr;
        j["p"] = nullptr;
        j["stars"] = nullptr;
    }
    if (fr.profiled_nu) j["nu"] = *fr.profiled_nu;
    return j;
}

inline nlohmann::json describe_report(const DescribeStats& s, int censored, double ldl) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["n"] = s.n;
    j["min"] = s.min;
    j["max"] = s.max;
    j["mean"] = s.mean;
    j["median"] = s.median;
    j["sd"] = s.sd;
    j["cv_percent"] = s.cv_percent ? nlohmann::json(*s.cv_percent) : nlohmann::json(nullptr);
    j["skewness"] = s.cs ? nlohmann::json(*s.cs) : nlohmann::json(nullptr);
    j["kurtosis"] = s.ck ? nlohmann::json(*s.ck) : nlohmann::json(nullptr);
    j["ldl"] = ldl;
    j["censored"] = censored;
    j["censored_fraction"] = static_cast<double>(censored) / s.n;
    return j;
}

namespace detail {

inline std::string format_cell(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

// rank, theoretical_quantile, observed, lower, median, upper, is_censored
inline std::string envelope_tsv(const EnvelopeBands& bands, const ResidualSet& rs) {
    std::ostringstream os;
    os << "rank\ttheoretical_quantile\tobserved\tlower\tmedian\tupper\tis_censored\n";
    // observed residuals sorted; censored flags follow the sort order
    const int n = static_cast<int>(rs.r.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return rs.r[a] < rs.r[b]; });
    for (int i = 0; i < n; ++i) {
        os << (i + 1) << '\t' << detail::format_cell(bands.theoretical[i]) << '\t'
           << detail::format_cell(rs.r[order[i]]) << '\t' << detail::format_cell(bands.lower[i])
           << '\t' << detail::format_cell(bands.median[i]) << '\t'
           << detail::format_cell(bands.upper[i]) << '\t' << (rs.is_censored[order[i]] ? 1 : 0)
           << '\n';
    }
    return os.str();
}

// index, residual, is_censored, capped
inline std::string residuals_tsv(const ResidualSet& rs) {
    std::ostringstream os;
    os << "index\tresidual\tis_censored\tcapped\n";
    for (int i = 0; i < rs.r.size(); ++i) {
        os << (i + 1) << '\t' << detail::format_cell(rs.r[i]) << '\t'
           << (rs.is_censored[i] ? 1 : 0) << '\t' << (rs.capped[i] ? 1 : 0) << '\n';
    }
    return os.str();
}

// alpha, n, parameter, mean, bias, mse, n_failed
inline std::string mc_summary_tsv(const MCSummary& summary) {
    std::ostringstream os;
    os << "alpha\tn\tparameter\tmean\tbias\tmse\tn_failed\n";
    for (const auto& c : summary.cells) {
        os << detail::format_cell(c.alpha) << '\t' << c.n << '\t' << c.parameter << '\t'
           << detail::format_cell(c.mean) << '\t' << detail::format_cell(c.bias) << '\t'
           << detail::format_cell(c.mse) << '\t' << c.n_failed << '\n';
    }
    return os.str();
}

inline nlohmann::json mc_summary_json(const MCSummary& summary) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : summary.cells) {
        rows.push_back({{"alpha", c.alpha},
                        {"n", c.n},
                        {"parameter", c.parameter},
                        {"mean", c.mean},
                        {"bias", c.bias},
                        {"mse", c.mse},
                        {"n_failed", c.n_failed}});
    }
    return nlohmann::json{{"schema_version", kReportSchemaVersion}, {"cells", rows}};
}

}  // namespace bbsmix

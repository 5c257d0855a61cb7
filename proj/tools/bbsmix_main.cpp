// Command-line front end: data ingestion, model fits, residual diagnostics,
// simulated envelopes and Monte Carlo studies.
//
// Exit codes: 0 success/converged, 1 input error, 2 fit did not converge.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bbsmix/bbsmix.hpp"
#include "bbsmix/report.hpp"

namespace {

using namespace bbsmix;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : csv) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& flag) {
    std::vector<double> out;
    for (const auto& tok : split_list(csv)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InputError(flag + ": cannot parse number '" + tok + "'");
        }
    }
    if (out.empty()) throw InputError(flag + ": empty list");
    return out;
}

std::vector<int> parse_ints(const std::string& csv, const std::string& flag) {
    std::vector<int> out;
    for (double v : parse_doubles(csv, flag)) out.push_back(static_cast<int>(v));
    return out;
}

void write_output(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InputError("cannot write to " + out_path);
    out << content;
}

struct CommonOpts {
    std::string data_path;
    std::string response;
    double ldl = 0.1;
    bool log_scale = false;
    std::string model = "bernoulli-bs";
    std::string x1_list;
    std::string x2_list;
    bool no_intercept = false;
    std::string format = "json";
    std::string out_path;
    std::uint64_t seed = 20240915;
    FitConfig fit_cfg;
};

void add_common_options(CLI::App* cmd, CommonOpts& o, bool with_model) {
    cmd->add_option("--data", o.data_path, "CSV file with a header row")->required();
    cmd->add_option("--response", o.response, "response column name")->required();
    cmd->add_option("--ldl", o.ldl, "lower detection limit (response scale)");
    cmd->add_flag("--log-scale", o.log_scale, "response column is already log scale");
    if (with_model) {
        cmd->add_option("--model", o.model, "bernoulli-bs|tobit-normal|tobit-t|tobit-ln|tobit-bs")
            ->check(CLI::IsMember(
                {"bernoulli-bs", "tobit-normal", "tobit-t", "tobit-ln", "tobit-bs"}));
        cmd->add_option("--x1", o.x1_list, "continuous-component covariate columns (comma list)");
        cmd->add_option("--x2", o.x2_list,
                        "logit-component covariate columns (bernoulli-bs only; defaults to --x1)");
        cmd->add_flag("--no-intercept", o.no_intercept, "do not add intercept columns");
        cmd->add_option("--max-iterations", o.fit_cfg.max_iterations, "BFGS iteration cap");
        cmd->add_option("--gtol", o.fit_cfg.gradient_tolerance, "gradient tolerance");
        cmd->add_option("--step-tol", o.fit_cfg.step_tolerance, "step-size tolerance");
        cmd->add_option("--starts", o.fit_cfg.n_starts, "multi-start count");
    }
    cmd->add_option("--format", o.format, "json or tsv")->check(CLI::IsMember({"json", "tsv"}));
    cmd->add_option("--out", o.out_path, "output file (default: stdout)");
    cmd->add_option("--seed", o.seed, "random seed");
}

Matrix design_matrix(const CsvTable& table, const std::vector<std::string>& cols,
                     bool intercept) {
    const int n = static_cast<int>(table.rows.size());
    const int p = (intercept ? 1 : 0) + static_cast<int>(cols.size());
    if (p == 0) throw InputError("design matrix would have no columns");
    Matrix X(n, p);
    int j = 0;
    if (intercept) X.col(j++).setOnes();
    for (const auto& name : cols) X.col(j++) = table.numeric_column(name);
    return X;
}

std::vector<std::string> component_names(const std::string& prefix,
                                         const std::vector<std::string>& cols, bool intercept) {
    std::vector<std::string> names;
    if (intercept) names.push_back(prefix + ":(Intercept)");
    for (const auto& c : cols) names.push_back(prefix + ":" + c);
    return names;
}

struct LoadedData {
    CensoredDataset dataset;
    std::vector<std::string> x1_cols;
    std::vector<std::string> x2_cols;
};

LoadedData load_dataset(const CommonOpts& o) {
    const CsvTable table = read_csv(o.data_path);
    const Vector y = table.numeric_column(o.response);

    LoadedData ld;
    ld.x1_cols = split_list(o.x1_list);
    ld.x2_cols = o.x2_list.empty() ? ld.x1_cols : split_list(o.x2_list);
    const Matrix X1 = design_matrix(table, ld.x1_cols, !o.no_intercept);
    const Matrix X2 = design_matrix(table, ld.x2_cols, !o.no_intercept);
    ld.dataset = build_dataset(y, o.ldl, X1, X2, o.log_scale);
    return ld;
}

struct ModelFit {
    FitResult fit;
    std::unique_ptr<FittedModel> model;  // for residuals/envelopes
    bool log_scale_model = true;         // observed y scale for residuals
    int n = 0;
    int m = 0;
};

ModelFit fit_model(const CommonOpts& o, const LoadedData& ld) {
    const CensoredDataset& d = ld.dataset;
    ModelFit mf;
    mf.n = d.n();
    mf.m = d.m;

    if (o.model == "bernoulli-bs") {
        mf.fit = fit_bernoulli_bs(d, o.fit_cfg);
        mf.fit.param_names.clear();
        mf.fit.param_names.push_back("alpha");
        for (const auto& nm : component_names("mu", ld.x1_cols, !o.no_intercept))
            mf.fit.param_names.push_back(nm);
        for (const auto& nm : component_names("logit", ld.x2_cols, !o.no_intercept))
            mf.fit.param_names.push_back(nm);
        mf.model = std::make_unique<MixtureFittedModel>(d, mf.fit.theta_hat);
        return mf;
    }

    TobitSpec spec;
    TobitData data;
    if (o.model == "tobit-normal" || o.model == "tobit-t") {
        // Raw-scale tobit unless the input is already logged.
        const double xi = o.log_scale ? d.c : std::exp(d.c);
        spec = TobitSpec(o.model == "tobit-t" ? TobitLaw::student_t : TobitLaw::normal, xi);
        data = o.log_scale ? tobit_data_log_scale(d) : tobit_data_raw_scale(d);
        mf.log_scale_model = o.log_scale;
    } else {
        spec = TobitSpec(o.model == "tobit-bs" ? TobitLaw::bs : TobitLaw::log_normal, d.c);
        data = tobit_data_log_scale(d);
    }
    mf.fit = fit_tobit(spec, data, o.fit_cfg);
    mf.fit.param_names.clear();
    mf.fit.param_names.push_back(o.model == "tobit-bs" ? "alpha" : "sigma");
    for (const auto& nm : component_names("beta", ld.x1_cols, !o.no_intercept))
        mf.fit.param_names.push_back(nm);
    if (mf.fit.profiled_nu) spec.nu = *mf.fit.profiled_nu;
    mf.model = std::make_unique<TobitFittedModel>(spec, data, mf.fit.theta_hat.beta1,
                                                  mf.fit.theta_hat.alpha);
    return mf;
}

std::string wald_tsv(const FitResult& fr) {
    std::ostringstream os;
    os << "parameter\testimate\tse\tz\tp\tstars\n";
    for (const auto& row : wald_table(fr)) {
        os << row.name << '\t' << row.estimate << '\t';
        if (row.available) {
            os << row.se << '\t' << row.z << '\t' << row.p << '\t' << row.stars << '\n';
        } else {
            os << "NA\tNA\tNA\t\n";
        }
    }
    return os.str();
}

int cmd_fit(const CommonOpts& o) {
    const LoadedData ld = load_dataset(o);
    const ModelFit mf = fit_model(o, ld);
    if (o.format == "tsv") {
        write_output(wald_tsv(mf.fit), o.out_path);
    } else {
        write_output(fit_report(mf.fit, o.model, mf.n, mf.m).dump(2) + "\n", o.out_path);
    }
    return mf.fit.converged ? 0 : 2;
}

int cmd_describe(const CommonOpts& o) {
    const CsvTable table = read_csv(o.data_path);
    const Vector y = table.numeric_column(o.response);
    const DescribeStats stats = describe(y);
    int censored = 0;
    for (int i = 0; i < y.size(); ++i) censored += y[i] <= o.ldl ? 1 : 0;

    const auto j = describe_report(stats, censored, o.ldl);
    if (o.format == "tsv") {
        std::ostringstream os;
        os << "statistic\tvalue\n";
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "schema_version") continue;
            os << it.key() << '\t' << it.value().dump() << '\n';
        }
        write_output(os.str(), o.out_path);
    } else {
        write_output(j.dump(2) + "\n", o.out_path);
    }
    return 0;
}

const Vector& observed_scale(const ModelFit& mf, const LoadedData& ld) {
    return mf.log_scale_model ? ld.dataset.y : ld.dataset.raw;
}

int cmd_residuals(const CommonOpts& o) {
    const LoadedData ld = load_dataset(o);
    const ModelFit mf = fit_model(o, ld);
    const ResidualSet rs =
        gcs_residuals(*mf.model, observed_scale(mf, ld), ld.dataset.is_censored);
    write_output(residuals_tsv(rs), o.out_path);
    std::cerr << "model " << o.model << ": n=" << mf.n << " m=" << mf.m
              << " mean(residual)=" << rs.mean() << " var(residual)=" << rs.variance() << "\n";
    return mf.fit.converged ? 0 : 2;
}

int cmd_envelope(const CommonOpts& o, int B, double level, bool refit) {
    const LoadedData ld = load_dataset(o);
    const ModelFit mf = fit_model(o, ld);
    const ResidualSet rs =
        gcs_residuals(*mf.model, observed_scale(mf, ld), ld.dataset.is_censored);

    EnvelopeBands bands;
    if (refit && o.model == "bernoulli-bs") {
        bands = simulate_envelope(mf.fit, ld.dataset, B, level, o.seed, /*refit=*/true);
    } else {
        bands = simulate_envelope(*mf.model, B, level, o.seed);
    }

    write_output(envelope_tsv(bands, rs), o.out_path);
    int outside = 0;
    for (int i = 0; i < rs.sorted_r.size(); ++i) {
        if (rs.sorted_r[i] < bands.lower[i] || rs.sorted_r[i] > bands.upper[i]) ++outside;
    }
    std::cerr << "model " << o.model << ": B=" << bands.B_used << "/" << bands.B_requested
              << " outside_bands=" << outside << "/" << mf.n << "\n";
    return mf.fit.converged ? 0 : 2;
}

int cmd_simulate(const std::string& alphas, const std::string& ns, const std::string& beta1,
                 const std::string& beta2, int reps, std::uint64_t seed, bool impute_refit,
                 int threads, const std::string& format, const std::string& out_path) {
    MCConfig cfg;
    cfg.alphas = parse_doubles(alphas, "--alphas");
    cfg.ns = parse_ints(ns, "--ns");
    const auto b1 = parse_doubles(beta1, "--beta1");
    const auto b2 = parse_doubles(beta2, "--beta2");
    cfg.beta1 = Eigen::Map<const Vector>(b1.data(), static_cast<Eigen::Index>(b1.size()));
    cfg.beta2 = Eigen::Map<const Vector>(b2.data(), static_cast<Eigen::Index>(b2.size()));
    cfg.replications = reps;
    cfg.seed = seed;
    cfg.impute_refit = impute_refit;
    cfg.threads = threads;

    const MCSummary summary = run_study(cfg);
    if (format == "tsv") {
        write_output(mc_summary_tsv(summary), out_path);
    } else {
        write_output(mc_summary_json(summary).dump(2) + "\n", out_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bernoulli/Birnbaum-Saunders mixture regression for left-censored data"};
    app.require_subcommand(1);

    CommonOpts fit_opts, desc_opts, resid_opts, env_opts;

    CLI::App* fit = app.add_subcommand("fit", "maximum-likelihood fit, JSON/TSV report");
    add_common_options(fit, fit_opts, true);

    CLI::App* desc = app.add_subcommand("describe", "descriptive statistics of the response");
    add_common_options(desc, desc_opts, false);

    CLI::App* resid = app.add_subcommand("residuals", "fit and emit GCS residuals (TSV)");
    add_common_options(resid, resid_opts, true);

    CLI::App* env = app.add_subcommand("envelope", "fit and emit a simulated QQ envelope (TSV)");
    add_common_options(env, env_opts, true);
    int env_B = 100;
    double env_level = 0.95;
    bool env_refit = false;
    env->add_option("--B", env_B, "number of simulated replicates (>= 19)");
    env->add_option("--level", env_level, "envelope level in (0,1)");
    env->add_flag("--refit-envelope", env_refit, "refit the model in each replicate");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study over an (alpha, n) grid");
    std::string sim_alphas = "0.1,0.5,1,2,4";
    std::string sim_ns = "100,300,500";
    std::string sim_beta1 = "0.2,0.5";
    std::string sim_beta2 = "1,2";
    int sim_reps = 5000;
    std::uint64_t sim_seed = 20240915;
    bool sim_impute = false;
    int sim_threads = 0;
    std::string sim_format = "tsv";
    std::string sim_out;
    sim->add_option("--alphas", sim_alphas, "shape grid (comma list)");
    sim->add_option("--ns", sim_ns, "sample-size grid (comma list)");
    sim->add_option("--beta1", sim_beta1, "continuous-component truth");
    sim->add_option("--beta2", sim_beta2, "logit-component truth");
    sim->add_option("--reps", sim_reps, "replications per cell");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_flag("--impute-refit", sim_impute, "retry failed fits with multi-start");
    sim->add_option("--threads", sim_threads, "worker threads (0: BBSMIX_THREADS or hardware)");
    sim->add_option("--format", sim_format, "tsv or json")->check(CLI::IsMember({"json", "tsv"}));
    sim->add_option("--out", sim_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return cmd_fit(fit_opts);
        if (desc->parsed()) return cmd_describe(desc_opts);
        if (resid->parsed()) return cmd_residuals(resid_opts);
        if (env->parsed()) return cmd_envelope(env_opts, env_B, env_level, env_refit);
        if (sim->parsed())
            return cmd_simulate(sim_alphas, sim_ns, sim_beta1, sim_beta2, sim_reps, sim_seed,
                                sim_impute, sim_threads, sim_format, sim_out);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

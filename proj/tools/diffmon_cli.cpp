// Copyright 2026 The diffmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end.
//
// Exit codes: 0 success, 1 failed check, 2 parse error, 3 schema error,
// 4 validation error, 5 I/O error, 6 other domain error, 64 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diffmon/diffmon.hpp"

namespace fs = std::filesystem;
using namespace diffmon;
using io::json;

namespace {

constexpr const char* kVersion = "1.0.0";

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return 2;
        case ErrorCode::SchemaError: return 3;
        case ErrorCode::ValidationError: return 4;
        case ErrorCode::IoError: return 5;
        default: return 6;
    }
}

struct Options {
    double hbar = 1.0;
    double tol = kDefaultTol;
    double dt = 1e-3;
    long steps = 1000;
    long ntraj = 100;
    std::uint64_t seed = 0;
    std::string mode = "nonlinear";
    long snapshot_stride = 0;
    unsigned threads = 1;
    std::string out;
    std::string input;
    std::string model_path;
    std::string rep_path;
    std::string rho0_path;
    long initial_index = 0;
    std::string to = "mrep";
    double tau_max = 2.0;
    double tau_step = 0.1;
    double burn_in = 0.5;
    long bin = 1;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
}

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
    } else {
        io::write_file(opt.out, text);
    }
}

json input_entry(const std::string& path) {
    return json{{"path", path}, {"fingerprint", io::fingerprint(io::read_file(path))}};
}

void write_manifest(const std::string& dir, const std::string& subcommand, const Options& opt,
                    const json& config, const json& inputs, const std::vector<std::string>& outputs) {
    json doc{{"tool", "diffmon"},
             {"version", kVersion},
             {"subcommand", subcommand},
             {"seed", opt.seed},
             {"config", config},
             {"inputs", inputs},
             {"outputs", outputs}};
    io::write_file((fs::path(dir) / "manifest.json").string(), doc.dump(2) + "\n");
}

ComplexMatrix initial_state(const Options& opt, Eigen::Index n) {
    if (!opt.rho0_path.empty()) {
        const json doc = io::parse_json(io::read_file(opt.rho0_path), opt.rho0_path);
        return io::state_from_json(io::detail::field(doc, "rho0"), n, opt.rho0_path);
    }
    if (opt.initial_index < 0 || opt.initial_index >= n) {
        throw Error(ErrorCode::ValidationError, "initial-index outside [0, dim)");
    }
    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    rho(opt.initial_index, opt.initial_index) = 1.0;
    return rho;
}

SimulationConfig sim_config(const Options& opt) {
    if (!(opt.dt > 0.0) || opt.steps < 1 || opt.ntraj < 1) {
        throw Error(ErrorCode::ValidationError, "need dt > 0, steps >= 1, ntraj >= 1");
    }
    if (opt.mode != "nonlinear" && opt.mode != "linear") {
        throw Error(ErrorCode::ValidationError, "mode must be nonlinear or linear");
    }
    SimulationConfig cfg;
    cfg.dt = opt.dt;
    cfg.steps = opt.steps;
    cfg.n_traj = opt.ntraj;
    cfg.seed = opt.seed;
    cfg.mode = opt.mode == "linear" ? SimMode::Linear : SimMode::Nonlinear;
    cfg.snapshot_stride = opt.snapshot_stride;
    cfg.threads = std::max(1u, opt.threads);
    return cfg;
}

json config_json(const SimulationConfig& cfg) {
    return json{{"dt", cfg.dt},
                {"steps", cfg.steps},
                {"n_traj", cfg.n_traj},
                {"seed", cfg.seed},
                {"mode", to_string(cfg.mode)},
                {"snapshot_stride", cfg.snapshot_stride},
                {"negativity_tol", cfg.negativity_tol},
                {"log_weight_floor", cfg.log_weight_floor}};
}

int run_validate(const Options& opt) {
    const auto rep = io::read_rep(opt.input, opt.tol, opt.hbar);
    std::cout << rep.type << " valid, eta=" << io::format_vector(rep.eta) << "\n";
    return 0;
}

int run_convert(const Options& opt) {
    const auto rep = io::read_rep(opt.input, opt.tol, opt.hbar);
    json doc;
    if (opt.to == "urep" && rep.brep && !rep.ortho) {
        doc = io::to_json(brep_to_urep(*rep.brep, rep.hbar, opt.tol));
    } else if (opt.to == "urep" && rep.urep) {
        doc = io::to_json(*rep.urep);
    } else {
        const MRep m = io::to_mrep(rep, opt.tol);
        if (opt.to == "mrep") {
            doc = io::to_json(m);
        } else if (opt.to == "trep") {
            doc = io::to_json(mrep_to_trep(m));
        } else if (opt.to == "urep") {
            doc = io::to_json(mrep_to_urep(m, opt.tol));
        } else {
            throw Error(ErrorCode::ValidationError, "--to must be mrep, urep or trep");
        }
    }
    emit(opt, doc.dump(2) + "\n");
    return 0;
}

int run_factorize(const Options& opt) {
    const auto rep = io::read_rep(opt.input, opt.tol, opt.hbar);
    const MRep m = io::to_mrep(rep, opt.tol);
    const auto f = mrep_to_brep_o_L1(m, opt.tol);
    json doc = io::to_json(f.b, m.hbar, f.o);
    doc["phi"] = f.phi;
    doc["reconstruction_error"] = (brep_o_to_mrep(f.b, f.o, m.hbar).matrix - m.matrix).norm();
    emit(opt, doc.dump(2) + "\n");
    return 0;
}

int run_simulate(const Options& opt) {
    const LindbladModel model = io::read_model(opt.model_path, opt.hbar);
    const auto rep = io::read_rep(opt.rep_path, opt.tol, model.hbar());
    const MRep m = io::to_mrep(rep, opt.tol);
    const ComplexMatrix rho0 = initial_state(opt, model.dim());
    const SimulationConfig cfg = sim_config(opt);
    Ensemble ens = simulate_ensemble(model, m, rho0, cfg);
    ens.model_fingerprint = io::fingerprint(io::read_file(opt.model_path));
    ens.rep_fingerprint = io::fingerprint(io::read_file(opt.rep_path));
    const auto report = convergence_report(ens, model);
    const auto tables = io::convergence_tables(report);

    const std::string dir = opt.out.empty() ? "." : opt.out;
    ensure_dir(dir);
    std::vector<std::string> outputs{"trajectories.csv", "convergence.json"};
    io::write_file((fs::path(dir) / "trajectories.csv").string(), io::trajectory_csv(ens));
    io::write_file((fs::path(dir) / "convergence.json").string(),
                   io::tables_to_json(tables).dump(2) + "\n");
    for (const auto& t : tables) {
        const std::string name = "convergence_" + t.name + ".csv";
        io::write_file((fs::path(dir) / name).string(), t.csv());
        outputs.push_back(name);
    }
    json inputs = json::array({input_entry(opt.model_path), input_entry(opt.rep_path)});
    if (!opt.rho0_path.empty()) inputs.push_back(input_entry(opt.rho0_path));
    write_manifest(dir, "simulate", opt, config_json(ens.config), inputs, outputs);
    std::cout << "simulated " << cfg.n_traj << " trajectories, max trace distance "
              << io::format_real(report.max_trace_distance) << "\n";
    return 0;
}

int run_autocorr(const Options& opt) {
    const LindbladModel model = io::read_model(opt.model_path, opt.hbar);
    const auto rep = io::read_rep(opt.rep_path, opt.tol, model.hbar());
    const MRep m = io::to_mrep(rep, opt.tol);
    const ComplexMatrix rho0 = initial_state(opt, model.dim());
    SimulationConfig cfg = sim_config(opt);
    cfg.mode = SimMode::Nonlinear;
    cfg.record_noise = false;
    cfg.record_purity = false;
    cfg.record_snapshots = false;
    if (!(opt.tau_step > 0.0) || opt.tau_max < opt.tau_step) {
        throw Error(ErrorCode::ValidationError, "need 0 < tau-step <= tau-max");
    }
    if (opt.bin < 1 || opt.bin > cfg.steps) throw Error(ErrorCode::ValidationError, "need 1 <= bin <= steps");
    const long rows = cfg.steps / opt.bin;
    const double dt_bin = cfg.dt * double(opt.bin);
    std::vector<long> lags;
    for (long k = 1;; ++k) {
        const long lag = std::lround(double(k) * opt.tau_step / dt_bin);
        if (double(lag) * dt_bin > opt.tau_max + 1e-12) break;
        if (lag >= 1 && (lags.empty() || lag != lags.back())) lags.push_back(lag);
    }
    std::vector<double> taus;
    for (long lag : lags) taus.push_back(double(lag) * dt_bin);

    AutocorrelationAccumulator acc(2 * m.channels(), lags, rows, dt_bin, opt.burn_in);
    const long batch = 256;
    for (long first = 0; first < cfg.n_traj; first += batch) {
        SimulationConfig part = cfg;
        part.first_stream = std::uint32_t(first);
        part.n_traj = std::min(batch, cfg.n_traj - first);
        const Ensemble ens = simulate_ensemble(model, m, rho0, part);
        for (const auto& t : ens.trajectories) acc.add(bin_rows(t.currents, opt.bin));
    }
    const auto estimated = acc.result();
    // The prediction is linear in rho_t, so the mean state over each lag's
    // averaging window gives the expectation of the estimator exactly.
    const auto states = me_integrate(model, rho0, cfg.dt, rows * opt.bin);
    std::vector<RealMatrix> predicted;
    for (size_t k = 0; k < lags.size(); ++k) {
        const ComplexMatrix rho_bar =
            window_mean_state(states, acc.start(), rows - lags[k] - acc.start(), opt.bin);
        predicted.push_back(predicted_autocorrelation(model, m, rho_bar, {taus[k]})[0]);
    }
    const double h2 = model.hbar() * model.hbar();

    const Eigen::Index d = 2 * m.channels();
    io::Table table{"autocorrelation", {"tau", "i", "j", "predicted", "estimated", "std_error"}, {}};
    for (size_t k = 0; k < lags.size(); ++k) {
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                table.rows.push_back({taus[k], double(i + 1), double(j + 1), predicted[k](i, j) / h2,
                                      estimated[k].mean(i, j), estimated[k].std_error(i, j)});
            }
        }
    }
    const std::string dir = opt.out.empty() ? "." : opt.out;
    ensure_dir(dir);
    io::write_file((fs::path(dir) / "autocorrelation.csv").string(), table.csv());
    io::write_file((fs::path(dir) / "autocorrelation.json").string(),
                   io::tables_to_json({table}).dump(2) + "\n");
    json config = config_json(cfg);
    config["burn_in"] = opt.burn_in;
    config["tau_max"] = opt.tau_max;
    config["tau_step"] = opt.tau_step;
    config["bin"] = opt.bin;
    write_manifest(dir, "autocorr", opt, config,
                   json::array({input_entry(opt.model_path), input_entry(opt.rep_path)}),
                   {"autocorrelation.csv", "autocorrelation.json"});
    std::cout << "autocorrelation for " << lags.size() << " lags written to " << dir << "\n";
    return 0;
}

int run_check(const Options& opt) {
    const auto results = check::run_all(opt.seed);
    int failures = 0;
    std::ostringstream report;
    json doc = json::array();
    for (const auto& r : results) {
        report << (r.passed ? "PASS " : "FAIL ") << r.name << " value=" << io::format17(r.value)
               << " limit=" << io::format17(r.limit);
        if (!r.detail.empty()) report << " (" << r.detail << ")";
        report << "\n";
        doc.push_back(json{{"name", r.name}, {"passed", r.passed}, {"value", r.value},
                           {"limit", r.limit}, {"detail", r.detail}});
        failures += r.passed ? 0 : 1;
    }
    report << (failures ? "check failed: " : "check passed: ") << results.size() - size_t(failures)
           << "/" << results.size() << "\n";
    std::cout << report.str();
    if (!opt.out.empty()) {
        ensure_dir(opt.out);
        io::write_file((fs::path(opt.out) / "check.json").string(), doc.dump(2) + "\n");
        write_manifest(opt.out, "check", opt, json{{"seed", opt.seed}}, json::array(), {"check.json"});
    }
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusive quantum measurement toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options opt;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--hbar", opt.hbar, "hbar for documents that omit it")->check(CLI::PositiveNumber);
        sub->add_option("--tol", opt.tol, "relative validation tolerance")->check(CLI::PositiveNumber);
    };
    auto sim = [&](CLI::App* sub) {
        sub->add_option("--model", opt.model_path, "model file")->required()->check(CLI::ExistingFile);
        sub->add_option("--rep", opt.rep_path, "measurement rep file")->required()->check(CLI::ExistingFile);
        sub->add_option("--dt", opt.dt, "time step");
        sub->add_option("--steps", opt.steps, "number of steps");
        sub->add_option("--ntraj", opt.ntraj, "number of trajectories");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--threads", opt.threads, "worker threads");
        sub->add_option("--rho0", opt.rho0_path, "initial state file")->check(CLI::ExistingFile);
        sub->add_option("--initial-index", opt.initial_index, "start in basis state |k>");
        sub->add_option("--out", opt.out, "output directory");
    };

    auto* validate = app.add_subcommand("validate", "validate a rep file and print eta");
    validate->add_option("file", opt.input)->required()->check(CLI::ExistingFile);
    common(validate);

    auto* convert = app.add_subcommand("convert", "convert a rep file");
    convert->add_option("file", opt.input)->required()->check(CLI::ExistingFile);
    convert->add_option("--to", opt.to, "target rep")->check(CLI::IsMember({"mrep", "urep", "trep"}));
    convert->add_option("--out", opt.out, "output file (default stdout)");
    common(convert);

    auto* factorize = app.add_subcommand("factorize", "factor a single-channel rep into (B, O)");
    factorize->add_option("file", opt.input)->required()->check(CLI::ExistingFile);
    factorize->add_option("--out", opt.out, "output file (default stdout)");
    common(factorize);

    auto* simulate = app.add_subcommand("simulate", "simulate a trajectory ensemble");
    sim(simulate);
    simulate->add_option("--mode", opt.mode, "nonlinear or linear")
        ->check(CLI::IsMember({"nonlinear", "linear"}));
    simulate->add_option("--snapshot-stride", opt.snapshot_stride, "steps between stored states");
    common(simulate);

    auto* autocorr = app.add_subcommand("autocorr", "predicted and estimated current autocorrelation");
    sim(autocorr);
    autocorr->add_option("--tau-max", opt.tau_max, "largest lag");
    autocorr->add_option("--tau-step", opt.tau_step, "lag spacing");
    autocorr->add_option("--burn-in", opt.burn_in, "discarded fraction of each trajectory");
    autocorr->add_option("--bin", opt.bin, "steps averaged into one current sample");
    common(autocorr);

    auto* checks = app.add_subcommand("check", "run the invariant suite");
    checks->add_option("--seed", opt.seed, "random seed");
    checks->add_option("--out", opt.out, "directory for check.json");
    common(checks);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 64;
    }

    try {
        if (*validate) return run_validate(opt);
        if (*convert) return run_convert(opt);
        if (*factorize) return run_factorize(opt);
        if (*simulate) return run_simulate(opt);
        if (*autocorr) return run_autocorr(opt);
        if (*checks) return run_check(opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    }
    return 64;
}

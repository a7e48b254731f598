#include "spinport/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "spinport/dsl.hpp"
#include "spinport/feasibility.hpp"
#include "spinport/format.hpp"
#include "spinport/heisenberg.hpp"
#include "spinport/mc/program.hpp"
#include "spinport/report_json.hpp"

namespace spinport::cli {

namespace {

using protocols::Engine;
using protocols::ProtocolConfig;
using protocols::ProtocolReport;

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct GridSpec {
    std::vector<double> values;
};

// start:stop:step, endpoints inclusive within 1e-12.
GridSpec parse_grid(const std::string& spec) {
    std::vector<double> parts;
    std::size_t begin = 0;
    while (true) {
        const std::size_t colon = spec.find(':', begin);
        const std::string piece =
            spec.substr(begin, colon == std::string::npos ? std::string::npos : colon - begin);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(piece, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("BAD_GRID: '" + spec + "' is not start:stop:step");
        }
        if (used != piece.size() || !std::isfinite(value))
            throw std::invalid_argument("BAD_GRID: '" + spec + "' is not start:stop:step");
        parts.push_back(value);
        if (colon == std::string::npos) break;
        begin = colon + 1;
    }
    if (parts.size() != 3)
        throw std::invalid_argument("BAD_GRID: '" + spec + "' is not start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (step <= 0.0) throw std::invalid_argument("BAD_GRID: step must be positive");
    if (stop < start) throw std::invalid_argument("BAD_GRID: stop must be >= start");
    GridSpec grid;
    const double tol = 1e-12 * std::max(1.0, std::abs(stop));
    for (double v = start; v <= stop + tol; v += step) grid.values.push_back(v);
    if (grid.values.empty()) throw std::invalid_argument("BAD_GRID: empty grid");
    return grid;
}

std::optional<std::uint64_t> env_seed() {
    if (const char* env = std::getenv("SPINPORT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("SPINPORT_SEED is not an unsigned integer");
        }
    }
    return std::nullopt;
}

void write_output(const std::string& path, const std::string& payload, std::ostream& out) {
    if (path.empty()) {
        out << payload;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
    file << payload;
}

struct CommonOptions {
    double r = 1.0;
    double kappa = 1.0;
    double ratio = 1e6;
    std::string engine = "analytic";
    std::uint64_t shots = 100000;
    std::int64_t seed = -1;  // -1 = unset
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_engine = true) {
    cmd->add_option("--r", opt.r, "parametric gain of the EPR source");
    cmd->add_option("--kappa", opt.kappa, "QND gain");
    cmd->add_option("--ratio", opt.ratio, "probe/EPR photon number ratio");
    if (with_engine)
        cmd->add_option("--engine", opt.engine, "analytic | monte_carlo")
            ->check(CLI::IsMember({"analytic", "monte_carlo"}));
    cmd->add_option("--shots", opt.shots, "Monte Carlo shots");
    cmd->add_option("--seed", opt.seed, "Monte Carlo seed (or SPINPORT_SEED)");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = auto)");
}

ProtocolConfig make_config(const CommonOptions& opt, std::ostream& err,
                           bool require_seed_for_mc = true) {
    ProtocolConfig cfg;
    cfg.r = opt.r;
    cfg.kappa = opt.kappa;
    cfg.readout_ratio = opt.ratio;
    cfg.shots = opt.shots;
    cfg.threads = opt.threads;
    cfg.engine = opt.engine == "monte_carlo" ? Engine::MonteCarlo : Engine::Analytic;
    if (opt.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(opt.seed);
    } else if (const auto seed = env_seed()) {
        cfg.seed = *seed;
    } else if (cfg.engine == Engine::MonteCarlo && require_seed_for_mc) {
        err << "SEED_REQUIRED: monte_carlo needs --seed or SPINPORT_SEED\n";
        throw CLI::RuntimeError(kExitUsage);
    }
    return cfg;
}

ProtocolDef load_protocol(const std::string& builtin_name, const std::string& script_path,
                          const ProtocolConfig& cfg, std::ostream& err) {
    if (!builtin_name.empty()) {
        const dsl::ParseResult result = dsl::builtin(builtin_name, cfg);
        if (!result.ok()) {
            for (const auto& d : result.diagnostics)
                err << dsl::diag_code_name(d.code) << ": " << d.message << "\n";
            throw CLI::RuntimeError(kExitUsage);
        }
        return dsl::compile(*result.ast);
    }
    std::ifstream file(script_path, std::ios::binary);
    if (!file) {
        err << "cannot read script '" << script_path << "'\n";
        throw CLI::RuntimeError(kExitUsage);
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    const dsl::ParseResult result = dsl::parse(buffer.str());
    if (!result.ok()) {
        for (const auto& d : result.diagnostics)
            err << script_path << ":" << d.line << ":" << d.col << ": "
                << dsl::diag_code_name(d.code) << ": " << d.message << "\n";
        throw CLI::RuntimeError(kExitUsage);
    }
    dsl::ProtocolAst ast = *result.ast;
    ast.name = std::filesystem::path(script_path).stem().string();
    return dsl::compile(ast);
}

int cmd_run(const std::string& builtin_name, const std::string& script_path,
            const CommonOptions& opt, const std::string& out_path, std::ostream& out,
            std::ostream& err) {
    const ProtocolConfig cfg = make_config(opt, err);
    const ProtocolDef def = load_protocol(builtin_name, script_path, cfg, err);
    const ProtocolReport report = protocols::run_protocol(def, cfg);
    write_output(out_path, to_json(report).dump(2) + "\n", out);
    err << "protocol=" << report.protocol << " engine=" << report.engine;
    if (report.fidelity_coherent.has_value())
        err << " fidelity_coherent=" << format_double(*report.fidelity_coherent);
    err << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& builtin_name, const std::string& grid_spec,
              const CommonOptions& opt, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
    const GridSpec grid = parse_grid(grid_spec);
    std::ostringstream csv;
    csv << "r,added_noise_x,added_noise_p,fidelity_coherent,engine,shots,seed\n";
    for (double r : grid.values) {
        CommonOptions point = opt;
        point.r = r;
        const ProtocolConfig cfg = make_config(point, err);
        const ProtocolDef def = load_protocol(builtin_name, "", cfg, err);
        const ProtocolReport report = protocols::run_protocol(def, cfg);
        const auto& primary = report.outputs.back();
        csv << format_double(r) << "," << format_double(primary.added_noise[0]) << ","
            << format_double(primary.added_noise[1]) << ","
            << format_double(primary.fidelity_coherent.value_or(
                   std::numeric_limits<double>::quiet_NaN()))
            << "," << report.engine << "," << report.shots << "," << report.seed << "\n";
    }
    write_output(out_path, csv.str(), out);
    err << "sweep rows=" << grid.values.size() << "\n";
    return kExitOk;
}

int cmd_feasibility(const std::string& params_path, const std::string& out_path,
                    std::ostream& out, std::ostream& err) {
    std::ifstream file(params_path, std::ios::binary);
    if (!file) {
        err << "cannot read params file '" << params_path << "'\n";
        return kExitUsage;
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    const feasibility::PhysicalParams params = feasibility::parse_params_file(buffer.str());
    const feasibility::FeasibilityReport report = feasibility::design_report(params);

    nlohmann::ordered_json j;
    j["schema"] = "spinport-feasibility/1";
    j["sigma"] = report.sigma;
    j["alpha_v"] = report.alpha_v;
    j["a"] = report.a;
    j["kappa"] = report.kappa;
    j["n_required"] = report.n_required;
    j["a_unity"] = report.a_unity;
    j["gamma_over_delta"] = report.gamma_over_delta;
    j["alpha_delta"] = report.alpha_delta;
    j["sigma_n_over_area"] = report.sigma_n_over_area;
    j["a_optimal"] = report.a_optimal;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& check : report.checks) {
        nlohmann::ordered_json c;
        c["name"] = check.name;
        c["status"] = check.status == feasibility::CheckStatus::Pass ? "pass" : "warn";
        c["value"] = check.value;
        c["threshold"] = check.threshold;
        c["formula"] = check.formula;
        j["checks"].push_back(std::move(c));
    }
    j["warnings"] = report.warnings;
    write_output(out_path, j.dump(2) + "\n", out);
    for (const auto& warning : report.warnings) err << "warn: " << warning << "\n";
    return kExitOk;
}

struct Mismatch {
    std::string quantity;
    double reference = 0.0;
    double other = 0.0;
    double tolerance = 0.0;
};

void compare(std::vector<Mismatch>& table, const std::string& quantity, double reference,
             double other, double tolerance) {
    if (std::abs(reference - other) > tolerance)
        table.push_back({quantity, reference, other, tolerance});
}

int cmd_validate(const std::string& builtin_name, const std::string& r_grid_spec,
                 double ratio_override, const CommonOptions& opt, double perturb_gain,
                 const std::string& dump_oracle_path, std::ostream& out,
                 std::ostream& err) {
    const std::vector<std::string> names =
        builtin_name.empty() ? dsl::builtin_names() : std::vector<std::string>{builtin_name};
    const std::vector<double> r_values =
        r_grid_spec.empty() ? std::vector<double>{0.0, 0.5, 1.0, 2.0}
                            : parse_grid(r_grid_spec).values;
    const std::vector<double> ratio_values =
        ratio_override > 0.0 ? std::vector<double>{ratio_override}
                             : std::vector<double>{1e2, 1e4, 1e6};
    constexpr double kOracleTol = 1e-10;
    constexpr double kSigmas = 5.0;

    std::vector<Mismatch> table;
    bool dumped = false;
    for (const std::string& name : names) {
        for (double r : r_values) {
            for (double ratio : ratio_values) {
                CommonOptions point = opt;
                point.r = r;
                point.ratio = ratio;
                point.engine = "monte_carlo";
                ProtocolConfig cfg = make_config(point, err, false);
                cfg.engine = Engine::Analytic;
                const dsl::ParseResult parsed = dsl::builtin(name, cfg);
                if (!parsed.ok()) throw std::runtime_error("builtin failed");
                const ProtocolDef def = dsl::compile(*parsed.ast);

                ProtocolDef analytic_def = def;
                if (perturb_gain != 0.0) {
                    for (Step& step : analytic_def.steps) {
                        if (auto* qnd = std::get_if<QndStep>(&step)) {
                            qnd->kappa *= 1.0 + perturb_gain;
                            break;
                        }
                    }
                }
                const EngineMoments analytic = run_analytic(analytic_def);

                // Heisenberg oracle route.
                Eigen::VectorXd mean0;
                Eigen::MatrixXd cov0;
                initial_moments(def, {}, mean0, cov0);
                const heisenberg::OracleMoments oracle =
                    heisenberg::oracle_moments(def, mean0, cov0);

                const std::string tag = name + " r=" + format_double(r) +
                                        " ratio=" + format_double(ratio);
                for (Eigen::Index i = 0; i < analytic.mean.size(); ++i)
                    compare(table, tag + " mean[" + std::to_string(i) + "]",
                            analytic.mean(i), oracle.mean(i), kOracleTol);
                for (Eigen::Index i = 0; i < analytic.cov.rows(); ++i)
                    for (Eigen::Index j = 0; j < analytic.cov.cols(); ++j)
                        compare(table,
                                tag + " cov[" + std::to_string(i) + "," + std::to_string(j) + "]",
                                analytic.cov(i, j), oracle.cov(i, j), kOracleTol);

                // Monte Carlo route.
                const mc::McMoments sampled = mc::run_monte_carlo(
                    def, {}, cfg.shots, cfg.seed, cfg.threads);
                for (Eigen::Index i = 0; i < analytic.mean.size(); ++i) {
                    compare(table, tag + " mc_mean[" + std::to_string(i) + "]",
                            analytic.mean(i), sampled.mean(i),
                            kSigmas * std::max(sampled.mean_se(i), 1e-300));
                    compare(table, tag + " mc_var[" + std::to_string(i) + "]",
                            analytic.cov(i, i), sampled.cov(i, i),
                            kSigmas * std::max(sampled.var_se(i), 1e-300));
                }

                if (!dump_oracle_path.empty() && !dumped) {
                    const auto table_json =
                        to_json(heisenberg::propagate(def), [&] {
                            std::vector<std::string> labels;
                            for (const auto& mode : def.modes) labels.push_back(mode.label);
                            return labels;
                        }(), def.outcome_names);
                    write_output(dump_oracle_path, table_json.dump(2) + "\n", out);
                    dumped = true;
                }

                // Residual noise of the primary output beyond the EPR term.
                const ProtocolReport report = protocols::run_protocol(def, cfg);
                const auto& primary = report.outputs.back();
                const double epr_noise = std::exp(-2.0 * r);
                out << "ok " << tag << " residual_noise="
                    << format_double(primary.added_noise[0] - epr_noise) << ","
                    << format_double(primary.added_noise[1] - epr_noise) << "\n";
            }
        }
    }

    if (!table.empty()) {
        out << "MISMATCH  quantity  reference  other  |diff|  tol\n";
        for (const auto& row : table)
            out << "  " << row.quantity << "  " << format_double(row.reference) << "  "
                << format_double(row.other) << "  "
                << format_double(std::abs(row.reference - row.other)) << "  "
                << format_double(row.tolerance) << "\n";
        err << "validate: " << table.size() << " mismatches\n";
        return kExitMismatch;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"spinport — continuous-variable spin/light teleportation simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a protocol and write a JSON report");
    std::string run_builtin, run_script, run_out;
    CommonOptions run_opt;
    auto* builtin_opt = run->add_option("--builtin", run_builtin, "builtin protocol name");
    auto* script_opt = run->add_option("--script", run_script, "path to a .qp script");
    builtin_opt->excludes(script_opt);
    script_opt->excludes(builtin_opt);
    add_common(run, run_opt);
    run->add_option("--out", run_out, "output path (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "sweep r over a grid, write CSV");
    std::string sweep_builtin, sweep_grid, sweep_out;
    CommonOptions sweep_opt;
    sweep->add_option("--builtin", sweep_builtin, "builtin protocol name")->required();
    sweep->add_option("--grid", sweep_grid, "r grid start:stop:step")->required();
    add_common(sweep, sweep_opt);
    sweep->add_option("--out", sweep_out, "output path (default stdout)");

    // feasibility
    auto* feas = app.add_subcommand("feasibility", "evaluate a physical design point");
    std::string feas_params, feas_out;
    feas->add_option("--params", feas_params, "flat key=value or JSON params file")
        ->required();
    feas->add_option("--out", feas_out, "output path (default stdout)");

    // validate
    auto* val = app.add_subcommand(
        "validate", "cross-check analytic, Monte Carlo and symbolic engines");
    std::string val_builtin, val_rgrid, val_dump;
    double val_ratio = 0.0;
    double val_perturb = 0.0;
    CommonOptions val_opt;
    val->add_option("--builtin", val_builtin, "restrict to one builtin");
    val->add_option("--r-grid", val_rgrid, "r grid start:stop:step");
    val->add_option("--ratio", val_ratio, "single readout ratio instead of the grid");
    val->add_option("--shots", val_opt.shots, "Monte Carlo shots");
    val->add_option("--seed", val_opt.seed, "Monte Carlo seed");
    val->add_option("--threads", val_opt.threads, "worker threads");
    val->add_option("--dump-oracle", val_dump, "write the symbolic table as JSON");
    val->add_option("--inject-gain-error", val_perturb,
                    "test hook: perturb one analytic gain")
        ->group("");  // hidden

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (run_builtin.empty() == run_script.empty()) {
                err << "run: exactly one of --builtin or --script is required\n";
                return kExitUsage;
            }
            return cmd_run(run_builtin, run_script, run_opt, run_out, out, err);
        }
        if (sweep->parsed())
            return cmd_sweep(sweep_builtin, sweep_grid, sweep_opt, sweep_out, out, err);
        if (feas->parsed()) return cmd_feasibility(feas_params, feas_out, out, err);
        if (val->parsed())
            return cmd_validate(val_builtin, val_rgrid, val_ratio, val_opt, val_perturb,
                                val_dump, out, err);
        err << "no subcommand\n";
        return kExitUsage;
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace spinport::cli

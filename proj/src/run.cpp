#include "cerm/run.hpp"

#include "cerm/adapter.hpp"
#include "cerm/analytics.hpp"
#include "cerm/calibration.hpp"
#include "cerm/csv.hpp"
#include "cerm/errors.hpp"
#include "cerm/gdp_stats.hpp"
#include "cerm/netzero.hpp"
#include "cerm/params.hpp"
#include "cerm/simulator.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace cerm {

using nlohmann::json;

namespace {

const char* kCommands[] = {"calibrate", "analyze", "simulate", "netzero", "migrate", "pipeline"};

void check_command(const std::string& cmd) {
    for (const char* c : kCommands)
        if (cmd == c) return;
    throw ConfigError("unknown command '" + cmd + "'");
}

void require_input(const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("config: missing required input path '") + what + "'");
    if (!std::filesystem::exists(p))
        throw DataError(std::string(what) + " file not found: " + p.string());
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunContext {
    const RunConfig& cfg;
    std::string hash;
    std::ofstream log;

    std::string csv_meta() const {
        return "config_hash=" + hash + " seed=" + std::to_string(cfg.seed);
    }

    json meta_json() const { return json{{"config_hash", hash}, {"seed", cfg.seed}}; }

    void note(const std::string& line) {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        log << std::chrono::duration_cast<std::chrono::milliseconds>(now).count() << " " << line
            << "\n";
    }

    void write_json(const std::filesystem::path& name, json j) const {
        j["meta"] = meta_json();
        std::ofstream out(cfg.out / name);
        if (!out) throw DataError("cannot write artifact: " + (cfg.out / name).string());
        out << j.dump(2) << "\n";
    }
};

ModelInput obtain_params(RunContext& ctx) {
    require_input(ctx.cfg.inputs.params, "params");
    return load_model_input(ctx.cfg.inputs.params);
}

ModelInput do_calibrate(RunContext& ctx) {
    require_input(ctx.cfg.inputs.history, "history");
    require_input(ctx.cfg.inputs.scenarios, "scenarios");
    require_input(ctx.cfg.inputs.study, "study");
    const HistoricalSeries series = load_history_csv(ctx.cfg.inputs.history);
    const TransitionStudy study = load_study_json(ctx.cfg.inputs.study);
    const ScenarioCosts scenarios = load_scenarios_csv(ctx.cfg.inputs.scenarios);

    const CalibrationResult res = calibrate_all(series, study, scenarios);
    ModelInput input{res.params, res.history};

    json params_json = json::parse(model_input_to_json(input));
    ctx.write_json("params.json", params_json);
    {
        std::ofstream out(ctx.cfg.out / "calibration_report.json");
        if (!out) throw DataError("cannot write calibration_report.json");
        out << calibration_report_json(res, ctx.meta_json().dump()) << "\n";
    }
    ctx.note("calibrate: wrote params.json, calibration_report.json");
    return input;
}

void do_analyze(RunContext& ctx, const ModelInput& input) {
    const ReducedParams rp = reduce(input.params);
    const MomentSchedule schedule =
        compute_moment_schedule(rp, input.params.e, input.params.theta, ctx.cfg.horizon);
    write_moment_schedule_csv(schedule, ctx.cfg.out / "moment_schedule.csv", ctx.csv_meta());

    const AsymptoticMoments am = asymptotic_moments(rp, input.params.e, input.params.theta);
    const AsymptoticRates rates = asymptotic_rates(input.params, rp, input.history);
    json j;
    j["xi_inf"] = {am.xi_inf[kE], am.xi_inf[kP], am.xi_inf[kT]};
    j["corr_inf"] = {{am.corr_inf(0, 0), am.corr_inf(0, 1), am.corr_inf(0, 2)},
                     {am.corr_inf(1, 0), am.corr_inf(1, 1), am.corr_inf(1, 2)},
                     {am.corr_inf(2, 0), am.corr_inf(2, 1), am.corr_inf(2, 2)}};
    j["c_const"] = am.c_const;
    j["rates"] = {{"r_mu_inf", rates.r_mu_inf},   {"mu_h", rates.mu_h},
                  {"mu_h_alt", rates.mu_h_alt},   {"mu_h_gap", rates.mu_h_gap},
                  {"r_s2_inf", rates.r_s2_inf},   {"s2_h", rates.s2_h},
                  {"log_median_rate", rates.log_median_rate},
                  {"log_mean_rate", rates.log_mean_rate},
                  {"log_variance_rate", rates.log_variance_rate}};
    ctx.write_json("asymptotics.json", std::move(j));

    write_fan_chart_csv(input.params, rp, input.history, ctx.cfg.horizon,
                        ctx.cfg.out / "gdp_fan_chart.csv", ctx.csv_meta());
    ctx.note("analyze: wrote moment_schedule.csv, asymptotics.json, gdp_fan_chart.csv");
}

void do_simulate(RunContext& ctx, const ModelInput& input) {
    SimConfig sim;
    sim.n_paths = ctx.cfg.paths;
    sim.horizon = ctx.cfg.horizon;
    sim.seed = ctx.cfg.seed;
    sim.threads = ctx.cfg.threads;
    sim.snapshots = ctx.cfg.snapshots;
    sim.store_paths = ctx.cfg.store_paths || !ctx.cfg.dump.empty();
    if (ctx.cfg.mode == "centered")
        sim.mode = SimMode::centered;
    else if (ctx.cfg.mode == "full")
        sim.mode = SimMode::full;
    else
        throw ConfigError("config: mode must be 'centered' or 'full'");

    PathEnsemble ens;
    if (sim.mode == SimMode::centered) {
        const ReducedParams rp = reduce(input.params);
        ens = simulate_centered(rp, input.params.e, input.params.theta, sim);
    } else {
        ens = simulate_full(input.params, input.history, sim);
    }
    write_ensemble_summary_csv(ens, ctx.cfg.out / "ensemble_summary.csv", ctx.csv_meta());
    if (!ctx.cfg.dump.empty()) write_path_dump(ens, ctx.cfg.dump);
    ctx.note("simulate: wrote ensemble_summary.csv");
}

void do_netzero(RunContext& ctx, const ModelInput& input) {
    const ReducedParams rp = reduce(input.params);
    const NetZeroInputs in =
        asymptotic_inputs(rp, input.params.e, input.params.theta, input.params);
    std::ofstream out(ctx.cfg.out / "netzero.json");
    if (!out) throw DataError("cannot write netzero.json");
    out << netzero_report_json(in, ctx.meta_json().dump()) << "\n";
    ctx.note("netzero: wrote netzero.json");
}

void do_migrate(RunContext& ctx, const ModelInput& input) {
    require_input(ctx.cfg.inputs.portfolio, "portfolio");
    const Portfolio pf = load_portfolio_csv(ctx.cfg.inputs.portfolio);
    const ReducedParams rp = reduce(input.params);
    const MomentSchedule schedule =
        compute_moment_schedule(rp, input.params.e, input.params.theta, ctx.cfg.horizon);
    MicroSchedule micro;
    const bool has_micro = !ctx.cfg.inputs.micro.empty();
    if (has_micro) {
        require_input(ctx.cfg.inputs.micro, "micro");
        micro = load_micro_schedule_csv(ctx.cfg.inputs.micro);
    }
    const auto schedules = migrate_portfolio(pf, schedule, {}, has_micro ? &micro : nullptr);
    write_migration_tensor_csv(schedules, ctx.cfg.out / "migration_tensor.csv", ctx.csv_meta());
    ctx.note("migrate: wrote migration_tensor.csv");
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config JSON: ") + ex.what());
    }

    RunConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "command") cfg.command = it->get<std::string>();
        else if (k == "out") cfg.out = it->get<std::string>();
        else if (k == "seed") cfg.seed = it->get<std::uint64_t>();
        else if (k == "horizon") cfg.horizon = it->get<long long>();
        else if (k == "paths") cfg.paths = it->get<std::uint64_t>();
        else if (k == "mode") cfg.mode = it->get<std::string>();
        else if (k == "threads") cfg.threads = it->get<int>();
        else if (k == "snapshots") cfg.snapshots = it->get<std::vector<long long>>();
        else if (k == "store_paths") cfg.store_paths = it->get<bool>();
        else if (k == "dump") cfg.dump = it->get<std::string>();
        else if (k == "inputs") {
            for (auto jt = it->begin(); jt != it->end(); ++jt) {
                const std::string& n = jt.key();
                if (n == "params") cfg.inputs.params = jt->get<std::string>();
                else if (n == "history") cfg.inputs.history = jt->get<std::string>();
                else if (n == "scenarios") cfg.inputs.scenarios = jt->get<std::string>();
                else if (n == "study") cfg.inputs.study = jt->get<std::string>();
                else if (n == "portfolio") cfg.inputs.portfolio = jt->get<std::string>();
                else if (n == "micro") cfg.inputs.micro = jt->get<std::string>();
                else throw ConfigError("config: unknown inputs key '" + n + "'");
            }
        } else {
            throw ConfigError("config: unknown key '" + k + "'");
        }
    }
    return cfg;
}

std::string config_canonical_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["out"] = c.out.string();
    j["seed"] = c.seed;
    j["horizon"] = c.horizon;
    j["paths"] = c.paths;
    j["mode"] = c.mode;
    j["threads"] = c.threads;
    j["snapshots"] = c.snapshots;
    j["store_paths"] = c.store_paths;
    j["dump"] = c.dump.string();
    j["inputs"] = {{"params", c.inputs.params.string()},
                   {"history", c.inputs.history.string()},
                   {"scenarios", c.inputs.scenarios.string()},
                   {"study", c.inputs.study.string()},
                   {"portfolio", c.inputs.portfolio.string()},
                   {"micro", c.inputs.micro.string()}};
    return j.dump();
}

std::string config_hash(const RunConfig& config) {
    std::ostringstream os;
    os << std::hex << fnv1a64(config_canonical_json(config));
    return os.str();
}

void run(const RunConfig& config) {
    if (config.command.empty()) throw ConfigError("config: no command given");
    check_command(config.command);
    if (config.horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (config.paths < 1) throw ConfigError("config: paths must be >= 1");

    std::filesystem::create_directories(config.out);
    RunContext ctx{config, config_hash(config), std::ofstream(config.out / "run.log", std::ios::app)};
    ctx.note("run start: command=" + config.command + " hash=" + ctx.hash);

    if (config.command == "calibrate") {
        do_calibrate(ctx);
    } else if (config.command == "analyze") {
        do_analyze(ctx, obtain_params(ctx));
    } else if (config.command == "simulate") {
        do_simulate(ctx, obtain_params(ctx));
    } else if (config.command == "netzero") {
        do_netzero(ctx, obtain_params(ctx));
    } else if (config.command == "migrate") {
        do_migrate(ctx, obtain_params(ctx));
    } else if (config.command == "pipeline") {
        const ModelInput input =
            config.inputs.history.empty() ? obtain_params(ctx) : do_calibrate(ctx);
        do_analyze(ctx, input);
        do_simulate(ctx, input);
        do_netzero(ctx, input);
        if (!config.inputs.portfolio.empty()) do_migrate(ctx, input);
    }
    ctx.note("run done");
}

} // namespace cerm

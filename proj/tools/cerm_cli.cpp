#include "cerm/errors.hpp"
#include "cerm/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"climate risk model: calibration, analytics, simulation, migration"};

    std::string config_path, command, mode, out, dump;
    std::string params_path, history_path, scenarios_path, study_path, portfolio_path;
    std::string micro_path;
    std::uint64_t seed = 0;
    long long horizon = 0;
    std::uint64_t paths = 0;
    int threads = -1;
    bool store_paths = false;

    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--command", command,
                   "calibrate | analyze | simulate | netzero | migrate | pipeline");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--horizon", horizon, "horizon in years");
    app.add_option("--paths", paths, "Monte Carlo path count");
    app.add_option("--mode", mode, "simulation mode: full | centered");
    app.add_option("--threads", threads, "worker threads (0 = CERM_THREADS/auto)");
    app.add_flag("--store-paths", store_paths, "keep full paths in memory");
    app.add_option("--dump", dump, "raw path dump file (implies stored paths)");
    app.add_option("--params", params_path, "model parameters JSON");
    app.add_option("--history", history_path, "historical series CSV");
    app.add_option("--scenarios", scenarios_path, "scenario costs CSV");
    app.add_option("--study", study_path, "net-zero study JSON");
    app.add_option("--portfolio", portfolio_path, "portfolio CSV");
    app.add_option("--micro", micro_path, "per-period micro-correlation CSV");

    try {
        app.parse(argc, argv);

        cerm::RunConfig cfg;
        if (!config_path.empty()) cfg = cerm::load_run_config(config_path);

        // flags win over the config file
        if (!command.empty()) cfg.command = command;
        if (!out.empty()) cfg.out = out;
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--horizon")) cfg.horizon = horizon;
        if (app.count("--paths")) cfg.paths = paths;
        if (!mode.empty()) cfg.mode = mode;
        if (threads >= 0) cfg.threads = threads;
        if (store_paths) cfg.store_paths = true;
        if (!dump.empty()) cfg.dump = dump;
        if (!params_path.empty()) cfg.inputs.params = params_path;
        if (!history_path.empty()) cfg.inputs.history = history_path;
        if (!scenarios_path.empty()) cfg.inputs.scenarios = scenarios_path;
        if (!study_path.empty()) cfg.inputs.study = study_path;
        if (!portfolio_path.empty()) cfg.inputs.portfolio = portfolio_path;
        if (!micro_path.empty()) cfg.inputs.micro = micro_path;

        cerm::run(cfg);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const cerm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cerm::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const cerm::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

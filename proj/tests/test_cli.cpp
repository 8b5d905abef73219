// End-to-end checks of the command-line driver: artifact production, exit
// codes, and byte-identical reruns. Invoked as
//   test_cli <path-to-cerm_cli> <path-to-fixture-dir>
#include "cerm/adapter.hpp"
#include "cerm/analytics.hpp"
#include "cerm/csv.hpp"
#include "cerm/params.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cerr << "FAIL: " << what << "\n";
    }
}

int run_command(const std::string& cmd) {
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: test_cli <cerm_cli> <fixture-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path fixture = argv[2];
    const fs::path work = fs::temp_directory_path() / "cerm_cli_test";
    fs::remove_all(work);
    fs::create_directories(work);

    // write a portfolio for the migrate stage
    const fs::path portfolio = work / "portfolio.csv";
    {
        std::ofstream out(portfolio);
        out << "group,rating,m1,m2,m3\n";
        out << "core,A,0.90,0.08,0.02\n";
        out << "core,B,0.10,0.80,0.10\n";
        out << "core,D,0.02,0.03,0.95\n";
    }

    // full pipeline over the bundled fixture
    const fs::path out1 = work / "out1";
    std::ostringstream pipeline;
    pipeline << cli << " --command pipeline"
             << " --history " << (fixture / "history.csv") << " --scenarios "
             << (fixture / "scenarios.csv") << " --study " << (fixture / "study.json")
             << " --portfolio " << portfolio << " --out " << out1
             << " --seed 7 --horizon 12 --paths 20000";
    check(run_command(pipeline.str()) == 0, "pipeline exits 0");

    for (const char* artifact :
         {"params.json", "calibration_report.json", "moment_schedule.csv", "asymptotics.json",
          "gdp_fan_chart.csv", "ensemble_summary.csv", "netzero.json", "migration_tensor.csv"})
        check(fs::exists(out1 / artifact), std::string("artifact exists: ") + artifact);

    // artifacts are re-parseable by the engine's own readers
    const cerm::ModelInput params = cerm::load_model_input(out1 / "params.json");
    check(params.history.gdp_t0 > 0.0, "params.json re-parses");
    const cerm::MomentSchedule sched =
        cerm::read_moment_schedule_csv(out1 / "moment_schedule.csv");
    check(sched.horizons.size() == 12, "moment schedule has one row per horizon");
    const cerm::CsvTable tensor = cerm::read_csv(out1 / "migration_tensor.csv");
    check(tensor.rows() == 12u * 9u, "migration tensor covers t x K x K");
    const cerm::CsvTable fan = cerm::read_csv(out1 / "gdp_fan_chart.csv");
    check(fan.rows() == 12 && fan.has_column("q95"), "fan chart re-parses");
    const cerm::CsvTable summary = cerm::read_csv(out1 / "ensemble_summary.csv");
    check(summary.rows() >= 1 && summary.has_column("cov_PP"), "ensemble summary re-parses");
    const auto netzero = nlohmann::json::parse(slurp(out1 / "netzero.json"));
    for (const char* key : {"p_nz1", "p_nz2", "p_nz3"}) {
        const double v = netzero[key].get<double>();
        check(v >= 0.0 && v <= 1.0, std::string(key) + " within [0, 1]");
    }
    check(netzero["meta"].contains("config_hash"), "netzero.json embeds the config hash");

    // identical config + seed into the same directory: byte-identical artifacts
    const char* artifacts[] = {"params.json",         "moment_schedule.csv",
                               "asymptotics.json",    "gdp_fan_chart.csv",
                               "ensemble_summary.csv", "netzero.json",
                               "migration_tensor.csv", "calibration_report.json"};
    std::vector<std::string> first_bytes;
    for (const char* artifact : artifacts) first_bytes.push_back(slurp(out1 / artifact));
    check(run_command(pipeline.str()) == 0, "second pipeline exits 0");
    for (std::size_t i = 0; i < first_bytes.size(); ++i) {
        check(!first_bytes[i].empty(),
              std::string("artifact non-empty: ") + artifacts[i]);
        check(first_bytes[i] == slurp(out1 / artifacts[i]),
              std::string("byte-identical artifact: ") + artifacts[i]);
    }

    // analyze from the generated params only
    const fs::path out4 = work / "out4";
    std::ostringstream analyze;
    analyze << cli << " --command analyze --params " << (out1 / "params.json") << " --out "
            << out4 << " --horizon 6";
    check(run_command(analyze.str()) == 0, "analyze exits 0");
    check(fs::exists(out4 / "asymptotics.json"), "analyze writes asymptotics.json");

    // exit codes: missing history file -> 3 (data), message carries the path
    std::ostringstream missing;
    missing << cli << " --command calibrate --history " << (work / "absent.csv")
            << " --scenarios " << (fixture / "scenarios.csv") << " --study "
            << (fixture / "study.json") << " --out " << (work / "out5");
    check(run_command(missing.str()) == 3, "missing history exits 3");

    // unknown command -> 2 (config)
    std::ostringstream bad_cmd;
    bad_cmd << cli << " --command explode --out " << (work / "out6");
    check(run_command(bad_cmd.str()) == 2, "unknown command exits 2");

    // |q| >= 1 parameters -> 4 (model domain)
    const fs::path bad_params = work / "bad_params.json";
    {
        std::ofstream out(bad_params);
        out << R"({"r":0.02,"e":0.02,"p_tilde":0.0,"theta":0.0,"alpha_tilde":0.0,
                   "beta":0.0,"gamma_tilde":0.0,
                   "history":{"gdp_t0":1.0,"y_e0":0,"y_p0":0,"y_t0":0,"y_p_minus1":0}})";
    }
    std::ostringstream domain;
    domain << cli << " --command analyze --params " << bad_params << " --out "
           << (work / "out7");
    check(run_command(domain.str()) == 4, "non-stationary parameters exit 4");

    if (failures == 0) {
        std::cout << "test_cli: all checks passed\n";
        fs::remove_all(work);
        return 0;
    }
    std::cerr << "test_cli: " << failures << " check(s) failed (workdir " << work << ")\n";
    return 1;
}

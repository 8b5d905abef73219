// Regenerates the bundled demo dataset under data/fixture/ from the
// canonical parameter set. Committed outputs are deterministic.

#include "cerm/calibration.hpp"
#include "cerm/params.hpp"
#include "cerm/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    const std::filesystem::path out = argc > 1 ? argv[1] : "data/fixture";
    std::filesystem::create_directories(out);

    cerm::ModelParams truth;
    truth.r = 0.025;
    truth.e = 0.02;
    truth.p_tilde = 0.003;
    truth.theta = 0.005;
    truth.alpha_tilde = 0.15;
    truth.beta = 1.0;
    truth.gamma_tilde = 0.02;

    cerm::SyntheticConfig cfg;
    cfg.seed = 42;

    const cerm::SyntheticData data = cerm::make_synthetic_dataset(truth, cfg);
    cerm::write_history_csv(data.series, out / "history.csv");
    cerm::write_scenarios_csv(data.scenarios, out / "scenarios.csv");
    cerm::write_study_json(data.study, out / "study.json");

    // Ground-truth parameters with the state implied by the series tail, so
    // the analytics commands can run without calibrating first.
    const std::size_t last = data.series.size() - 1;
    cerm::ModelInput input;
    input.params = truth;
    input.history.gdp_t0 = data.series.gdp[0];
    input.history.y_p0 = data.series.y_p[last];
    input.history.y_t0 = data.series.y_t[last];
    input.history.y_e0 = std::log(data.series.gdp[last] / data.series.gdp[0]) +
                         data.series.y_p[last] + data.series.y_t[last];
    input.history.y_p_minus1 = data.series.y_p[last - 1];
    cerm::save_model_input(input, out / "params.json");

    {
        std::ofstream pf(out / "portfolio.csv");
        pf << "group,rating,m1,m2,m3,m4\n";
        pf << "corporates,AA,0.92,0.06,0.015,0.005\n";
        pf << "corporates,BBB,0.05,0.85,0.08,0.02\n";
        pf << "corporates,B,0.01,0.09,0.82,0.08\n";
        pf << "corporates,D,0.005,0.015,0.05,0.93\n";
    }

    std::cout << "fixture written to " << out << "\n";
    return 0;
}

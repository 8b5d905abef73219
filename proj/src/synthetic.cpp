#include "cerm/synthetic.hpp"

#include "cerm/errors.hpp"
#include "cerm/rng.hpp"
#include "cerm/simulator.hpp"

#include <cmath>

namespace cerm {

SyntheticData make_synthetic_dataset(const ModelParams& truth, const SyntheticConfig& config) {
    if (config.n_years < 10) throw DataError("make_synthetic_dataset: need n_years >= 10");
    if (!(config.t1_year > -config.n_years && config.t1_year < 0))
        throw DataError("make_synthetic_dataset: t1_year must lie inside (-n_years, 0)");

    StateHistory start;
    start.gdp_t0 = config.gdp_base;

    SimConfig sim;
    sim.n_paths = 1;
    sim.horizon = config.n_years;
    sim.seed = config.seed;
    sim.mode = SimMode::full;
    sim.store_paths = true;
    sim.threads = 1;
    const PathEnsemble path = simulate_full(truth, start, sim);

    SyntheticData out;
    auto& s = out.series;
    for (long long k = 0; k <= config.n_years; ++k) {
        const double ye = path.value(0, k, kE);
        const double yp = path.value(0, k, kP);
        const double yt = path.value(0, k, kT);
        const double log_growth = ye - yp - yt;
        s.years.push_back(k - config.n_years);
        s.gdp.push_back(config.gdp_base * std::exp(log_growth));
        // Emissions proportional to realized economic activity, so that the
        // endpoint ratio recovers the configured carbon intensity exactly.
        s.co2.push_back(config.co2_base + config.carbon_intensity * log_growth);
        s.y_p.push_back(yp);
        s.y_t.push_back(yt);
    }
    s.transition_start_year = config.t1_year;

    auto& study = out.study;
    study.t1 = config.t1_year;
    study.t_nz = config.scenario_horizon;
    study.r_nz = truth.r;
    const double mu0 = std::log(s.gdp.back() / s.gdp.front());
    if (truth.alpha_tilde > 0.0 && truth.gamma_tilde > 0.0) {
        study.y_nz = truth.gamma_tilde * (mu0 + study.r_nz * study.t_nz) / truth.alpha_tilde;
        if (!(study.y_nz > 0.0))
            throw DataError("make_synthetic_dataset: realized history implies a nonpositive "
                            "transition cost; choose another seed or parameters");
    } else {
        study.y_nz = 1.0;
    }

    auto& scen = out.scenarios;
    scen.horizon = config.scenario_horizon;
    const double slope = config.carbon_intensity != 0.0
                             ? truth.gamma_tilde / config.carbon_intensity
                             : 0.0;
    const double noise_sd = truth.p_tilde * std::sqrt(config.scenario_horizon);
    for (long long i = 0; i < config.n_scenarios; ++i) {
        const double x = config.max_delta_co2 * static_cast<double>(i + 1) /
                         static_cast<double>(config.n_scenarios);
        const double z = normal_triple(config.seed ^ 0x5CE9A210Bu, static_cast<std::uint64_t>(i),
                                       1u)[0];
        scen.delta_co2.push_back(x);
        scen.yearly_damage.push_back(slope * x + noise_sd * z);
    }
    return out;
}

} // namespace cerm

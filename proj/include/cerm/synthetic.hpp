#pragma once

#include "cerm/calibration.hpp"
#include "cerm/params.hpp"

#include <cstdint>

namespace cerm {

// Generator settings for model-consistent synthetic calibration inputs.
struct SyntheticConfig {
    long long n_years = 60; // annual increments; the series has n_years + 1 rows
    long long t1_year = -40;
    std::uint64_t seed = 0;
    double gdp_base = 50.0;
    double co2_base = 1000.0;
    double carbon_intensity = 800.0;
    long long n_scenarios = 40;
    double scenario_horizon = 30.0;
    double max_delta_co2 = 4000.0;
};

struct SyntheticData {
    HistoricalSeries series;
    TransitionStudy study;
    ScenarioCosts scenarios;
};

// One stored path of the cumulative system turned into a history CSV shape,
// a CO2 column consistent with the chosen carbon intensity, a study whose
// cost identity recovers alpha~ exactly, and noisy damage scenarios with the
// true slope gamma~ / I. Round-tripping through calibrate_all recovers the
// generating parameters within their estimator CIs.
SyntheticData make_synthetic_dataset(const ModelParams& truth, const SyntheticConfig& config);

} // namespace cerm

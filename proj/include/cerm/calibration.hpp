#pragma once

#include "cerm/params.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cerm {

// Annual historical series over [-t0, 0]: GDP levels, cumulative
// anthropogenic CO2, and the pre-calibrated cumulative climate factors.
// transition_start_year marks -t1 (the year transition effort began).
struct HistoricalSeries {
    std::vector<long long> years;
    std::vector<double> gdp;
    std::vector<double> co2;
    std::vector<double> y_p;
    std::vector<double> y_t;
    long long transition_start_year = 0;

    std::size_t size() const { return years.size(); }
};

// Net-zero study assumptions: expected total transition cost, duration, and
// the growth assumption used by the study; t1 is the transition start year.
struct TransitionStudy {
    double y_nz = 0.0;
    double t_nz = 0.0;
    double r_nz = 0.0;
    long long t1 = 0;
};

// Scenario table: per-scenario excess CO2 since -t0 and the yearly damage it
// implies at the common maturity.
struct ScenarioCosts {
    std::vector<double> delta_co2;
    std::vector<double> yearly_damage;
    double horizon = 0.0;
};

struct EstimateCI {
    double value = 0.0;
    double se = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    long long n = 0;
    std::string method;

    bool covers(double truth) const { return truth >= lo && truth <= hi; }
};

struct EconomicEstimate {
    EstimateCI r;
    EstimateCI e;
};

struct DamageEstimate {
    double slope = 0.0; // damage per unit of excess CO2
    EstimateCI gamma_tilde;
    EstimateCI p_tilde;
};

struct PoliticsEstimate {
    EstimateCI beta;
    EstimateCI theta;
};

// R and e from the reconstructed climate-free increments
// (delta log GDP + delta Y_P + delta Y_T).
EconomicEstimate estimate_economic(const HistoricalSeries& series);

// Net carbon intensity over the no-transition window [-t0, -t1].
double carbon_intensity(const HistoricalSeries& series);

// alpha~ from the study's cost/duration and the current state.
EstimateCI transition_efficiency(const TransitionStudy& study, const HistoricalSeries& series,
                                 const EstimateCI& gamma_tilde);

// gamma~ and p~ from the scenario regression through the origin.
DamageEstimate damage_response(const ScenarioCosts& scenarios, double carbon_intensity);

// beta and theta from the lagged transition-effort regression after -t1.
PoliticsEstimate transition_politics(const HistoricalSeries& series);

struct CalibrationResult {
    ModelParams params;
    StateHistory history;
    ReducedParams reduced;
    EconomicEstimate economic;
    DamageEstimate damage;
    PoliticsEstimate politics;
    EstimateCI alpha_tilde;
    double carbon_intensity = 0.0;
};

// Chains the per-parameter estimators (I -> a, p~ -> gamma~ -> alpha~; R, e;
// beta, theta), derives the StateHistory from the series tail, and verifies
// |q| < 1.
CalibrationResult calibrate_all(const HistoricalSeries& series, const TransitionStudy& study,
                                const ScenarioCosts& scenarios);

std::string calibration_report_json(const CalibrationResult& result,
                                    const std::string& meta_json = {});

// File loaders (see README for the column lists).
HistoricalSeries load_history_csv(const std::filesystem::path& path);
ScenarioCosts load_scenarios_csv(const std::filesystem::path& path);
TransitionStudy load_study_json(const std::filesystem::path& path);
void write_history_csv(const HistoricalSeries& series, const std::filesystem::path& path);
void write_scenarios_csv(const ScenarioCosts& scenarios, const std::filesystem::path& path);
void write_study_json(const TransitionStudy& study, const std::filesystem::path& path);

} // namespace cerm

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cerm {

// The seven raw calibration parameters of the forward-looking GDP model.
// All rates are per-year; no unit conversion is performed anywhere.
struct ModelParams {
    double r = 0.0;           // mean climate-free log-growth
    double e = 0.0;           // idiosyncratic economic std-dev
    double p_tilde = 0.0;     // idiosyncratic physical std-dev rate
    double theta = 0.0;       // idiosyncratic transition std-dev
    double alpha_tilde = 0.0; // transition efficiency
    double beta = 0.0;        // transition reactivity
    double gamma_tilde = 0.0; // climate-change intensity of economic activity
};

// Reduced coefficients of the centered risk-factor system. beta, e and theta
// pass through the reduction unchanged; beta is carried here because the
// covariance formulas need it alongside q.
struct ReducedParams {
    double alpha = 0.0;
    double gamma = 0.0;
    double p = 0.0;
    double q = 0.0;     // AR coefficient of the physical factor, |q| < 1
    double sigma = 0.0; // characteristic std-dev sqrt((alpha+gamma)^2 theta^2 + e^2 gamma^2 + p^2)
    double beta = 0.0;
};

// Known state at the calibration date: GDP level at -t0 and the cumulative
// factors at t = 0, including the one-period physical lag.
struct StateHistory {
    double gdp_t0 = 1.0;
    double y_e0 = 0.0;
    double y_p0 = 0.0;
    double y_t0 = 0.0;
    double y_p_minus1 = 0.0;

    // E[Y~_P^0 - Y~_P^-1], the seed of the arithmetico-geometric mean recursion.
    double physical_lag() const { return y_p0 - y_p_minus1; }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const;
};

// Reduction of the raw parameters. Throws ModelError on negative inputs or
// |q| >= 1 (every asymptotic formula diverges there).
ReducedParams reduce(const ModelParams& params);

ValidationReport validate_params(const ModelParams& params);
ValidationReport validate_history(const StateHistory& h);

// JSON persistence: a flat document with exactly the seven raw keys plus a
// "history" block. Unknown keys are rejected.
struct ModelInput {
    ModelParams params;
    StateHistory history;
};

ModelInput load_model_input(const std::filesystem::path& path);
ModelInput parse_model_input(const std::string& json_text);
std::string model_input_to_json(const ModelInput& input);
void save_model_input(const ModelInput& input, const std::filesystem::path& path);

} // namespace cerm

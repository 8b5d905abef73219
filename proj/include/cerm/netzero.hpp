#pragma once

#include "cerm/params.hpp"

#include <string>

namespace cerm {

// Distribution of the one-step physical increment (1) and total growth
// increment (2) together with their correlation; asymptotic unless built by
// netzero_inputs_at.
struct NetZeroInputs {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double rho = 0.0;
};

// Asymptotic limits of the increment moments.
NetZeroInputs asymptotic_inputs(const ReducedParams& rp, double e, double theta,
                                const ModelParams& params);

// Finite-horizon increment moments at step t >= 1 (increment from t-1 to t),
// including the history lag; converges to asymptotic_inputs as t grows.
NetZeroInputs netzero_inputs_at(const ReducedParams& rp, double e, double theta,
                                const ModelParams& params, const StateHistory& history,
                                long long t);

// Unconditional probability of a net-zero year in the long run.
double p_nz1(const NetZeroInputs& inputs);

// Same probability evaluated through the sqrt((1+q)/(1-q)) closed form; the
// two routes agree to 1e-12 and are tested against each other.
double p_nz1_closed_form(const ReducedParams& rp, const ModelParams& params);

// Probability of a net-zero year conditional on growth equal to the
// asymptotic median growth rate.
double p_nz2(const NetZeroInputs& inputs);

// Second algebraic route for p_nz2 through sigma1^2 sigma2^2 - cov^2.
double p_nz2_expanded(const NetZeroInputs& inputs);

// Probability of a net-zero year conditional on positive growth.
double p_nz3(const NetZeroInputs& inputs);

// JSON record {p_nz1, p_nz2, p_nz3, inputs:{...}} for audit.
std::string netzero_report_json(const NetZeroInputs& inputs, const std::string& meta_json = {});

} // namespace cerm

#include "cerm/netzero.hpp"

#include "cerm/analytics.hpp"
#include "cerm/errors.hpp"
#include "cerm/gaussian.hpp"
#include "cerm/gdp_stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace cerm {

namespace {

void require_valid(const NetZeroInputs& in, const char* what) {
    if (!(in.sigma1 > 0.0) || !(in.sigma2 > 0.0))
        throw ModelError(std::string(what) + ": degenerate increment std-dev");
    if (!(std::abs(in.rho) <= 1.0)) throw ModelError(std::string(what) + ": |rho| > 1");
}

// sigma2^2 and Cov(dY_P, growth increment) at step t, from the risk-factor
// covariance at horizons t and t-1.
struct IncrementSecondMoments {
    double var1, var2, cov;
};

IncrementSecondMoments increment_moments(const ReducedParams& rp, double e, double theta,
                                         double ct, double ct1) {
    const double e2 = e * e;
    const double th2 = theta * theta;
    const double s2 = rp.sigma * rp.sigma;
    const double ag = rp.alpha + rp.gamma;
    IncrementSecondMoments m;
    m.var1 = s2 * ct;
    m.var2 = (1.0 - 2.0 * rp.gamma) * e2 + (1.0 - 2.0 * ag) * th2 +
             s2 * (ct + (rp.beta * rp.beta + 2.0 * rp.beta * rp.q) * ct1);
    m.cov = rp.gamma * e2 + ag * th2 - s2 * (ct + rp.beta * rp.q * ct1);
    return m;
}

} // namespace

NetZeroInputs asymptotic_inputs(const ReducedParams& rp, double e, double theta,
                                const ModelParams& params) {
    if (!(std::abs(rp.q) < 1.0)) throw ModelError("asymptotic_inputs: |q| must be < 1");
    if (!(rp.sigma > 0.0)) throw ModelError("asymptotic_inputs: sigma must be positive");
    const double one_m_q = 1.0 - rp.q;
    const double one_m_q2 = one_m_q * (1.0 + rp.q);

    NetZeroInputs in;
    in.mu1 = rp.gamma * params.r / one_m_q;
    in.mu2 = rp.alpha * rp.beta * params.r / one_m_q;
    const IncrementSecondMoments m =
        increment_moments(rp, e, theta, 1.0 / one_m_q2, 1.0 / one_m_q2);
    in.sigma1 = std::sqrt(m.var1);
    in.sigma2 = std::sqrt(m.var2);
    in.rho = m.cov / (in.sigma1 * in.sigma2);
    return in;
}

NetZeroInputs netzero_inputs_at(const ReducedParams& rp, double e, double theta,
                                const ModelParams& params, const StateHistory& history,
                                long long t) {
    if (t < 1) throw ModelError("netzero_inputs_at: t must be >= 1");
    if (!(rp.sigma > 0.0)) throw ModelError("netzero_inputs_at: sigma must be positive");
    const double d0 = history.physical_lag();

    NetZeroInputs in;
    in.mu1 = mean_physical_increment(rp, params.r, d0, t);
    in.mu2 = params.r - in.mu1 - rp.beta * mean_physical_increment(rp, params.r, d0, t - 1);
    const IncrementSecondMoments m =
        increment_moments(rp, e, theta, c_factor(rp.q, t), c_factor(rp.q, t - 1));
    in.sigma1 = std::sqrt(m.var1);
    in.sigma2 = std::sqrt(m.var2);
    if (!(in.sigma1 > 0.0) || !(in.sigma2 > 0.0))
        throw ModelError("netzero_inputs_at: degenerate increment variance at t = " +
                         std::to_string(t));
    in.rho = m.cov / (in.sigma1 * in.sigma2);
    return in;
}

double p_nz1(const NetZeroInputs& inputs) {
    require_valid(inputs, "p_nz1");
    return norm_cdf(-inputs.mu1 / inputs.sigma1);
}

double p_nz1_closed_form(const ReducedParams& rp, const ModelParams& params) {
    if (!(rp.sigma > 0.0)) throw ModelError("p_nz1_closed_form: sigma must be positive");
    const double ratio = (1.0 + rp.q) / (1.0 - rp.q);
    return norm_cdf(-rp.gamma * params.r / rp.sigma * std::sqrt(ratio));
}

double p_nz2(const NetZeroInputs& inputs) {
    require_valid(inputs, "p_nz2");
    if (!(std::abs(inputs.rho) < 1.0))
        throw ModelError("p_nz2: |rho| = 1, conditional distribution is degenerate");
    const double shrink = std::sqrt((1.0 - inputs.rho) * (1.0 + inputs.rho));
    return norm_cdf(-inputs.mu1 / (inputs.sigma1 * shrink));
}

double p_nz2_expanded(const NetZeroInputs& inputs) {
    require_valid(inputs, "p_nz2_expanded");
    const double cov = inputs.rho * inputs.sigma1 * inputs.sigma2;
    const double det = inputs.sigma1 * inputs.sigma1 * inputs.sigma2 * inputs.sigma2 - cov * cov;
    if (!(det > 0.0))
        throw ModelError("p_nz2_expanded: |rho| = 1, conditional distribution is degenerate");
    return norm_cdf(-inputs.mu1 * inputs.sigma2 / std::sqrt(det));
}

double p_nz3(const NetZeroInputs& inputs) {
    require_valid(inputs, "p_nz3");
    const double denom = norm_cdf(inputs.mu2 / inputs.sigma2);
    if (!(denom > 0.0)) throw ModelError("p_nz3: P(positive growth) is zero");
    const double a = -inputs.mu1 / inputs.sigma1;
    // P(X1 < 0) - P(X1 < 0, X2 <= 0), both in standardized coordinates.
    const double joint = norm_cdf(a) - norm_cdf2(a, -inputs.mu2 / inputs.sigma2, inputs.rho);
    return std::clamp(joint / denom, 0.0, 1.0);
}

std::string netzero_report_json(const NetZeroInputs& inputs, const std::string& meta_json) {
    nlohmann::json j;
    j["p_nz1"] = p_nz1(inputs);
    j["p_nz2"] = p_nz2(inputs);
    j["p_nz3"] = p_nz3(inputs);
    j["inputs"] = {{"mu1", inputs.mu1},
                   {"mu2", inputs.mu2},
                   {"sigma1", inputs.sigma1},
                   {"sigma2", inputs.sigma2},
                   {"rho", inputs.rho}};
    if (!meta_json.empty()) j["meta"] = nlohmann::json::parse(meta_json);
    return j.dump(2);
}

} // namespace cerm

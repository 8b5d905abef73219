#pragma once

#include "cerm/linalg.hpp"
#include "cerm/params.hpp"

#include <filesystem>
#include <vector>

namespace cerm {

// E[Y~_P^t - Y~_P^{t-1}], the arithmetico-geometric mean recursion in closed
// form (seeded by the history lag). Valid for t >= 0.
double mean_physical_increment(const ReducedParams& rp, double r, double physical_lag,
                               long long t);

// Closed-form expected cumulative factors (E[Y~_E^t], E[Y~_P^t], E[Y~_T^t]).
Vec3 expected_cumulatives(const ModelParams& params, const ReducedParams& rp,
                          const StateHistory& history, long long t);

// Covariance of the cumulative factor vector Y~^t, accumulated over the
// closed-form per-period terms in O(t).
Mat3 cumulative_covariance(const ReducedParams& rp, double e, double theta, long long t);

// Variance of log GDP growth since -t0: the (1,-1,-1) contraction, evaluated
// through an independent scalar accumulation (not by contracting
// cumulative_covariance, so the two routes cross-check each other).
double log_gdp_variance(const ReducedParams& rp, double e, double theta, long long t);

// s^2_t for every t in [1, t_max], O(t_max) total.
std::vector<double> log_gdp_variance_schedule(const ReducedParams& rp, double e, double theta,
                                              long long t_max);

struct GdpDistribution {
    long long t = 0;
    double mu_t = 0.0;
    double s2_t = 0.0;
    double median = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

GdpDistribution gdp_distribution(const ModelParams& params, const ReducedParams& rp,
                                 const StateHistory& history, long long t);

struct AsymptoticRates {
    double r_mu_inf = 0.0;  // median log-growth rate
    double mu_h = 0.0;      // intercept of mu^t - r t, validated numerically
    double mu_h_alt = 0.0;  // alternative closed-form intercept, kept for comparison
    double mu_h_gap = 0.0;  // mu_h_alt - mu_h (zero when beta = 0)
    double r_s2_inf = 0.0;  // variance growth rate
    double s2_h = 0.0;      // variance intercept, numerically extracted (no closed form)

    // log-scale growth rates of the three GDP statistics
    double log_median_rate = 0.0;
    double log_mean_rate = 0.0;
    double log_variance_rate = 0.0;
};

AsymptoticRates asymptotic_rates(const ModelParams& params, const ReducedParams& rp,
                                 const StateHistory& history);

// Fan chart CSV: t, median, mean, variance, q05, q95 using the log-normal
// quantile function.
void write_fan_chart_csv(const ModelParams& params, const ReducedParams& rp,
                         const StateHistory& history, long long t_max,
                         const std::filesystem::path& path, const std::string& meta_comment = {});

} // namespace cerm

#pragma once

#include "cerm/linalg.hpp"
#include "cerm/params.hpp"

#include <filesystem>
#include <vector>

namespace cerm {

// Helper sums over the AR coefficient q. Both use the analytic ratio away
// from q ~ 1 and fall back to explicit summation inside |1-q| <= 1e-8 to
// dodge cancellation (the singularity itself is unreachable for valid q).
double geometric_sum(double x, long long n); // sum_{k=0}^{n-1} x^k

// c_t = sum_{k=0}^{t-1} q^{2k}, c_0 = 0.
double c_factor(double q, long long t);

// b_k = sum_{i=0}^{k-1} q^i, b_0 = 0.
double b_factor(double q, long long k);

// Innovation covariance V of the centered one-step system.
Mat3 innovation_covariance(const ReducedParams& rp, double e, double theta);

// Covariance of the risk-factor triple Y^t, t >= 1, in closed form.
Mat3 risk_covariance(const ReducedParams& rp, double e, double theta, long long t);

// Per-period macro-correlations (xi_E, xi_P, xi_T) at horizon t >= 1.
Vec3 macro_correlations(const ReducedParams& rp, double e, double theta, long long t);

// Correlation matrix C_t of (Y_E, -Y_P, -Y_T). Throws ModelError when any
// factor variance is degenerate at this horizon.
Mat3 correlation_matrix(const ReducedParams& rp, double e, double theta, long long t);

struct AsymptoticMoments {
    Vec3 xi_inf{};
    Mat3 corr_inf{};
    double c_const = 0.0; // beta^2 + theta^2 (1-q^2) / sigma^2
};

AsymptoticMoments asymptotic_moments(const ReducedParams& rp, double e, double theta);

// Cov[Y^{t+tau}, Y^t]; entry (i, j) couples factor i at t+tau with factor j
// at t. The economic row is identically zero.
Mat3 auto_covariance(const ReducedParams& rp, double e, double theta, long long t, long long tau);

// Entry-wise normalized version: Cov[Y_i^{t+tau}, Y_j^t] / (xi_i^{t+tau} xi_j^t).
Mat3 auto_correlation(const ReducedParams& rp, double e, double theta, long long t, long long tau);

// Large-t limit of auto_correlation at fixed tau.
Mat3 auto_correlation_limit(const ReducedParams& rp, double e, double theta, long long tau);

struct MomentSchedule {
    std::vector<long long> horizons;
    std::vector<Vec3> xi;
    std::vector<Mat3> corr;
};

MomentSchedule compute_moment_schedule(const ReducedParams& rp, double e, double theta,
                                       long long t_max);

// CSV round-trip: one row per horizon, columns
// t, xi_E, xi_P, xi_T, c_EP, c_PT, c_ET (c_ET always 0, kept for audit).
void write_moment_schedule_csv(const MomentSchedule& schedule, const std::filesystem::path& path,
                               const std::string& meta_comment = {});
MomentSchedule read_moment_schedule_csv(const std::filesystem::path& path);

} // namespace cerm

#pragma once

#include "cerm/linalg.hpp"
#include "cerm/params.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cerm {

enum class SimMode { centered, full };

struct SimConfig {
    std::uint64_t n_paths = 1;
    long long horizon = 1;
    std::uint64_t seed = 0;
    SimMode mode = SimMode::centered;

    // Full per-path storage is opt-in; the default is streaming accumulation
    // at the snapshot times below (empty = horizon only).
    bool store_paths = false;
    std::vector<long long> snapshots;

    // Keep the per-path log-growth scalar at each snapshot (quantile tests).
    bool collect_log_growth = false;

    // Keep the per-path one-step increments (dY_P, growth) at each snapshot
    // (kernel-conditioning estimates).
    bool collect_increments = false;

    // 0 = CERM_THREADS environment variable, which itself defaults to the
    // hardware count. Results are independent of the worker count.
    int threads = 0;
};

// Streaming statistics gathered at one snapshot time.
//
// centered mode: mean/cov describe the risk-factor triple Y^t; lag1_cov is
// E[Y^t (Y^{t-1})^T] - mu mu^T, i.e. Cov[Y^t, Y^{t-1}].
// full mode: mean/cov describe the cumulative levels Y~^t; growth_* describe
// the scalar Y~_E - Y~_P - Y~_T; increment_* describe the one-step physical
// increment dP and growth increment g at step t.
struct SnapshotStats {
    long long t = 0;
    std::uint64_t n = 0;

    Vec3 mean{};
    Vec3 mean_se{};
    Mat3 cov{};
    Mat3 cov_se{};
    Mat3 lag1_cov{};
    Mat3 lag1_cov_se{};

    double growth_mean = 0.0, growth_mean_se = 0.0;
    double growth_var = 0.0, growth_var_se = 0.0;

    double increment_dyp_mean = 0.0, increment_dyp_var = 0.0;
    double increment_g_mean = 0.0, increment_g_var = 0.0;
    double increment_dyp_g_cov = 0.0;

    double frac_dyp_neg = 0.0, frac_dyp_neg_se = 0.0;
    double frac_g_pos = 0.0, frac_g_pos_se = 0.0;
    double frac_nz_given_g_pos = 0.0, frac_nz_given_g_pos_se = 0.0;

    std::vector<double> log_growth;      // filled only when requested
    std::vector<double> increment_dyp;   // filled only when requested
    std::vector<double> increment_g;     // filled only when requested
};

struct PathEnsemble {
    SimConfig config;
    // Stored mode: (path-major, time 0..horizon, factor E/P/T) flat array.
    std::vector<double> paths;
    std::vector<SnapshotStats> stats;

    double value(std::uint64_t path, long long t, int factor) const;
    const SnapshotStats& stats_at(long long t) const;
};

// Simulates the centered risk-factor system; deterministic given the seed.
PathEnsemble simulate_centered(const ReducedParams& rp, double e, double theta,
                               const SimConfig& config);

// Simulates cumulative factors from the known state, advancing the economic
// and transition equations first and solving the implicit physical equation
// linearly (exactly the substitution that yields the centered system).
PathEnsemble simulate_full(const ModelParams& params, const StateHistory& history,
                           const SimConfig& config);

struct EmpiricalMoments {
    std::uint64_t n = 0;
    Vec3 mean{};
    Vec3 mean_se{};
    Mat3 cov{};
    Mat3 cov_se{};
};

// Unbiased sample moments at time t. Stored ensembles are reduced in two
// passes with standard errors from the sample fourth central moments;
// streaming ensembles return the snapshot statistics.
EmpiricalMoments empirical_moments(const PathEnsemble& ensemble, long long t);

// Raw binary dump: 16-byte header (magic 'CERM', version, n_paths, horizon as
// little-endian u32) followed by little-endian f64 in (path, time, factor)
// order. Only valid for stored ensembles.
void write_path_dump(const PathEnsemble& ensemble, const std::filesystem::path& path);
PathEnsemble read_path_dump(const std::filesystem::path& path);

// Per-snapshot summary CSV (see README for the column list).
void write_ensemble_summary_csv(const PathEnsemble& ensemble, const std::filesystem::path& path,
                                const std::string& meta_comment = {});

} // namespace cerm

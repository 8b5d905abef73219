#pragma once

#include "cerm/analytics.hpp"
#include "cerm/linalg.hpp"
#include "cerm/params.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cerm {

// Row-stochastic one-year migration matrix; the last rating is default.
struct MigrationMatrix {
    std::vector<std::string> ratings;
    std::vector<double> p; // row-major K x K

    int size() const { return static_cast<int>(ratings.size()); }
    double at(int i, int j) const { return p[static_cast<std::size_t>(i * size() + j)]; }
    double& at(int i, int j) { return p[static_cast<std::size_t>(i * size() + j)]; }

    ValidationReport validate(double tol = 1e-12) const;
};

// Rating thresholds per row; z(i,0) = +inf and the implicit z(i,K) = -inf.
// Zero or unit tail sums become explicit +-inf sentinels, which survive the
// per-period scaling (x / sqrt(normalizer) keeps the sign).
struct ThresholdSet {
    int K = 0;
    std::vector<double> z;

    double at(int i, int j) const { return z[static_cast<std::size_t>(i * K + j)]; }
    double& at(int i, int j) { return z[static_cast<std::size_t>(i * K + j)]; }
};

// z_ij = Phi^-1(sum_{j' >= j} M_ij') per row.
ThresholdSet regulatory_thresholds(const MigrationMatrix& m_reg);

// Rebuilds a migration matrix from thresholds, dividing each row's
// thresholds by row_scale[i] (1.0 recovers the regulatory matrix).
MigrationMatrix migration_from_thresholds(const ThresholdSet& thresholds,
                                          const std::vector<double>& row_scale,
                                          const std::vector<std::string>& ratings);

// Basel II IRB corporate asset correlation (no maturity adjustment); the
// regulator's R(pd) function, output in [0.12, 0.24].
double basel_irb_correlation(double pd);

using CorrelationFn = std::function<double(double)>;

// Per-(group, rating) loading state at time 1.
struct LoadingProfile {
    std::string group;
    std::string rating;
    Vec3 alpha_micro{1.0, 1.0, 1.0}; // micro-correlation adjustments (default 1: pure macro)
    Vec3 a_tilde_1{};                // alpha_micro * xi_1
    Vec3 a1{};                       // normalized initial loading
    double r_reg = 0.0;              // regulator correlation; equals a1 . C1 a1 by construction
};

// a1 = sqrt(r_reg) * a~ / sqrt(a~ . C1 a~) with a~ = alpha_micro * xi_1.
Vec3 initial_loading(const Vec3& alpha_micro, const Vec3& xi_1, const Mat3& c_1, double r_reg);

LoadingProfile make_loading_profile(std::string group, std::string rating,
                                    const Vec3& alpha_micro, const Vec3& xi_1, const Mat3& c_1,
                                    double r_reg);

struct PeriodLoadings {
    Vec3 c_t{};              // drift-adjusted loadings
    Vec3 a_t{};              // normalized loadings
    double r_t = 0.0;        // systematic variance share
    double normalizer = 0.0; // 1 + c . C_t c - a1 . C1 a1
};

// c_t, R_t and a_t at period t for one profile. Rejects a nonpositive
// normalizer (inconsistent calibration).
PeriodLoadings period_loadings(const LoadingProfile& profile, const Vec3& alpha_micro_t,
                               const Vec3& xi_t, const Mat3& c_t);

// Conditions every row of the regulatory matrix by scaling its thresholds
// with sqrt(row_normalizer).
MigrationMatrix conditioned_migration(const MigrationMatrix& m_reg,
                                      const ThresholdSet& thresholds,
                                      const std::vector<double>& row_normalizers);

// Residuals of the two loading identities:
//   scale_residual   = sqrt(normalizer) - sqrt((1 - R_reg) / (1 - R_t))
//   loading_residual = a_t . C_t a_t - R_t
struct VarianceCheck {
    double scale_residual = 0.0;
    double loading_residual = 0.0;
};

VarianceCheck normalized_asset_variance_check(const LoadingProfile& profile,
                                              const Vec3& alpha_micro_t, const Vec3& xi_t,
                                              const Mat3& c_t);

// Portfolio file: one CSV row per (group, rating) holding that rating's
// regulatory migration row, plus optional alpha_E/alpha_P/alpha_T columns.
struct PortfolioEntry {
    std::string group;
    std::string rating;
    std::vector<double> migration_row;
    Vec3 alpha_micro{1.0, 1.0, 1.0};
};

struct Portfolio {
    std::vector<PortfolioEntry> entries;

    std::vector<std::string> groups() const;
    MigrationMatrix matrix_for(const std::string& group) const;
};

Portfolio load_portfolio_csv(const std::filesystem::path& path);

// Long-format per-period micro-correlations: one row per (group, rating, t)
// overrides the portfolio's constant alpha_micro at that period.
struct MicroSchedule {
    struct Key {
        std::string group;
        std::string rating;
        long long t;
        bool operator==(const Key&) const = default;
    };
    std::vector<Key> keys;
    std::vector<Vec3> values;

    const Vec3* find(const std::string& group, const std::string& rating, long long t) const;
};

MicroSchedule load_micro_schedule_csv(const std::filesystem::path& path);

struct GroupMigrationSchedule {
    std::string group;
    std::vector<long long> horizons;
    std::vector<MigrationMatrix> matrices;
};

// Full adapter pipeline: thresholds, loadings and conditioned matrices for
// every group over the schedule's horizons.
std::vector<GroupMigrationSchedule> migrate_portfolio(const Portfolio& portfolio,
                                                      const MomentSchedule& schedule,
                                                      const CorrelationFn& correlation = {},
                                                      const MicroSchedule* micro = nullptr);

// Long-format tensor CSV: t, group, rating_from, rating_to, probability.
void write_migration_tensor_csv(const std::vector<GroupMigrationSchedule>& schedules,
                                const std::filesystem::path& path,
                                const std::string& meta_comment = {});

} // namespace cerm

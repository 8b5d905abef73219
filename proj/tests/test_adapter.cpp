#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cerm/adapter.hpp"
#include "cerm/analytics.hpp"
#include "cerm/errors.hpp"
#include "cerm/gaussian.hpp"

#include "oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace cerm;

namespace {

ModelParams canonical() {
    ModelParams p;
    p.r = 0.02;
    p.e = 0.02;
    p.p_tilde = 0.01;
    p.theta = 0.005;
    p.alpha_tilde = 0.10;
    p.beta = 0.5;
    p.gamma_tilde = 0.02;
    return p;
}

MigrationMatrix three_state() {
    MigrationMatrix m;
    m.ratings = {"A", "B", "D"};
    m.p = {0.90, 0.08, 0.02, //
           0.10, 0.80, 0.10, //
           0.00, 0.00, 1.00};
    return m;
}

MomentSchedule canonical_schedule(long long t_max) {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    return compute_moment_schedule(rp, p.e, p.theta, t_max);
}

double max_abs_diff_migration(const MigrationMatrix& a, const MigrationMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) d = std::max(d, std::abs(a.p[i] - b.p[i]));
    return d;
}

} // namespace

TEST_CASE("regulatory thresholds: quantiles and sentinels") {
    MigrationMatrix m;
    m.ratings = {"G", "D"};
    m.p = {0.9, 0.1, 0.0, 1.0};
    const ThresholdSet z = regulatory_thresholds(m);
    CHECK(std::isinf(z.at(0, 0)));
    CHECK(z.at(0, 0) > 0.0);
    CHECK(z.at(0, 1) == doctest::Approx(norm_quantile(0.1)).epsilon(1e-15));
    // absorbing default row: tail sum 1 -> +inf sentinel
    CHECK(std::isinf(z.at(1, 1)));
    CHECK(z.at(1, 1) > 0.0);

    // identity-like row with zero default probability -> -inf sentinel
    MigrationMatrix id;
    id.ratings = {"A", "B", "D"};
    id.p = {1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0};
    const ThresholdSet zi = regulatory_thresholds(id);
    CHECK(std::isinf(zi.at(0, 2)));
    CHECK(zi.at(0, 2) < 0.0);
    CHECK(std::isinf(zi.at(1, 2)));
    CHECK(zi.at(1, 2) < 0.0);
}

TEST_CASE("threshold round-trip reproduces the matrix") {
    const MigrationMatrix m = three_state();
    const ThresholdSet z = regulatory_thresholds(m);
    const MigrationMatrix back =
        migration_from_thresholds(z, {1.0, 1.0, 1.0}, m.ratings);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(back.at(i, j) - m.at(i, j)) < 1e-10);
    // sentinel cells reproduce exact 0/1 probabilities
    CHECK(back.at(2, 2) == 1.0);
    CHECK(back.at(2, 0) == 0.0);
}

TEST_CASE("regulator correlation formula") {
    CHECK(basel_irb_correlation(1e-12) == doctest::Approx(0.24).epsilon(1e-9));
    CHECK(basel_irb_correlation(1.0 - 1e-12) == doctest::Approx(0.12).epsilon(1e-9));
    // frozen from an independent evaluation at pd = 0.01
    CHECK(basel_irb_correlation(0.01) == doctest::Approx(0.192783679165516).epsilon(1e-12));
    CHECK_THROWS_AS(basel_irb_correlation(0.0), ModelError);
    CHECK_THROWS_AS(basel_irb_correlation(1.0), ModelError);

    // decreasing in pd, bounded by the asymptotic weights
    double prev = 0.25;
    for (double pd = 0.001; pd < 1.0; pd += 0.02) {
        const double r = basel_irb_correlation(pd);
        CHECK(r <= prev);
        CHECK(r >= 0.12);
        CHECK(r <= 0.24);
        prev = r;
    }
}

TEST_CASE("initial loading normalization") {
    const MomentSchedule sched = canonical_schedule(1);
    const Vec3 xi1 = sched.xi.front();
    const Mat3 c1 = sched.corr.front();

    const double r_reg = 0.18;
    const Vec3 ones{1.0, 1.0, 1.0};
    const Vec3 a1 = initial_loading(ones, xi1, c1, r_reg);
    CHECK(quad_form(a1, c1) == doctest::Approx(r_reg).epsilon(1e-12));

    // closed form for alpha_micro = 1: a1 = sqrt(r_reg) xi / sqrt(xi.C1 xi)
    const double qf = quad_form(xi1, c1);
    for (int i = 0; i < 3; ++i)
        CHECK(a1[static_cast<std::size_t>(i)] ==
              doctest::Approx(std::sqrt(r_reg / qf) * xi1[static_cast<std::size_t>(i)])
                  .epsilon(1e-13));

    // scaling alpha_micro cancels
    const Vec3 scaled_alpha{3.7, 3.7, 3.7};
    const Vec3 a1s = initial_loading(scaled_alpha, xi1, c1, r_reg);
    for (int i = 0; i < 3; ++i)
        CHECK(a1s[static_cast<std::size_t>(i)] ==
              doctest::Approx(a1[static_cast<std::size_t>(i)]).epsilon(1e-13));

    CHECK_THROWS_AS(initial_loading(Vec3{0.0, 0.0, 0.0}, xi1, c1, r_reg), ModelError);
}

TEST_CASE("period loadings at t = 1 recover the regulatory state") {
    const MomentSchedule sched = canonical_schedule(1);
    const LoadingProfile profile = make_loading_profile(
        "g", "A", Vec3{1.0, 1.2, 0.8}, sched.xi.front(), sched.corr.front(), 0.2);
    const PeriodLoadings pl =
        period_loadings(profile, profile.alpha_micro, sched.xi.front(), sched.corr.front());
    CHECK(pl.normalizer == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pl.r_t == doctest::Approx(0.2).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
        CHECK(pl.c_t[static_cast<std::size_t>(i)] ==
              doctest::Approx(profile.a1[static_cast<std::size_t>(i)]).epsilon(1e-12));
        CHECK(pl.a_t[static_cast<std::size_t>(i)] ==
              doctest::Approx(profile.a1[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("proof identities hold over the schedule and random profiles") {
    const MomentSchedule sched = canonical_schedule(40);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> micro(-1.5, 2.0);
    std::uniform_real_distribution<double> rr(0.05, 0.5);
    for (int trial = 0; trial < 60; ++trial) {
        const Vec3 alpha{micro(rng), micro(rng), micro(rng)};
        const double r_reg = rr(rng);
        LoadingProfile profile;
        try {
            profile = make_loading_profile("g", "X", alpha, sched.xi.front(),
                                           sched.corr.front(), r_reg);
        } catch (const ModelError&) {
            continue; // degenerate alpha draw
        }
        for (std::size_t k = 0; k < sched.horizons.size(); k += 7) {
            const VarianceCheck chk = normalized_asset_variance_check(
                profile, alpha, sched.xi[k], sched.corr[k]);
            CHECK(std::abs(chk.scale_residual) < 1e-10);
            CHECK(std::abs(chk.loading_residual) < 1e-12);
            const PeriodLoadings pl =
                period_loadings(profile, alpha, sched.xi[k], sched.corr[k]);
            CHECK(pl.r_t >= 0.0);
            CHECK(pl.r_t < 1.0);
        }
    }
}

TEST_CASE("R_t grows with the climate macro-correlations on the canonical schedule") {
    const MomentSchedule sched = canonical_schedule(60);
    const LoadingProfile profile = make_loading_profile(
        "g", "A", Vec3{1.0, 1.0, 1.0}, sched.xi.front(), sched.corr.front(), 0.2);
    double prev = 0.0;
    for (std::size_t k = 0; k < sched.horizons.size(); ++k) {
        const PeriodLoadings pl =
            period_loadings(profile, profile.alpha_micro, sched.xi[k], sched.corr[k]);
        CHECK(pl.r_t >= prev - 1e-12);
        prev = pl.r_t;
    }
}

TEST_CASE("conditioned migration: identity at t = 1 and drift afterwards") {
    const MomentSchedule sched = canonical_schedule(30);
    const MigrationMatrix m = three_state();

    Portfolio pf;
    for (int i = 0; i < 3; ++i) {
        PortfolioEntry e;
        e.group = "core";
        e.rating = m.ratings[static_cast<std::size_t>(i)];
        e.migration_row = {m.at(i, 0), m.at(i, 1), m.at(i, 2)};
        pf.entries.push_back(e);
    }
    // absorbing default row has pd = 1; give it a usable pd for the
    // regulator formula instead
    pf.entries[2].migration_row = {0.02, 0.03, 0.95};

    const auto schedules = migrate_portfolio(pf, sched);
    REQUIRE(schedules.size() == 1);
    const auto& gs = schedules.front();
    REQUIRE(gs.horizons.front() == 1);

    const MigrationMatrix m_reg = pf.matrix_for("core");
    CHECK(max_abs_diff_migration(gs.matrices.front(), m_reg) < 1e-10);

    for (const auto& mt : gs.matrices) {
        const auto rep = mt.validate();
        CHECK(rep.ok());
        for (int i = 0; i < mt.size(); ++i) {
            double row = 0.0;
            for (int j = 0; j < mt.size(); ++j) row += mt.at(i, j);
            CHECK(std::abs(row - 1.0) < 1e-12);
        }
    }

    // growing systematic variance raises default probabilities for rows with
    // negative default thresholds
    const MigrationMatrix& last = gs.matrices.back();
    CHECK(last.at(0, 2) >= m_reg.at(0, 2) - 1e-14);
    CHECK(last.at(1, 2) >= m_reg.at(1, 2) - 1e-14);
}

TEST_CASE("micro-correlation scale invariance of the conditioned matrices") {
    const MomentSchedule sched = canonical_schedule(12);
    MigrationMatrix m = three_state();
    m.p = {0.90, 0.08, 0.02, //
           0.10, 0.80, 0.10, //
           0.02, 0.03, 0.95};

    auto build = [&](double scale) {
        Portfolio pf;
        for (int i = 0; i < 3; ++i) {
            PortfolioEntry e;
            e.group = "core";
            e.rating = m.ratings[static_cast<std::size_t>(i)];
            e.migration_row = {m.at(i, 0), m.at(i, 1), m.at(i, 2)};
            e.alpha_micro = Vec3{0.9 * scale, 1.1 * scale, 1.4 * scale};
            pf.entries.push_back(e);
        }
        return migrate_portfolio(pf, sched);
    };
    const auto base = build(1.0);
    const auto scaled_up = build(4.25);
    for (std::size_t k = 0; k < base.front().matrices.size(); ++k)
        CHECK(max_abs_diff_migration(base.front().matrices[k], scaled_up.front().matrices[k]) <
              1e-12);
}

TEST_CASE("Monte Carlo asset-value binning reproduces the conditioned matrix") {
    const MomentSchedule sched = canonical_schedule(10);
    MigrationMatrix m = three_state();
    m.p = {0.90, 0.08, 0.02, //
           0.10, 0.80, 0.10, //
           0.02, 0.03, 0.95};

    Portfolio pf;
    for (int i = 0; i < 3; ++i) {
        PortfolioEntry e;
        e.group = "core";
        e.rating = m.ratings[static_cast<std::size_t>(i)];
        e.migration_row = {m.at(i, 0), m.at(i, 1), m.at(i, 2)};
        pf.entries.push_back(e);
    }
    const auto schedules = migrate_portfolio(pf, sched);
    const long long t = 10;
    const MigrationMatrix& expected = schedules.front().matrices.back();

    // rebuild the loading state for row 0 exactly as the pipeline does
    const MigrationMatrix m_reg = pf.matrix_for("core");
    const ThresholdSet z = regulatory_thresholds(m_reg);
    const double r_reg = basel_irb_correlation(m_reg.at(0, 2));
    const LoadingProfile profile = make_loading_profile(
        "core", "A", Vec3{1.0, 1.0, 1.0}, sched.xi.front(), sched.corr.front(), r_reg);
    const PeriodLoadings pl = period_loadings(
        profile, profile.alpha_micro, sched.xi[static_cast<std::size_t>(t - 1)],
        sched.corr[static_cast<std::size_t>(t - 1)]);

    // simulate X = c . Z_t + sqrt(1 - R_reg) eps and bin by the regulatory
    // thresholds of row 0
    const Mat3 chol = oracle::cholesky3(sched.corr[static_cast<std::size_t>(t - 1)]);
    const double idio = std::sqrt(1.0 - r_reg);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto gauss = [&] { return norm_quantile(u01(rng)); };

    const int n = 1000000;
    std::array<long long, 3> counts{0, 0, 0};
    for (int k = 0; k < n; ++k) {
        const Vec3 g{gauss(), gauss(), gauss()};
        const Vec3 zt = chol * g;
        const double x = dot(pl.c_t, zt) + idio * gauss();
        int bucket = 0;
        // z(0,j) are decreasing; falling below z(0,j) moves past rating j-1
        if (x < z.at(0, 2))
            bucket = 2;
        else if (x < z.at(0, 1))
            bucket = 1;
        counts[static_cast<std::size_t>(bucket)] += 1;
    }
    for (int j = 0; j < 3; ++j) {
        const double phat =
            static_cast<double>(counts[static_cast<std::size_t>(j)]) / n;
        const double pexp = expected.at(0, j);
        const double se = std::sqrt(pexp * (1.0 - pexp) / n);
        CHECK(std::abs(phat - pexp) < 4.0 * se);
    }
}

TEST_CASE("portfolio CSV loading") {
    const auto path = std::filesystem::temp_directory_path() / "cerm_portfolio_test.csv";
    {
        std::ofstream out(path);
        out << "group,rating,m1,m2,m3,alpha_E,alpha_P,alpha_T\n";
        out << "core,A,0.90,0.08,0.02,1.0,1.1,0.9\n";
        out << "core,B,0.10,0.80,0.10,1.0,1.0,1.0\n";
        out << "core,D,0.02,0.03,0.95,1.0,1.0,1.0\n";
    }
    const Portfolio pf = load_portfolio_csv(path);
    REQUIRE(pf.entries.size() == 3);
    CHECK(pf.groups() == std::vector<std::string>{"core"});
    CHECK(pf.entries[0].alpha_micro[kP] == 1.1);
    const MigrationMatrix m = pf.matrix_for("core");
    CHECK(m.size() == 3);
    CHECK(m.at(0, 0) == 0.90);
    CHECK_THROWS_AS(pf.matrix_for("missing"), DataError);
    std::filesystem::remove(path);
}

TEST_CASE("long-format micro-correlation schedule overrides periods") {
    const MomentSchedule sched = canonical_schedule(4);
    MigrationMatrix m = three_state();
    m.p = {0.90, 0.08, 0.02, //
           0.10, 0.80, 0.10, //
           0.02, 0.03, 0.95};
    Portfolio pf;
    for (int i = 0; i < 3; ++i) {
        PortfolioEntry e;
        e.group = "core";
        e.rating = m.ratings[static_cast<std::size_t>(i)];
        e.migration_row = {m.at(i, 0), m.at(i, 1), m.at(i, 2)};
        pf.entries.push_back(e);
    }

    const auto path = std::filesystem::temp_directory_path() / "cerm_micro_test.csv";
    {
        std::ofstream out(path);
        out << "group,rating,t,alpha_E,alpha_P,alpha_T\n";
        out << "core,A,3,1.0,2.5,1.0\n"; // boost the physical loading at t = 3 only
    }
    const MicroSchedule micro = load_micro_schedule_csv(path);
    REQUIRE(micro.find("core", "A", 3) != nullptr);
    CHECK(micro.find("core", "A", 2) == nullptr);

    const auto plain = migrate_portfolio(pf, sched);
    const auto overridden = migrate_portfolio(pf, sched, {}, &micro);
    // untouched periods and rows agree
    CHECK(max_abs_diff_migration(plain.front().matrices[1], overridden.front().matrices[1]) ==
          0.0);
    for (int j = 0; j < 3; ++j)
        CHECK(plain.front().matrices[2].at(1, j) == overridden.front().matrices[2].at(1, j));
    // the overridden (row, period) cell moves
    double diff = 0.0;
    for (int j = 0; j < 3; ++j)
        diff = std::max(diff, std::abs(plain.front().matrices[2].at(0, j) -
                                       overridden.front().matrices[2].at(0, j)));
    CHECK(diff > 1e-9);
    std::filesystem::remove(path);
}

TEST_CASE("nonpositive normalizer and bad rows are rejected") {
    const MomentSchedule sched = canonical_schedule(2);
    MigrationMatrix bad = three_state();
    bad.p[0] = 0.5; // row no longer sums to one
    CHECK_FALSE(bad.validate().ok());
    CHECK_THROWS_AS(regulatory_thresholds(bad), DataError);

    CHECK_THROWS_AS(conditioned_migration(three_state(), regulatory_thresholds(three_state()),
                                          {1.0, -0.5, 1.0}),
                    ModelError);
}

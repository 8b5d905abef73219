#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cerm/errors.hpp"
#include "cerm/gaussian.hpp"
#include "cerm/netzero.hpp"
#include "cerm/simulator.hpp"

#include "oracles.hpp"

#include <json.hpp>

#include <cmath>
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

} // namespace

TEST_CASE("asymptotic inputs closed-form identities") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    const NetZeroInputs in = asymptotic_inputs(rp, p.e, p.theta, p);

    CHECK(in.mu1 == doctest::Approx(rp.gamma * p.r / (1.0 - rp.q)).epsilon(1e-14));
    CHECK(in.sigma1 * in.sigma1 ==
          doctest::Approx(rp.sigma * rp.sigma / (1.0 - rp.q * rp.q)).epsilon(1e-14));
    CHECK(in.mu2 == doctest::Approx(rp.alpha * rp.beta * p.r / (1.0 - rp.q)).epsilon(1e-14));
    CHECK(std::abs(in.rho) <= 1.0);
    CHECK(in.sigma2 > 0.0);

    // gamma = 0: no climate drag on the physical increment mean
    ReducedParams rp0 = rp;
    rp0.gamma = 0.0;
    CHECK(asymptotic_inputs(rp0, p.e, p.theta, p).mu1 == 0.0);

    ReducedParams degenerate = rp;
    degenerate.sigma = 0.0;
    CHECK_THROWS_AS(asymptotic_inputs(degenerate, p.e, p.theta, p), ModelError);
}

TEST_CASE("finite-horizon inputs converge to the asymptotic ones") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    StateHistory h;
    h.y_p0 = 0.05;
    h.y_p_minus1 = 0.03;
    const NetZeroInputs limit = asymptotic_inputs(rp, p.e, p.theta, p);
    const NetZeroInputs at = netzero_inputs_at(rp, p.e, p.theta, p, h, 10000);
    CHECK(std::abs(at.mu1 - limit.mu1) < 1e-8);
    CHECK(std::abs(at.mu2 - limit.mu2) < 1e-8);
    CHECK(std::abs(at.sigma1 - limit.sigma1) < 1e-8);
    CHECK(std::abs(at.sigma2 - limit.sigma2) < 1e-8);
    CHECK(std::abs(at.rho - limit.rho) < 1e-8);
}

TEST_CASE("finite-horizon increment moments match Monte Carlo within 4 SE") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    StateHistory h;
    h.y_p0 = 0.04;
    h.y_p_minus1 = 0.0; // strong lag so the mean recursion matters
    const long long t = 25;
    const NetZeroInputs in = netzero_inputs_at(rp, p.e, p.theta, p, h, t);

    SimConfig cfg;
    cfg.n_paths = 250000;
    cfg.horizon = t;
    cfg.seed = 1234;
    cfg.mode = SimMode::full;
    cfg.snapshots = {t};
    const PathEnsemble ens = simulate_full(p, h, cfg);
    const SnapshotStats& s = ens.stats_at(t);

    const double n = static_cast<double>(s.n);
    CHECK(std::abs(s.increment_dyp_mean - in.mu1) <
          4.0 * std::sqrt(s.increment_dyp_var / n));
    CHECK(std::abs(s.increment_g_mean - in.mu2) < 4.0 * std::sqrt(s.increment_g_var / n));
    // variance of a Gaussian sample variance is 2 sigma^4 / (n-1)
    CHECK(std::abs(s.increment_dyp_var - in.sigma1 * in.sigma1) <
          4.0 * in.sigma1 * in.sigma1 * std::sqrt(2.0 / (n - 1.0)));
    CHECK(std::abs(s.increment_g_var - in.sigma2 * in.sigma2) <
          4.0 * in.sigma2 * in.sigma2 * std::sqrt(2.0 / (n - 1.0)));
    const double emp_rho =
        s.increment_dyp_g_cov / std::sqrt(s.increment_dyp_var * s.increment_g_var);
    // Fisher z standard error for a correlation estimate
    CHECK(std::abs(emp_rho - in.rho) < 4.0 * (1.0 - in.rho * in.rho) / std::sqrt(n - 3.0));
    CHECK(in.rho < 0.0); // physical damage moves against growth
}

TEST_CASE("p_nz1 closed forms agree and behave") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    const NetZeroInputs in = asymptotic_inputs(rp, p.e, p.theta, p);

    CHECK(std::abs(p_nz1(in) - p_nz1_closed_form(rp, p)) < 1e-12);
    CHECK(p_nz1(in) > 0.0);
    CHECK(p_nz1(in) < 0.5); // positive mu1 keeps the unconditional odds below half

    // R = 0: exactly one half
    ModelParams p0 = p;
    p0.r = 0.0;
    const ReducedParams rp0 = reduce(p0);
    CHECK(p_nz1(asymptotic_inputs(rp0, p0.e, p0.theta, p0)) == doctest::Approx(0.5).epsilon(1e-15));

    // nondecreasing in the transition efficiency
    double prev = -1.0;
    for (double alpha = 0.02; alpha <= 0.4; alpha += 0.02) {
        ModelParams pa = p;
        pa.alpha_tilde = alpha;
        const ReducedParams rpa = reduce(pa);
        const double v = p_nz1(asymptotic_inputs(rpa, pa.e, pa.theta, pa));
        CHECK(v >= prev);
        prev = v;
    }

    // nonincreasing in the climate-free growth R
    prev = 2.0;
    for (double r = 0.0; r <= 0.08; r += 0.005) {
        ModelParams pr = p;
        pr.r = r;
        const ReducedParams rpr = reduce(pr);
        const double v = p_nz1(asymptotic_inputs(rpr, pr.e, pr.theta, pr));
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("p_nz2 conditional form") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    NetZeroInputs in = asymptotic_inputs(rp, p.e, p.theta, p);

    // rho = 0: conditioning changes nothing
    NetZeroInputs indep = in;
    indep.rho = 0.0;
    CHECK(p_nz2(indep) == doctest::Approx(p_nz1(indep)).epsilon(1e-15));

    // mu1 = 0: exactly one half
    NetZeroInputs centered = in;
    centered.mu1 = 0.0;
    CHECK(p_nz2(centered) == doctest::Approx(0.5).epsilon(1e-15));

    // dual algebraic route
    CHECK(std::abs(p_nz2(in) - p_nz2_expanded(in)) < 1e-10);

    NetZeroInputs degenerate = in;
    degenerate.rho = 1.0;
    CHECK_THROWS_AS(p_nz2(degenerate), ModelError);
}

TEST_CASE("p_nz3 limits and quadrature cross-check") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    const NetZeroInputs in = asymptotic_inputs(rp, p.e, p.theta, p);

    CHECK(p_nz3(in) >= 0.0);
    CHECK(p_nz3(in) <= 1.0);
    // negative correlation: conditioning on growth raises the odds
    CHECK(p_nz3(in) > p_nz1(in));

    // rho = 0 reduces to the unconditional probability
    NetZeroInputs indep = in;
    indep.rho = 0.0;
    CHECK(p_nz3(indep) == doctest::Approx(p_nz1(indep)).epsilon(1e-12));

    // almost-sure conditioning is vacuous
    NetZeroInputs sure = in;
    sure.mu2 = 50.0 * sure.sigma2;
    CHECK(p_nz3(sure) == doctest::Approx(p_nz1(sure)).epsilon(1e-12));

    // joint-orthant identity against the 2-D quadrature oracle
    const double a = -in.mu1 / in.sigma1;
    const double b = -in.mu2 / in.sigma2;
    const double joint = norm_cdf(a) - norm_cdf2(a, b, in.rho);
    double quad = 0.0;
    {
        // P(X1 < 0, X2 > 0) in standardized coordinates:
        // P(Z1 < a) - P(Z1 < a, Z2 < b)
        quad = oracle::phi_quadrature(a) - oracle::phi2_quadrature(a, b, in.rho);
    }
    CHECK(std::abs(joint - quad) < 1e-10);

    NetZeroInputs zero_denom = in;
    zero_denom.mu2 = -50.0 * zero_denom.sigma2;
    CHECK_THROWS_AS(p_nz3(zero_denom), ModelError);
}

TEST_CASE("p_nz2 against kernel-conditioned Monte Carlo") {
    // Conditioning on an exact growth value has probability zero; estimate
    // the conditional frequency inside bands |g - r| < eps and Richardson-
    // extrapolate the even O(eps^2) band bias away.
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    StateHistory h;
    const long long t = 200;

    SimConfig cfg;
    cfg.n_paths = 400000;
    cfg.horizon = t;
    cfg.seed = 0xF00D;
    cfg.mode = SimMode::full;
    cfg.snapshots = {t};
    cfg.collect_increments = true;
    const PathEnsemble ens = simulate_full(p, h, cfg);
    const SnapshotStats& s = ens.stats_at(t);
    REQUIRE(s.increment_dyp.size() == cfg.n_paths);

    const NetZeroInputs in = asymptotic_inputs(rp, p.e, p.theta, p);
    const double r = in.mu2; // conditioning value: asymptotic median growth

    auto band_estimate = [&](double eps, double& se) {
        long long in_band = 0, nz = 0;
        for (std::size_t i = 0; i < s.increment_g.size(); ++i) {
            if (std::abs(s.increment_g[i] - r) < eps) {
                ++in_band;
                if (s.increment_dyp[i] < 0.0) ++nz;
            }
        }
        REQUIRE(in_band > 1000);
        const double phat = static_cast<double>(nz) / static_cast<double>(in_band);
        se = std::sqrt(phat * (1.0 - phat) / static_cast<double>(in_band));
        return phat;
    };

    double se_wide = 0.0, se_narrow = 0.0;
    const double p_wide = band_estimate(0.50 * in.sigma2, se_wide);
    const double p_narrow = band_estimate(0.25 * in.sigma2, se_narrow);
    const double extrapolated = (4.0 * p_narrow - p_wide) / 3.0;
    const double se_comb =
        std::sqrt((16.0 * se_narrow * se_narrow + se_wide * se_wide) / 9.0);

    CHECK(std::abs(extrapolated - p_nz2(in)) < 4.0 * se_comb);
}

TEST_CASE("probabilities stay inside [0, 1] on random inputs") {
    std::mt19937_64 rng(4711);
    std::uniform_real_distribution<double> mu(-2.0, 2.0);
    std::uniform_real_distribution<double> sd(0.05, 3.0);
    std::uniform_real_distribution<double> corr(-0.99, 0.99);
    for (int i = 0; i < 300; ++i) {
        NetZeroInputs in;
        in.mu1 = mu(rng);
        in.mu2 = mu(rng);
        in.sigma1 = sd(rng);
        in.sigma2 = sd(rng);
        in.rho = corr(rng);
        for (double v : {p_nz1(in), p_nz2(in), p_nz3(in)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("netzero report JSON") {
    const ModelParams p = canonical();
    const ReducedParams rp = reduce(p);
    const NetZeroInputs in = asymptotic_inputs(rp, p.e, p.theta, p);
    const auto j = nlohmann::json::parse(netzero_report_json(in, R"({"seed": 7})"));
    CHECK(j["p_nz1"].get<double>() == doctest::Approx(p_nz1(in)).epsilon(1e-15));
    CHECK(j["p_nz2"].get<double>() == doctest::Approx(p_nz2(in)).epsilon(1e-15));
    CHECK(j["p_nz3"].get<double>() == doctest::Approx(p_nz3(in)).epsilon(1e-15));
    CHECK(j["inputs"]["rho"].get<double>() == in.rho);
    CHECK(j["meta"]["seed"].get<int>() == 7);
}

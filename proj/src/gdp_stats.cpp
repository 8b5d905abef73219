#include "cerm/gdp_stats.hpp"

#include "cerm/analytics.hpp"
#include "cerm/csv.hpp"
#include "cerm/errors.hpp"
#include "cerm/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace cerm {

namespace {

void require_horizon(long long t, const char* what) {
    if (t < 1) throw ModelError(std::string(what) + ": horizon t must be >= 1");
}

// Per-period contribution to V[Y~^t]; b_k and b_{k-1} are passed in so
// callers can advance them with the exact recurrence b_k = 1 + q b_{k-1}.
struct CumulativeTerm {
    double e2, th2, s2, ag, gamma, beta;

    Mat3 matrix(double bk, double bk1) const {
        return Mat3::symmetric(e2, gamma * e2 * bk, beta * gamma * e2 * bk1, s2 * bk * bk,
                               beta * s2 * bk * bk1 - ag * th2 * bk,
                               th2 + beta * beta * s2 * bk1 * bk1 - 2.0 * beta * ag * th2 * bk1);
    }

    // (1,-1,-1) contraction of matrix(), expanded independently.
    double contraction(double bk, double bk1) const {
        const double big = bk + beta * bk1;
        return e2 + th2 + s2 * big * big - 2.0 * big * (gamma * e2 + ag * th2);
    }
};

CumulativeTerm make_term(const ReducedParams& rp, double e, double theta) {
    return CumulativeTerm{e * e, theta * theta, rp.sigma * rp.sigma, rp.alpha + rp.gamma,
                          rp.gamma, rp.beta};
}

long long convergence_horizon(double q) {
    const double aq = std::abs(q);
    if (aq < 1e-12) return 8;
    const long long t = static_cast<long long>(std::ceil(std::log(1e-12) / std::log(aq)));
    return std::clamp<long long>(t, 8, 4000000);
}

} // namespace

double mean_physical_increment(const ReducedParams& rp, double r, double physical_lag,
                               long long t) {
    if (t < 0) throw ModelError("mean_physical_increment: t must be >= 0");
    if (t == 0) return physical_lag;
    const double fixed_point = rp.gamma * r; // times b_t below; recursion m_t = gamma r + q m_{t-1}
    return fixed_point * b_factor(rp.q, t) + std::pow(rp.q, static_cast<double>(t)) * physical_lag;
}

Vec3 expected_cumulatives(const ModelParams& params, const ReducedParams& rp,
                          const StateHistory& history, long long t) {
    require_horizon(t, "expected_cumulatives");
    const double d0 = history.physical_lag();
    const double m_star = rp.gamma * params.r / (1.0 - rp.q);
    const double ee = history.y_e0 + static_cast<double>(t) * params.r;
    const double ep = history.y_p0 + m_star * static_cast<double>(t) +
                      (d0 - m_star) * rp.q * b_factor(rp.q, t);
    const double et = history.y_t0 + rp.beta * d0 +
                      rp.beta * (m_star * static_cast<double>(t - 1) +
                                 (d0 - m_star) * rp.q * b_factor(rp.q, t - 1));
    return Vec3{ee, ep, et};
}

Mat3 cumulative_covariance(const ReducedParams& rp, double e, double theta, long long t) {
    require_horizon(t, "cumulative_covariance");
    const CumulativeTerm term = make_term(rp, e, theta);
    Mat3 total = Mat3::zero();
    double bk1 = 0.0; // b_0
    double bk = 1.0;  // b_1
    for (long long k = 1; k <= t; ++k) {
        total += term.matrix(bk, bk1);
        bk1 = bk;
        bk = 1.0 + rp.q * bk;
    }
    return total;
}

double log_gdp_variance(const ReducedParams& rp, double e, double theta, long long t) {
    require_horizon(t, "log_gdp_variance");
    const CumulativeTerm term = make_term(rp, e, theta);
    double total = 0.0;
    double bk1 = 0.0, bk = 1.0;
    for (long long k = 1; k <= t; ++k) {
        total += term.contraction(bk, bk1);
        bk1 = bk;
        bk = 1.0 + rp.q * bk;
    }
    return std::max(0.0, total);
}

std::vector<double> log_gdp_variance_schedule(const ReducedParams& rp, double e, double theta,
                                              long long t_max) {
    require_horizon(t_max, "log_gdp_variance_schedule");
    const CumulativeTerm term = make_term(rp, e, theta);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t_max));
    double total = 0.0, bk1 = 0.0, bk = 1.0;
    for (long long k = 1; k <= t_max; ++k) {
        total += term.contraction(bk, bk1);
        out.push_back(std::max(0.0, total));
        bk1 = bk;
        bk = 1.0 + rp.q * bk;
    }
    return out;
}

GdpDistribution gdp_distribution(const ModelParams& params, const ReducedParams& rp,
                                 const StateHistory& history, long long t) {
    require_horizon(t, "gdp_distribution");
    const Vec3 m = expected_cumulatives(params, rp, history, t);
    GdpDistribution d;
    d.t = t;
    d.mu_t = m[kE] - m[kP] - m[kT];
    d.s2_t = log_gdp_variance(rp, params.e, params.theta, t);
    d.median = history.gdp_t0 * std::exp(d.mu_t);
    d.mean = history.gdp_t0 * std::exp(d.mu_t + 0.5 * d.s2_t);
    d.variance = history.gdp_t0 * history.gdp_t0 * std::expm1(d.s2_t) *
                 std::exp(2.0 * d.mu_t + d.s2_t);
    return d;
}

AsymptoticRates asymptotic_rates(const ModelParams& params, const ReducedParams& rp,
                                 const StateHistory& history) {
    const double denom = rp.alpha * rp.beta + (1.0 + rp.beta) * rp.gamma; // = 1 - q
    if (!(denom > 0.0))
        throw ModelError("asymptotic_rates: alpha*beta + (1+beta)*gamma must be positive");

    AsymptoticRates out;
    out.r_mu_inf = rp.alpha * rp.beta * params.r / denom;

    const double d0 = history.physical_lag();
    const double m_star = rp.gamma * params.r / (1.0 - rp.q);
    const double mu0 = history.y_e0 - history.y_p0 - history.y_t0;
    out.mu_h = mu0 - (d0 - m_star) * (rp.q + rp.beta) / (1.0 - rp.q);
    out.mu_h_alt = mu0 + (d0 - m_star) * (1.0 - (1.0 - rp.beta) / denom);
    out.mu_h_gap = out.mu_h_alt - out.mu_h;

    const double e2 = params.e * params.e;
    const double th2 = params.theta * params.theta;
    const double s2 = rp.sigma * rp.sigma;
    const double one_m_q = 1.0 - rp.q;
    const double opb = 1.0 + rp.beta;
    out.r_s2_inf = e2 + th2 + s2 * opb * opb / (one_m_q * one_m_q) -
                   2.0 * opb * (rp.gamma * e2 + (rp.alpha + rp.gamma) * th2) / one_m_q;

    // Intercept of s^2_t - r t: sum of per-period deviations from the limit
    // rate, accumulated until the geometric tail is below 1e-12.
    const CumulativeTerm term = make_term(rp, params.e, params.theta);
    const long long t_star = convergence_horizon(rp.q);
    double s2_h = 0.0, bk1 = 0.0, bk = 1.0;
    for (long long k = 1; k <= t_star; ++k) {
        s2_h += term.contraction(bk, bk1) - out.r_s2_inf;
        bk1 = bk;
        bk = 1.0 + rp.q * bk;
    }
    out.s2_h = s2_h;

    out.log_median_rate = out.r_mu_inf;
    out.log_mean_rate = 0.5 * out.r_s2_inf + out.r_mu_inf;
    out.log_variance_rate = 2.0 * (out.r_s2_inf + out.r_mu_inf);
    return out;
}

void write_fan_chart_csv(const ModelParams& params, const ReducedParams& rp,
                         const StateHistory& history, long long t_max,
                         const std::filesystem::path& path, const std::string& meta_comment) {
    require_horizon(t_max, "write_fan_chart_csv");
    const double z05 = norm_quantile(0.05);
    const double z95 = norm_quantile(0.95);
    const std::vector<double> s2 = log_gdp_variance_schedule(rp, params.e, params.theta, t_max);

    CsvWriter w(path, meta_comment);
    w.header({"t", "median", "mean", "variance", "q05", "q95"});
    for (long long t = 1; t <= t_max; ++t) {
        const Vec3 m = expected_cumulatives(params, rp, history, t);
        const double mu = m[kE] - m[kP] - m[kT];
        const double v = s2[static_cast<std::size_t>(t - 1)];
        const double s = std::sqrt(v);
        w.field(t);
        w.field(history.gdp_t0 * std::exp(mu));
        w.field(history.gdp_t0 * std::exp(mu + 0.5 * v));
        w.field(history.gdp_t0 * history.gdp_t0 * std::expm1(v) * std::exp(2.0 * mu + v));
        w.field(history.gdp_t0 * std::exp(mu + s * z05));
        w.field(history.gdp_t0 * std::exp(mu + s * z95));
        w.end_row();
    }
}

} // namespace cerm

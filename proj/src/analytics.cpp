#include "cerm/analytics.hpp"

#include "cerm/csv.hpp"
#include "cerm/errors.hpp"

#include <cmath>
#include <string>

namespace cerm {

namespace {

void require_horizon(long long t, const char* what) {
    if (t < 1) throw ModelError(std::string(what) + ": horizon t must be >= 1");
}

void require_delay(long long tau) {
    if (tau < 1) throw ModelError("auto_covariance: delay tau must be >= 1");
}

} // namespace

double geometric_sum(double x, long long n) {
    if (n <= 0) return 0.0;
    if (std::abs(1.0 - x) > 1e-8) return (1.0 - std::pow(x, static_cast<double>(n))) / (1.0 - x);
    double sum = 0.0, pw = 1.0;
    for (long long k = 0; k < n; ++k) {
        sum += pw;
        pw *= x;
    }
    return sum;
}

double c_factor(double q, long long t) { return geometric_sum(q * q, t); }

double b_factor(double q, long long k) { return geometric_sum(q, k); }

Mat3 innovation_covariance(const ReducedParams& rp, double e, double theta) {
    const double ag = rp.alpha + rp.gamma;
    const double th2 = theta * theta;
    const double e2 = e * e;
    return Mat3::symmetric(e2, rp.gamma * e2, 0.0,
                           ag * ag * th2 + e2 * rp.gamma * rp.gamma + rp.p * rp.p, -ag * th2,
                           th2);
}

Mat3 risk_covariance(const ReducedParams& rp, double e, double theta, long long t) {
    require_horizon(t, "risk_covariance");
    const double ag = rp.alpha + rp.gamma;
    const double s2 = rp.sigma * rp.sigma;
    const double th2 = theta * theta;
    const double e2 = e * e;
    const double ct = c_factor(rp.q, t);
    const double ct1 = c_factor(rp.q, t - 1);
    const double cov_pt = -ag * th2 + s2 * rp.beta * rp.q * ct1;
    return Mat3::symmetric(e2, rp.gamma * e2, 0.0, s2 * ct, cov_pt,
                           th2 + rp.beta * rp.beta * s2 * ct1);
}

Vec3 macro_correlations(const ReducedParams& rp, double e, double theta, long long t) {
    require_horizon(t, "macro_correlations");
    const double s2 = rp.sigma * rp.sigma;
    return Vec3{e, rp.sigma * std::sqrt(c_factor(rp.q, t)),
                std::sqrt(theta * theta + rp.beta * rp.beta * s2 * c_factor(rp.q, t - 1))};
}

Mat3 correlation_matrix(const ReducedParams& rp, double e, double theta, long long t) {
    require_horizon(t, "correlation_matrix");
    const Vec3 xi = macro_correlations(rp, e, theta, t);
    if (!(xi[kE] > 0.0) || !(xi[kP] > 0.0) || !(xi[kT] > 0.0))
        throw ModelError("correlation_matrix: degenerate factor variance at t = " +
                         std::to_string(t));
    const Mat3 cov = risk_covariance(rp, e, theta, t);
    // Sign convention of the risk-factor copula: correlations of
    // (Y_E, -Y_P, -Y_T), so the (E,P) and (E,T) entries flip sign. The
    // trailing + 0.0 turns the structurally zero (E,T) entry into +0.
    return Mat3::symmetric(1.0, -cov(kE, kP) / (xi[kE] * xi[kP]) + 0.0,
                           -cov(kE, kT) / (xi[kE] * xi[kT]) + 0.0, 1.0,
                           cov(kP, kT) / (xi[kP] * xi[kT]), 1.0);
}

AsymptoticMoments asymptotic_moments(const ReducedParams& rp, double e, double theta) {
    if (!(rp.sigma > 0.0)) throw ModelError("asymptotic_moments: sigma must be positive");
    const double one_m_q2 = (1.0 - rp.q) * (1.0 + rp.q);
    const double s2 = rp.sigma * rp.sigma;
    AsymptoticMoments a;
    a.xi_inf = Vec3{e, rp.sigma / std::sqrt(one_m_q2),
                    std::sqrt(rp.beta * rp.beta * s2 / one_m_q2 + theta * theta)};
    a.c_const = rp.beta * rp.beta + theta * theta * one_m_q2 / s2;
    const double sqrt_c = std::sqrt(a.c_const);
    const double ep = -rp.gamma * e * std::sqrt(one_m_q2) / rp.sigma;
    const double pt = (1.0 - rp.gamma) * rp.beta / sqrt_c - (rp.alpha + rp.gamma) * sqrt_c;
    a.corr_inf = Mat3::symmetric(1.0, ep, 0.0, 1.0, pt, 1.0);
    return a;
}

Mat3 auto_covariance(const ReducedParams& rp, double e, double theta, long long t, long long tau) {
    require_horizon(t, "auto_covariance");
    require_delay(tau);
    // A^tau has two nonzero entries, (P,P) = q^tau and (T,P) = beta q^{tau-1};
    // the product with V[Y^t] reduces to scaled copies of its physical row.
    const Mat3 cov = risk_covariance(rp, e, theta, t);
    const double q_tau_1 = std::pow(rp.q, static_cast<double>(tau - 1));
    const double q_tau = q_tau_1 * rp.q;
    Mat3 out = Mat3::zero();
    for (int j = 0; j < 3; ++j) {
        out(kP, j) = q_tau * cov(kP, j);
        out(kT, j) = rp.beta * q_tau_1 * cov(kP, j);
    }
    return out;
}

Mat3 auto_correlation(const ReducedParams& rp, double e, double theta, long long t,
                      long long tau) {
    const Mat3 cov = auto_covariance(rp, e, theta, t, tau);
    const Vec3 xi_t = macro_correlations(rp, e, theta, t);
    const Vec3 xi_tt = macro_correlations(rp, e, theta, t + tau);
    for (int i = 0; i < 3; ++i)
        if (!(xi_t[static_cast<std::size_t>(i)] > 0.0) ||
            !(xi_tt[static_cast<std::size_t>(i)] > 0.0))
            throw ModelError("auto_correlation: degenerate factor variance");
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = cov(i, j) /
                        (xi_tt[static_cast<std::size_t>(i)] * xi_t[static_cast<std::size_t>(j)]);
    return out;
}

Mat3 auto_correlation_limit(const ReducedParams& rp, double e, double theta, long long tau) {
    require_delay(tau);
    if (!(rp.sigma > 0.0)) throw ModelError("auto_correlation_limit: sigma must be positive");
    const double one_m_q2 = (1.0 - rp.q) * (1.0 + rp.q);
    const double s2 = rp.sigma * rp.sigma;
    const double th2 = theta * theta;
    const AsymptoticMoments am = asymptotic_moments(rp, e, theta);
    const double c = am.c_const;
    const double sqrt_c = std::sqrt(c);
    const double q_tau_1 = std::pow(rp.q, static_cast<double>(tau - 1));
    const double q_tau = q_tau_1 * rp.q;

    Mat3 out = Mat3::zero();
    out(kP, kE) = rp.gamma * e * q_tau * std::sqrt(one_m_q2) / rp.sigma;
    out(kP, kP) = q_tau;
    out(kP, kT) = rp.beta * q_tau * rp.q / sqrt_c -
                  (rp.alpha + rp.gamma) * th2 * q_tau * one_m_q2 / (s2 * sqrt_c);
    out(kT, kE) = rp.beta * rp.gamma * e * q_tau_1 * std::sqrt(one_m_q2) / (rp.sigma * sqrt_c);
    out(kT, kP) = rp.beta * q_tau_1 / sqrt_c;
    out(kT, kT) = rp.beta * rp.beta * q_tau / c -
                  rp.beta * (rp.alpha + rp.gamma) * th2 * q_tau_1 * one_m_q2 / (s2 * c);
    return out;
}

MomentSchedule compute_moment_schedule(const ReducedParams& rp, double e, double theta,
                                       long long t_max) {
    require_horizon(t_max, "compute_moment_schedule");
    MomentSchedule s;
    s.horizons.reserve(static_cast<std::size_t>(t_max));
    for (long long t = 1; t <= t_max; ++t) {
        s.horizons.push_back(t);
        s.xi.push_back(macro_correlations(rp, e, theta, t));
        s.corr.push_back(correlation_matrix(rp, e, theta, t));
    }
    return s;
}

void write_moment_schedule_csv(const MomentSchedule& schedule, const std::filesystem::path& path,
                               const std::string& meta_comment) {
    CsvWriter w(path, meta_comment);
    w.header({"t", "xi_E", "xi_P", "xi_T", "c_EP", "c_PT", "c_ET"});
    for (std::size_t i = 0; i < schedule.horizons.size(); ++i) {
        w.field(schedule.horizons[i]);
        w.field(schedule.xi[i][kE]);
        w.field(schedule.xi[i][kP]);
        w.field(schedule.xi[i][kT]);
        w.field(schedule.corr[i](kE, kP));
        w.field(schedule.corr[i](kP, kT));
        w.field(schedule.corr[i](kE, kT));
        w.end_row();
    }
}

MomentSchedule read_moment_schedule_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    t.require_columns({"t", "xi_E", "xi_P", "xi_T", "c_EP", "c_PT", "c_ET"});
    MomentSchedule s;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        s.horizons.push_back(static_cast<long long>(t.number(r, "t")));
        s.xi.push_back(Vec3{t.number(r, "xi_E"), t.number(r, "xi_P"), t.number(r, "xi_T")});
        s.corr.push_back(Mat3::symmetric(1.0, t.number(r, "c_EP"), t.number(r, "c_ET"), 1.0,
                                         t.number(r, "c_PT"), 1.0));
    }
    return s;
}

} // namespace cerm

#include "cerm/adapter.hpp"
#include "cerm/analytics.hpp"
#include "cerm/calibration.hpp"
#include "cerm/errors.hpp"
#include "cerm/gaussian.hpp"
#include "cerm/gdp_stats.hpp"
#include "cerm/netzero.hpp"
#include "cerm/params.hpp"
#include "cerm/simulator.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <vector>

namespace py = pybind11;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const cerm::Mat3& m) {
    Rows out(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

std::vector<double> to_list(const cerm::Vec3& v) { return {v[0], v[1], v[2]}; }

} // namespace

PYBIND11_MODULE(cerm, m) {
    m.doc() = "climate-extended risk model: forward-looking calibration and analytics";

    py::register_exception<cerm::ConfigError>(m, "ConfigError");
    py::register_exception<cerm::DataError>(m, "DataError");
    py::register_exception<cerm::ModelError>(m, "ModelError");

    py::class_<cerm::ModelParams>(m, "ModelParams")
        .def(py::init([](double r, double e, double p_tilde, double theta, double alpha_tilde,
                         double beta, double gamma_tilde) {
                 return cerm::ModelParams{r, e, p_tilde, theta, alpha_tilde, beta, gamma_tilde};
             }),
             py::arg("r"), py::arg("e"), py::arg("p_tilde"), py::arg("theta"),
             py::arg("alpha_tilde"), py::arg("beta"), py::arg("gamma_tilde"))
        .def_readwrite("r", &cerm::ModelParams::r)
        .def_readwrite("e", &cerm::ModelParams::e)
        .def_readwrite("p_tilde", &cerm::ModelParams::p_tilde)
        .def_readwrite("theta", &cerm::ModelParams::theta)
        .def_readwrite("alpha_tilde", &cerm::ModelParams::alpha_tilde)
        .def_readwrite("beta", &cerm::ModelParams::beta)
        .def_readwrite("gamma_tilde", &cerm::ModelParams::gamma_tilde);

    py::class_<cerm::ReducedParams>(m, "ReducedParams")
        .def_readonly("alpha", &cerm::ReducedParams::alpha)
        .def_readonly("gamma", &cerm::ReducedParams::gamma)
        .def_readonly("p", &cerm::ReducedParams::p)
        .def_readonly("q", &cerm::ReducedParams::q)
        .def_readonly("sigma", &cerm::ReducedParams::sigma)
        .def_readonly("beta", &cerm::ReducedParams::beta);

    py::class_<cerm::StateHistory>(m, "StateHistory")
        .def(py::init([](double gdp_t0, double y_e0, double y_p0, double y_t0,
                         double y_p_minus1) {
                 return cerm::StateHistory{gdp_t0, y_e0, y_p0, y_t0, y_p_minus1};
             }),
             py::arg("gdp_t0") = 1.0, py::arg("y_e0") = 0.0, py::arg("y_p0") = 0.0,
             py::arg("y_t0") = 0.0, py::arg("y_p_minus1") = 0.0)
        .def_readwrite("gdp_t0", &cerm::StateHistory::gdp_t0)
        .def_readwrite("y_e0", &cerm::StateHistory::y_e0)
        .def_readwrite("y_p0", &cerm::StateHistory::y_p0)
        .def_readwrite("y_t0", &cerm::StateHistory::y_t0)
        .def_readwrite("y_p_minus1", &cerm::StateHistory::y_p_minus1);

    m.def("reduce", &cerm::reduce, py::arg("params"));

    m.def("phi", &cerm::norm_cdf, py::arg("x"));
    m.def("phi_inv", &cerm::norm_quantile, py::arg("p"));
    m.def("phi2", &cerm::norm_cdf2, py::arg("x"), py::arg("y"), py::arg("rho"));

    m.def(
        "innovation_covariance",
        [](const cerm::ReducedParams& rp, double e, double theta) {
            return to_rows(cerm::innovation_covariance(rp, e, theta));
        },
        py::arg("reduced"), py::arg("e"), py::arg("theta"));
    m.def(
        "risk_covariance",
        [](const cerm::ReducedParams& rp, double e, double theta, long long t) {
            return to_rows(cerm::risk_covariance(rp, e, theta, t));
        },
        py::arg("reduced"), py::arg("e"), py::arg("theta"), py::arg("t"));
    m.def(
        "macro_correlations",
        [](const cerm::ReducedParams& rp, double e, double theta, long long t) {
            return to_list(cerm::macro_correlations(rp, e, theta, t));
        },
        py::arg("reduced"), py::arg("e"), py::arg("theta"), py::arg("t"));
    m.def(
        "correlation_matrix",
        [](const cerm::ReducedParams& rp, double e, double theta, long long t) {
            return to_rows(cerm::correlation_matrix(rp, e, theta, t));
        },
        py::arg("reduced"), py::arg("e"), py::arg("theta"), py::arg("t"));
    m.def(
        "asymptotic_correlation",
        [](const cerm::ReducedParams& rp, double e, double theta) {
            const auto am = cerm::asymptotic_moments(rp, e, theta);
            return py::dict(py::arg("xi_inf") = to_list(am.xi_inf),
                            py::arg("corr_inf") = to_rows(am.corr_inf),
                            py::arg("c_const") = am.c_const);
        },
        py::arg("reduced"), py::arg("e"), py::arg("theta"));

    m.def(
        "expected_cumulatives",
        [](const cerm::ModelParams& p, const cerm::StateHistory& h, long long t) {
            return to_list(cerm::expected_cumulatives(p, cerm::reduce(p), h, t));
        },
        py::arg("params"), py::arg("history"), py::arg("t"));
    m.def(
        "log_gdp_variance",
        [](const cerm::ModelParams& p, long long t) {
            return cerm::log_gdp_variance(cerm::reduce(p), p.e, p.theta, t);
        },
        py::arg("params"), py::arg("t"));
    m.def(
        "gdp_distribution",
        [](const cerm::ModelParams& p, const cerm::StateHistory& h, long long t) {
            const auto d = cerm::gdp_distribution(p, cerm::reduce(p), h, t);
            return py::dict(py::arg("t") = d.t, py::arg("mu_t") = d.mu_t,
                            py::arg("s2_t") = d.s2_t, py::arg("median") = d.median,
                            py::arg("mean") = d.mean, py::arg("variance") = d.variance);
        },
        py::arg("params"), py::arg("history"), py::arg("t"));
    m.def(
        "asymptotic_rates",
        [](const cerm::ModelParams& p, const cerm::StateHistory& h) {
            const auto r = cerm::asymptotic_rates(p, cerm::reduce(p), h);
            return py::dict(py::arg("r_mu_inf") = r.r_mu_inf, py::arg("mu_h") = r.mu_h,
                            py::arg("mu_h_alt") = r.mu_h_alt, py::arg("mu_h_gap") = r.mu_h_gap,
                            py::arg("r_s2_inf") = r.r_s2_inf, py::arg("s2_h") = r.s2_h);
        },
        py::arg("params"), py::arg("history"));

    py::class_<cerm::NetZeroInputs>(m, "NetZeroInputs")
        .def_readonly("mu1", &cerm::NetZeroInputs::mu1)
        .def_readonly("mu2", &cerm::NetZeroInputs::mu2)
        .def_readonly("sigma1", &cerm::NetZeroInputs::sigma1)
        .def_readonly("sigma2", &cerm::NetZeroInputs::sigma2)
        .def_readonly("rho", &cerm::NetZeroInputs::rho);

    m.def(
        "netzero_inputs",
        [](const cerm::ModelParams& p) {
            return cerm::asymptotic_inputs(cerm::reduce(p), p.e, p.theta, p);
        },
        py::arg("params"));
    m.def("p_nz1", &cerm::p_nz1, py::arg("inputs"));
    m.def("p_nz2", &cerm::p_nz2, py::arg("inputs"));
    m.def("p_nz3", &cerm::p_nz3, py::arg("inputs"));

    m.def("basel_irb_correlation", &cerm::basel_irb_correlation, py::arg("pd"));
    m.def(
        "conditioned_migration_schedule",
        [](const Rows& m_reg, const std::vector<std::string>& ratings,
           const std::vector<double>& alpha_micro, const cerm::ModelParams& p,
           long long horizon) {
            cerm::Portfolio pf;
            for (std::size_t i = 0; i < m_reg.size(); ++i) {
                cerm::PortfolioEntry e;
                e.group = "g";
                e.rating = ratings.at(i);
                e.migration_row = m_reg[i];
                e.alpha_micro = cerm::Vec3{alpha_micro.at(0), alpha_micro.at(1),
                                           alpha_micro.at(2)};
                pf.entries.push_back(std::move(e));
            }
            const auto rp = cerm::reduce(p);
            const auto schedule = cerm::compute_moment_schedule(rp, p.e, p.theta, horizon);
            const auto result = cerm::migrate_portfolio(pf, schedule);
            std::vector<Rows> out;
            for (const auto& mt : result.front().matrices) {
                Rows rows(static_cast<std::size_t>(mt.size()),
                          std::vector<double>(static_cast<std::size_t>(mt.size())));
                for (int i = 0; i < mt.size(); ++i)
                    for (int j = 0; j < mt.size(); ++j)
                        rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            mt.at(i, j);
                out.push_back(std::move(rows));
            }
            return out;
        },
        py::arg("migration_matrix"), py::arg("ratings"), py::arg("alpha_micro"),
        py::arg("params"), py::arg("horizon"),
        "Per-period conditioned migration matrices for one borrower group");

    m.def(
        "simulate_summary",
        [](const cerm::ModelParams& p, const cerm::StateHistory& h, std::uint64_t n_paths,
           long long horizon, std::uint64_t seed, const std::string& mode,
           const std::vector<long long>& snapshots) {
            cerm::SimConfig cfg;
            cfg.n_paths = n_paths;
            cfg.horizon = horizon;
            cfg.seed = seed;
            cfg.snapshots = snapshots;
            cfg.mode = mode == "centered" ? cerm::SimMode::centered : cerm::SimMode::full;
            const cerm::PathEnsemble ens =
                cfg.mode == cerm::SimMode::centered
                    ? cerm::simulate_centered(cerm::reduce(p), p.e, p.theta, cfg)
                    : cerm::simulate_full(p, h, cfg);
            py::list out;
            for (const auto& s : ens.stats) {
                out.append(py::dict(
                    py::arg("t") = s.t, py::arg("n") = s.n, py::arg("mean") = to_list(s.mean),
                    py::arg("cov") = to_rows(s.cov), py::arg("growth_mean") = s.growth_mean,
                    py::arg("growth_var") = s.growth_var,
                    py::arg("frac_dyp_neg") = s.frac_dyp_neg,
                    py::arg("frac_g_pos") = s.frac_g_pos,
                    py::arg("frac_nz_given_g_pos") = s.frac_nz_given_g_pos));
            }
            return out;
        },
        py::arg("params"), py::arg("history"), py::arg("n_paths"), py::arg("horizon"),
        py::arg("seed"), py::arg("mode") = "full",
        py::arg("snapshots") = std::vector<long long>{});
}

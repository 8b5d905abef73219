#include "cerm/calibration.hpp"

#include "cerm/csv.hpp"
#include "cerm/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cerm {

using nlohmann::json;

namespace {

constexpr double kZ95 = 1.959963984540054; // Phi^-1(0.975)

// Student-t 97.5% quantile via the Cornish-Fisher expansion around the
// normal quantile; relative error < 1e-3 for dof >= 8.
double t_quantile_975(long long dof) {
    if (dof < 1) return kZ95;
    const double z = kZ95;
    const double nu = static_cast<double>(dof);
    const double z3 = z * z * z;
    const double z5 = z3 * z * z;
    return z + (z3 + z) / (4.0 * nu) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu);
}

void require_finite(const std::vector<double>& xs, const char* what) {
    for (double x : xs)
        if (!std::isfinite(x)) throw DataError(std::string(what) + ": non-finite value");
}

void validate_series(const HistoricalSeries& s) {
    const std::size_t n = s.size();
    if (n == 0) throw DataError("historical series: empty");
    if (s.gdp.size() != n || s.co2.size() != n || s.y_p.size() != n || s.y_t.size() != n)
        throw DataError("historical series: column length mismatch");
    for (std::size_t i = 1; i < n; ++i)
        if (s.years[i] != s.years[i - 1] + 1)
            throw DataError("historical series: years must be contiguous and increasing");
    require_finite(s.gdp, "historical series gdp");
    require_finite(s.co2, "historical series co2");
    require_finite(s.y_p, "historical series y_p");
    require_finite(s.y_t, "historical series y_t");
    for (double g : s.gdp)
        if (!(g > 0.0)) throw DataError("historical series: gdp must be positive");
}

std::size_t year_index(const HistoricalSeries& s, long long year, const char* what) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.years[i] == year) return i;
    throw DataError(std::string(what) + ": year " + std::to_string(year) +
                    " not present in the series");
}

EstimateCI mean_ci(double value, double se, long long n, long long dof, std::string method) {
    EstimateCI ci;
    ci.value = value;
    ci.se = se;
    const double quantile = t_quantile_975(dof);
    ci.lo = value - quantile * se;
    ci.hi = value + quantile * se;
    ci.n = n;
    ci.method = std::move(method);
    return ci;
}

// Normal CI on log variance, mapped back to the standard deviation.
EstimateCI sd_ci(double sd, long long dof, long long n, std::string method) {
    EstimateCI ci;
    ci.value = sd;
    ci.n = n;
    ci.method = std::move(method);
    if (sd <= 0.0 || dof < 1) {
        ci.se = 0.0;
        ci.lo = ci.hi = sd;
        return ci;
    }
    const double half = 0.5 * kZ95 * std::sqrt(2.0 / static_cast<double>(dof));
    ci.se = sd * std::sqrt(0.5 / static_cast<double>(dof));
    ci.lo = sd * std::exp(-half);
    ci.hi = sd * std::exp(half);
    return ci;
}

struct OriginFit {
    double slope = 0.0;
    double slope_se = 0.0;
    double resid_sd = 0.0;
    long long n = 0;
};

OriginFit ols_through_origin(const std::vector<double>& x, const std::vector<double>& y,
                             const char* what) {
    if (x.size() != y.size() || x.empty())
        throw DataError(std::string(what) + ": empty or mismatched regression data");
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (!(sxx > 0.0)) throw DataError(std::string(what) + ": regressor has no variation");
    OriginFit fit;
    fit.n = static_cast<long long>(x.size());
    fit.slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.slope * x[i];
        rss += r * r;
    }
    const long long dof = fit.n - 1;
    fit.resid_sd = dof > 0 ? std::sqrt(rss / static_cast<double>(dof)) : 0.0;
    fit.slope_se = fit.resid_sd / std::sqrt(sxx);
    return fit;
}

} // namespace

EconomicEstimate estimate_economic(const HistoricalSeries& series) {
    validate_series(series);
    if (series.size() < 10)
        throw DataError("estimate_economic: need at least 10 annual observations");

    // Invert the GDP identity: the climate-free increment is
    // delta log GDP + delta Y_P + delta Y_T.
    std::vector<double> inc;
    inc.reserve(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i)
        inc.push_back(std::log(series.gdp[i] / series.gdp[i - 1]) +
                      (series.y_p[i] - series.y_p[i - 1]) + (series.y_t[i] - series.y_t[i - 1]));

    const double n = static_cast<double>(inc.size());
    double mean = 0.0;
    for (double v : inc) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : inc) ss += (v - mean) * (v - mean);
    const double sd = inc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    EconomicEstimate out;
    out.r = mean_ci(mean, sd / std::sqrt(n), static_cast<long long>(inc.size()),
                    static_cast<long long>(inc.size()) - 1,
                    "sample mean of climate-free increments");
    out.e = sd_ci(sd, static_cast<long long>(inc.size()) - 1, static_cast<long long>(inc.size()),
                  "sample sd of climate-free increments");
    return out;
}

double carbon_intensity(const HistoricalSeries& series) {
    validate_series(series);
    const std::size_t i0 = 0;
    const std::size_t i1 = year_index(series, series.transition_start_year, "carbon_intensity");
    if (i1 <= i0) throw DataError("carbon_intensity: transition start must lie after -t0");
    const double dlog = std::log(series.gdp[i1]) - std::log(series.gdp[i0]);
    if (std::abs(dlog) < 1e-14)
        throw DataError("carbon_intensity: log GDP did not change over [-t0, -t1]");
    return (series.co2[i1] - series.co2[i0]) / dlog;
}

EstimateCI transition_efficiency(const TransitionStudy& study, const HistoricalSeries& series,
                                 const EstimateCI& gamma_tilde) {
    validate_series(series);
    if (!(study.y_nz > 0.0)) throw DataError("transition_efficiency: Y_NZ must be positive");
    if (!(study.t_nz > 0.0)) throw DataError("transition_efficiency: T_NZ must be positive");
    const std::size_t last = series.size() - 1;
    const double mu0 = std::log(series.gdp[last] / series.gdp[0]);
    const double factor = (mu0 + study.r_nz * study.t_nz) / study.y_nz;

    EstimateCI out;
    out.value = gamma_tilde.value * factor;
    out.se = gamma_tilde.se * std::abs(factor);
    out.lo = std::min(gamma_tilde.lo * factor, gamma_tilde.hi * factor);
    out.hi = std::max(gamma_tilde.lo * factor, gamma_tilde.hi * factor);
    out.n = gamma_tilde.n;
    out.method = "net-zero study identity scaled by the gamma~ estimate";
    return out;
}

DamageEstimate damage_response(const ScenarioCosts& scenarios, double carbon_intensity) {
    if (scenarios.delta_co2.size() != scenarios.yearly_damage.size())
        throw DataError("damage_response: scenario columns have different lengths");
    if (scenarios.delta_co2.size() < 2)
        throw DataError("damage_response: need at least 2 scenarios");
    if (!(scenarios.horizon > 0.0)) throw DataError("damage_response: maturity must be positive");
    require_finite(scenarios.delta_co2, "scenarios delta_co2");
    require_finite(scenarios.yearly_damage, "scenarios yearly_damage");
    const auto [mn, mx] =
        std::minmax_element(scenarios.delta_co2.begin(), scenarios.delta_co2.end());
    if (*mx - *mn <= 1e-12 * std::max(1.0, std::abs(*mx)))
        throw DataError("damage_response: degenerate design, all delta_co2 equal");

    const OriginFit fit =
        ols_through_origin(scenarios.delta_co2, scenarios.yearly_damage, "damage_response");

    DamageEstimate out;
    out.slope = fit.slope;
    out.gamma_tilde = mean_ci(fit.slope * carbon_intensity,
                              fit.slope_se * std::abs(carbon_intensity), fit.n, fit.n - 1,
                              "scenario OLS slope times carbon intensity");
    // The Wiener noise has variance p~^2 T at the common maturity.
    out.p_tilde = sd_ci(fit.resid_sd / std::sqrt(scenarios.horizon), fit.n - 1, fit.n,
                        "scenario residual sd scaled by 1/sqrt(T)");
    return out;
}

PoliticsEstimate transition_politics(const HistoricalSeries& series) {
    validate_series(series);
    const std::size_t i1 =
        year_index(series, series.transition_start_year, "transition_politics");

    std::vector<double> x, y;
    for (std::size_t k = std::max<std::size_t>(i1 + 1, 2); k < series.size(); ++k) {
        y.push_back(series.y_t[k] - series.y_t[k - 1]);
        x.push_back(series.y_p[k - 1] - series.y_p[k - 2]);
    }
    if (x.size() < 5)
        throw DataError("transition_politics: need at least 5 observation pairs after -t1");

    const OriginFit fit = ols_through_origin(x, y, "transition_politics");
    PoliticsEstimate out;
    out.beta = mean_ci(fit.slope, fit.slope_se, fit.n, fit.n - 1,
                       "lagged damage regression slope");
    out.theta = sd_ci(fit.resid_sd, fit.n - 1, fit.n, "lagged damage regression residual sd");
    return out;
}

CalibrationResult calibrate_all(const HistoricalSeries& series, const TransitionStudy& study,
                                const ScenarioCosts& scenarios) {
    {
        std::vector<std::string> missing;
        if (series.size() == 0) missing.push_back("historical series");
        if (scenarios.delta_co2.empty()) missing.push_back("scenario costs");
        if (!(study.t_nz > 0.0) || !(study.y_nz > 0.0)) missing.push_back("transition study");
        if (!missing.empty()) {
            std::ostringstream os;
            os << "calibrate_all: missing inputs:";
            for (const auto& m : missing) os << ' ' << m << ';';
            throw DataError(os.str());
        }
    }

    HistoricalSeries s = series;
    if (s.transition_start_year == 0) s.transition_start_year = study.t1;

    CalibrationResult res;
    res.carbon_intensity = carbon_intensity(s);
    res.damage = damage_response(scenarios, res.carbon_intensity);
    res.alpha_tilde = transition_efficiency(study, s, res.damage.gamma_tilde);
    res.economic = estimate_economic(s);
    res.politics = transition_politics(s);

    res.params.r = res.economic.r.value;
    res.params.e = res.economic.e.value;
    res.params.p_tilde = res.damage.p_tilde.value;
    res.params.theta = res.politics.theta.value;
    res.params.alpha_tilde = res.alpha_tilde.value;
    res.params.beta = res.politics.beta.value;
    res.params.gamma_tilde = res.damage.gamma_tilde.value;

    const std::size_t last = s.size() - 1;
    res.history.gdp_t0 = s.gdp[0];
    res.history.y_p0 = s.y_p[last];
    res.history.y_t0 = s.y_t[last];
    res.history.y_e0 = std::log(s.gdp[last] / s.gdp[0]) + s.y_p[last] + s.y_t[last];
    res.history.y_p_minus1 = s.y_p[last - 1];

    res.reduced = reduce(res.params); // throws ModelError when |q| >= 1
    return res;
}

namespace {

json ci_json(const EstimateCI& ci) {
    return json{{"value", ci.value}, {"se", ci.se},         {"ci_lo", ci.lo},
                {"ci_hi", ci.hi},    {"n", ci.n},           {"method", ci.method}};
}

} // namespace

std::string calibration_report_json(const CalibrationResult& result,
                                    const std::string& meta_json) {
    json j;
    j["parameters"] = {{"r", ci_json(result.economic.r)},
                       {"e", ci_json(result.economic.e)},
                       {"p_tilde", ci_json(result.damage.p_tilde)},
                       {"theta", ci_json(result.politics.theta)},
                       {"alpha_tilde", ci_json(result.alpha_tilde)},
                       {"beta", ci_json(result.politics.beta)},
                       {"gamma_tilde", ci_json(result.damage.gamma_tilde)}};
    j["carbon_intensity"] = result.carbon_intensity;
    j["damage_slope"] = result.damage.slope;
    j["reduced"] = {{"alpha", result.reduced.alpha}, {"gamma", result.reduced.gamma},
                    {"p", result.reduced.p},         {"q", result.reduced.q},
                    {"sigma", result.reduced.sigma}, {"beta", result.reduced.beta}};
    j["notes"] = "confidence intervals use normal-approximation quantiles; "
                 "standard-deviation parameters use log-variance intervals";
    if (!meta_json.empty()) j["meta"] = json::parse(meta_json);
    return j.dump(2);
}

HistoricalSeries load_history_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    t.require_columns({"year", "gdp", "co2", "y_p", "y_t"});
    HistoricalSeries s;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        s.years.push_back(static_cast<long long>(t.number(r, "year")));
        s.gdp.push_back(t.number(r, "gdp"));
        s.co2.push_back(t.number(r, "co2"));
        s.y_p.push_back(t.number(r, "y_p"));
        s.y_t.push_back(t.number(r, "y_t"));
    }
    validate_series(s);
    return s;
}

ScenarioCosts load_scenarios_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    t.require_columns({"delta_co2", "yearly_damage", "horizon"});
    ScenarioCosts s;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        s.delta_co2.push_back(t.number(r, "delta_co2"));
        s.yearly_damage.push_back(t.number(r, "yearly_damage"));
        const double h = t.number(r, "horizon");
        if (r == 0)
            s.horizon = h;
        else if (h != s.horizon)
            throw DataError("scenarios CSV: a single common maturity is required, got " +
                            format_double(h) + " and " + format_double(s.horizon));
    }
    return s;
}

TransitionStudy load_study_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open study file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw DataError(std::string("study JSON: ") + ex.what());
    }
    TransitionStudy s;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "y_nz" && it.key() != "t_nz" && it.key() != "r_nz" && it.key() != "t1" &&
            it.key() != "meta")
            throw DataError("study JSON: unknown key '" + it.key() + "'");
    if (!j.contains("y_nz") || !j.contains("t_nz") || !j.contains("r_nz") || !j.contains("t1"))
        throw DataError("study JSON: keys y_nz, t_nz, r_nz, t1 are required");
    s.y_nz = j["y_nz"].get<double>();
    s.t_nz = j["t_nz"].get<double>();
    s.r_nz = j["r_nz"].get<double>();
    s.t1 = j["t1"].get<long long>();
    return s;
}

void write_history_csv(const HistoricalSeries& series, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"year", "gdp", "co2", "y_p", "y_t"});
    for (std::size_t i = 0; i < series.size(); ++i) {
        w.field(series.years[i]);
        w.field(series.gdp[i]);
        w.field(series.co2[i]);
        w.field(series.y_p[i]);
        w.field(series.y_t[i]);
        w.end_row();
    }
}

void write_scenarios_csv(const ScenarioCosts& scenarios, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"delta_co2", "yearly_damage", "horizon"});
    for (std::size_t i = 0; i < scenarios.delta_co2.size(); ++i) {
        w.field(scenarios.delta_co2[i]);
        w.field(scenarios.yearly_damage[i]);
        w.field(scenarios.horizon);
        w.end_row();
    }
}

void write_study_json(const TransitionStudy& study, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write study file: " + path.string());
    json j{{"y_nz", study.y_nz}, {"t_nz", study.t_nz}, {"r_nz", study.r_nz}, {"t1", study.t1}};
    out << j.dump(2) << "\n";
}

} // namespace cerm

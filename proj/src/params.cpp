#include "cerm/params.hpp"

#include "cerm/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace cerm {

using nlohmann::json;

std::string ValidationReport::joined() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i];
    }
    return os.str();
}

ValidationReport validate_params(const ModelParams& p) {
    ValidationReport rep;
    auto require_finite_nonneg = [&rep](double v, const char* name) {
        if (!std::isfinite(v)) rep.violations.push_back(std::string(name) + " is not finite");
        else if (v < 0.0) rep.violations.push_back(std::string(name) + " is negative");
    };
    require_finite_nonneg(p.r, "r");
    require_finite_nonneg(p.e, "e");
    require_finite_nonneg(p.p_tilde, "p_tilde");
    require_finite_nonneg(p.theta, "theta");
    require_finite_nonneg(p.alpha_tilde, "alpha_tilde");
    require_finite_nonneg(p.beta, "beta");
    require_finite_nonneg(p.gamma_tilde, "gamma_tilde");
    return rep;
}

ReducedParams reduce(const ModelParams& params) {
    const auto rep = validate_params(params);
    if (!rep.ok()) throw ModelError("reduce: invalid parameters: " + rep.joined());

    const double denom = 1.0 + params.gamma_tilde;
    ReducedParams rp;
    rp.alpha = params.alpha_tilde / denom;
    rp.gamma = params.gamma_tilde / denom;
    rp.p = params.p_tilde / denom;
    rp.beta = params.beta;
    rp.q = (1.0 - (params.alpha_tilde + params.gamma_tilde) * params.beta) / denom;
    const double ag_theta = (rp.alpha + rp.gamma) * params.theta;
    const double ge = params.e * rp.gamma;
    rp.sigma = std::sqrt(ag_theta * ag_theta + ge * ge + rp.p * rp.p);

    if (!(std::abs(rp.q) < 1.0))
        throw ModelError("reduce: |q| >= 1 (q = " + std::to_string(rp.q) +
                         "), model is non-stationary");
    return rp;
}

ValidationReport validate_history(const StateHistory& h) {
    ValidationReport rep;
    if (!(h.gdp_t0 > 0.0)) rep.violations.push_back("gdp_t0 must be positive");
    auto require_finite = [&rep](double v, const char* name) {
        if (!std::isfinite(v)) rep.violations.push_back(std::string(name) + " is not finite");
    };
    require_finite(h.gdp_t0, "gdp_t0");
    require_finite(h.y_e0, "y_e0");
    require_finite(h.y_p0, "y_p0");
    require_finite(h.y_t0, "y_t0");
    require_finite(h.y_p_minus1, "y_p_minus1");
    return rep;
}

namespace {

double take_number(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string(where) + ": missing key '" + key + "'");
    if (!it->is_number()) throw DataError(std::string(where) + ": key '" + key + "' is not a number");
    return it->get<double>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw DataError(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

} // namespace

ModelInput parse_model_input(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw DataError(std::string("parameters JSON: ") + ex.what());
    }
    if (!j.is_object()) throw DataError("parameters JSON: top level must be an object");
    reject_unknown(j, {"r", "e", "p_tilde", "theta", "alpha_tilde", "beta", "gamma_tilde",
                       "history", "meta"},
                   "parameters JSON");

    ModelInput input;
    input.params.r = take_number(j, "r", "parameters JSON");
    input.params.e = take_number(j, "e", "parameters JSON");
    input.params.p_tilde = take_number(j, "p_tilde", "parameters JSON");
    input.params.theta = take_number(j, "theta", "parameters JSON");
    input.params.alpha_tilde = take_number(j, "alpha_tilde", "parameters JSON");
    input.params.beta = take_number(j, "beta", "parameters JSON");
    input.params.gamma_tilde = take_number(j, "gamma_tilde", "parameters JSON");

    auto hist = j.find("history");
    if (hist == j.end()) throw DataError("parameters JSON: missing 'history' block");
    reject_unknown(*hist, {"gdp_t0", "y_e0", "y_p0", "y_t0", "y_p_minus1"}, "history block");
    input.history.gdp_t0 = take_number(*hist, "gdp_t0", "history block");
    input.history.y_e0 = take_number(*hist, "y_e0", "history block");
    input.history.y_p0 = take_number(*hist, "y_p0", "history block");
    input.history.y_t0 = take_number(*hist, "y_t0", "history block");
    input.history.y_p_minus1 = take_number(*hist, "y_p_minus1", "history block");

    const auto rep = validate_history(input.history);
    if (!rep.ok()) throw DataError("parameters JSON: invalid history: " + rep.joined());
    return input;
}

ModelInput load_model_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open parameters file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_input(buf.str());
}

std::string model_input_to_json(const ModelInput& input) {
    json j;
    j["r"] = input.params.r;
    j["e"] = input.params.e;
    j["p_tilde"] = input.params.p_tilde;
    j["theta"] = input.params.theta;
    j["alpha_tilde"] = input.params.alpha_tilde;
    j["beta"] = input.params.beta;
    j["gamma_tilde"] = input.params.gamma_tilde;
    j["history"] = {{"gdp_t0", input.history.gdp_t0},
                    {"y_e0", input.history.y_e0},
                    {"y_p0", input.history.y_p0},
                    {"y_t0", input.history.y_t0},
                    {"y_p_minus1", input.history.y_p_minus1}};
    return j.dump(2);
}

void save_model_input(const ModelInput& input, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write parameters file: " + path.string());
    out << model_input_to_json(input) << "\n";
}

} // namespace cerm

#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "trimatch/calibration.hpp"
#include "trimatch/errors.hpp"

namespace trimatch {

namespace detail {

inline nlohmann::json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

inline double number_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("model file: missing field '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw ParseError(std::string("model file: field '") + key + "' must be a number or null");
    return v.get<double>();
}

} // namespace detail

inline nlohmann::json model_to_json(const FittedModel& model) {
    nlohmann::json j;
    j["format"] = "trimatch-model";
    j["version"] = 1;
    j["terms"] = model.terms;
    j["coefficients"] = model.coefficients;
    j["standard_errors"] = model.standard_errors;
    j["z_values"] = model.z_values;
    j["p_values"] = model.p_values;
    j["deviance"] = detail::number_or_null(model.deviance);
    j["aic"] = detail::number_or_null(model.aic);
    j["trials_per_match"] = model.trials_per_match;
    j["teams"] = model.teams;
    return j;
}

inline FittedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "trimatch-model")
        throw ParseError("model file: expected format 'trimatch-model'");
    if (j.value("version", 0) != 1) throw ParseError("model file: unsupported version");
    FittedModel model;
    try {
        model.terms = j.at("terms").get<std::vector<std::string>>();
        model.coefficients = j.at("coefficients").get<std::vector<double>>();
        model.standard_errors = j.value("standard_errors", std::vector<double>{});
        model.z_values = j.value("z_values", std::vector<double>{});
        model.p_values = j.value("p_values", std::vector<double>{});
        model.trials_per_match = j.value("trials_per_match", kCurlingTrials);
        model.teams = j.value("teams", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    model.deviance = detail::number_from(j, "deviance");
    model.aic = detail::number_from(j, "aic");
    if (model.terms.size() != model.coefficients.size())
        throw ParseError("model file: terms and coefficients disagree in length");
    if (!model.standard_errors.empty() && model.standard_errors.size() != model.terms.size())
        throw ParseError("model file: standard_errors length mismatch");
    if (model.trials_per_match <= 0) throw ParseError("model file: trials_per_match must be positive");
    return model;
}

inline void save_model(const FittedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open model file for writing: " + path);
    out << model_to_json(model).dump(2) << "\n";
}

inline FittedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: invalid JSON: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace trimatch

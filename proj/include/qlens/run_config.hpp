#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

#include "qlens/errors.hpp"
#include "qlens/rep.hpp"

namespace qlens {

// Runtime knobs shared by the command-line driver and the acceptance suites.
struct RunConfig {
    double q = 0.5;
    int l = 2;
    int N = 64;
    int W = 16;
    double tol = 1e-9;
    int margin = 8;
    std::uint64_t seed = 2026;
    int samples = 100;

    void validate() const {
        if (!(q > 0.0 && q < 1.0)) throw config_error("q must lie in the open interval (0,1)");
        if (l < 1) throw config_error("l must be >= 1");
        if (N < 8) throw config_error("N must be >= 8");
        if (W < 4) throw config_error("W must be >= 4");
        if (!(tol > 0.0)) throw config_error("tol must be positive");
        if (margin < 0) throw config_error("margin must be nonnegative");
        if (samples < 1) throw config_error("samples must be >= 1");
    }

    RepParams rep_params() const { return RepParams{q, l, N, W}; }
};

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    return nlohmann::json{{"q", cfg.q},       {"l", cfg.l},
                          {"N", cfg.N},       {"W", cfg.W},
                          {"tol", cfg.tol},   {"margin", cfg.margin},
                          {"seed", cfg.seed}, {"samples", cfg.samples}};
}

// Reads a (possibly partial) configuration document; unknown keys are
// rejected so that typos do not silently fall back to defaults.
inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("configuration must be a JSON object");
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "q") cfg.q = value.get<double>();
            else if (key == "l") cfg.l = value.get<int>();
            else if (key == "N") cfg.N = value.get<int>();
            else if (key == "W") cfg.W = value.get<int>();
            else if (key == "tol") cfg.tol = value.get<double>();
            else if (key == "margin") cfg.margin = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "samples") cfg.samples = value.get<int>();
            else throw config_error("unknown configuration key: " + key);
        } catch (const nlohmann::json::exception&) {
            throw config_error("configuration key '" + key + "' has the wrong type");
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace qlens

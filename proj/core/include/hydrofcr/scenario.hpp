#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hydrofcr/config.hpp"
#include "hydrofcr/control.hpp"
#include "hydrofcr/forecast.hpp"

namespace hydrofcr {

enum class ForecastProviderKind { Persistence, SeasonalNaive24, SeasonalAR, Oracle, Zero };

struct Scenario {
    std::string name = "run";
    std::string trace_path;
    double duration_h = 12.0;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    double eps_move_kw = -1.0;  ///< < 0 means the 0.25% H_max default

    PlantConfig plant;
    std::optional<BessConfig> bess;
    control::ControllerKind controller;
    ForecastProviderKind forecast_kind = ForecastProviderKind::Persistence;
    double forecast_level = 0.95;
};

/// Parse the flat key=value scenario format ('#' comments, namespaced keys).
/// Unknown keys are an error so typos cannot silently fall back to defaults.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Inverse of parse_scenario: every field is written with full precision, so
/// a write/parse round trip reproduces the scenario exactly.
std::string format_scenario(const Scenario& s);

/// Throws ConfigError when any cross-field invariant fails.
void validate_scenario(const Scenario& s);

} // namespace hydrofcr

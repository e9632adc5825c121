#include "hydrofcr/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hydrofcr/errors.hpp"

namespace hydrofcr {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("scenario: key '" + key + "' expects a number, got '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("scenario: key '" + key + "' expects an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("scenario: key '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ConfigError("scenario: key '" + key + "' expects at least one number");
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    bool bess_enabled_explicit = false;
    bool bess_enabled_value = false;

    using Handler = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Handler> handlers = {
        {"scenario.name", [&](const std::string&, const std::string& v) { s.name = v; }},
        {"scenario.trace", [&](const std::string&, const std::string& v) { s.trace_path = v; }},
        {"scenario.duration_h",
         [&](const std::string& k, const std::string& v) { s.duration_h = parse_double(k, v); }},
        {"scenario.seed",
         [&](const std::string& k, const std::string& v) {
             s.seed = static_cast<std::uint64_t>(parse_long(k, v));
         }},
        {"scenario.output_dir", [&](const std::string&, const std::string& v) { s.output_dir = v; }},
        {"scenario.eps_move_kw",
         [&](const std::string& k, const std::string& v) { s.eps_move_kw = parse_double(k, v); }},

        {"plant.sigma_f_kw_per_hz",
         [&](const std::string& k, const std::string& v) {
             s.plant.sigma_f_kw_per_hz = parse_double(k, v);
         }},
        {"plant.f_nominal_hz",
         [&](const std::string& k, const std::string& v) { s.plant.f_nominal_hz = parse_double(k, v); }},
        {"plant.deadband_hz",
         [&](const std::string& k, const std::string& v) { s.plant.deadband_hz = parse_double(k, v); }},
        {"plant.dispatch_kw",
         [&](const std::string& k, const std::string& v) { s.plant.dispatch_kw = parse_double_list(k, v); }},
        {"plant.h_min_kw",
         [&](const std::string& k, const std::string& v) { s.plant.h_min_kw = parse_double(k, v); }},
        {"plant.h_max_kw",
         [&](const std::string& k, const std::string& v) { s.plant.h_max_kw = parse_double(k, v); }},
        {"plant.h_dot_max_kw_per_s",
         [&](const std::string& k, const std::string& v) {
             s.plant.h_dot_max_kw_per_s = parse_double(k, v);
         }},
        {"plant.tau_h_s",
         [&](const std::string& k, const std::string& v) { s.plant.tau_h_s = parse_double(k, v); }},
        {"plant.dt_s",
         [&](const std::string& k, const std::string& v) { s.plant.dt_s = parse_double(k, v); }},

        {"bess.enabled",
         [&](const std::string& k, const std::string& v) {
             bess_enabled_explicit = true;
             bess_enabled_value = parse_bool(k, v);
         }},
        {"bess.capacity_kwh",
         [&](const std::string& k, const std::string& v) { s.bess->capacity_kwh = parse_double(k, v); }},
        {"bess.max_charge_kw",
         [&](const std::string& k, const std::string& v) { s.bess->max_charge_kw = parse_double(k, v); }},
        {"bess.max_discharge_kw",
         [&](const std::string& k, const std::string& v) {
             s.bess->max_discharge_kw = parse_double(k, v);
         }},
        {"bess.soe_min",
         [&](const std::string& k, const std::string& v) { s.bess->soe_min = parse_double(k, v); }},
        {"bess.soe_max",
         [&](const std::string& k, const std::string& v) { s.bess->soe_max = parse_double(k, v); }},
        {"bess.eta_ch",
         [&](const std::string& k, const std::string& v) { s.bess->eta_ch = parse_double(k, v); }},
        {"bess.eta_dch",
         [&](const std::string& k, const std::string& v) { s.bess->eta_dch = parse_double(k, v); }},
        {"bess.soe_initial",
         [&](const std::string& k, const std::string& v) { s.bess->soe_initial = parse_double(k, v); }},
        {"bess.ttc.ocv0_v",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.ocv0_v = parse_double(k, v); }},
        {"bess.ttc.ocv_slope_v",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.ocv_slope_v = parse_double(k, v); }},
        {"bess.ttc.r_s_ohm",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.r_s_ohm = parse_double(k, v); }},
        {"bess.ttc.r1_ohm",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.r_ohm[0] = parse_double(k, v); }},
        {"bess.ttc.c1_f",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.c_f[0] = parse_double(k, v); }},
        {"bess.ttc.r2_ohm",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.r_ohm[1] = parse_double(k, v); }},
        {"bess.ttc.c2_f",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.c_f[1] = parse_double(k, v); }},
        {"bess.ttc.r3_ohm",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.r_ohm[2] = parse_double(k, v); }},
        {"bess.ttc.c3_f",
         [&](const std::string& k, const std::string& v) { s.bess->ttc.c_f[2] = parse_double(k, v); }},
        {"bess.cap.b_rated_kw",
         [&](const std::string& k, const std::string& v) {
             s.bess->capability.b_rated_kw = parse_double(k, v);
         }},
        {"bess.cap.v_dc_min_v",
         [&](const std::string& k, const std::string& v) {
             s.bess->capability.v_dc_min_v = parse_double(k, v);
         }},
        {"bess.cap.v_dc_max_v",
         [&](const std::string& k, const std::string& v) {
             s.bess->capability.v_dc_max_v = parse_double(k, v);
         }},
        {"bess.cap.soe_derate_band",
         [&](const std::string& k, const std::string& v) {
             s.bess->capability.soe_derate_band = parse_double(k, v);
         }},

        {"controller.kind",
         [&](const std::string& k, const std::string& v) {
             if (v == "hydro_only") s.controller.type = control::ControllerType::HydroOnly;
             else if (v == "dbf") s.controller.type = control::ControllerType::Dbf;
             else if (v == "dlmpc") s.controller.type = control::ControllerType::Dlmpc;
             else throw ConfigError("scenario: key '" + k + "' expects hydro_only|dbf|dlmpc");
         }},
        {"controller.dbf_threshold_mhz",
         [&](const std::string& k, const std::string& v) {
             s.controller.dbf_threshold_hz = parse_double(k, v) / 1000.0;
         }},
        {"controller.gamma",
         [&](const std::string& k, const std::string& v) { s.controller.gamma = parse_double(k, v); }},
        {"controller.horizon",
         [&](const std::string& k, const std::string& v) {
             s.controller.horizon = static_cast<int>(parse_long(k, v));
         }},
        {"controller.fidelity",
         [&](const std::string& k, const std::string& v) {
             if (v == "frozen")
                 s.controller.fidelity = control::BatteryModelFidelity::FrozenVoltage;
             else if (v == "successive_linearization")
                 s.controller.fidelity = control::BatteryModelFidelity::SuccessiveLinearization;
             else
                 throw ConfigError("scenario: key '" + k +
                                   "' expects frozen|successive_linearization");
         }},
        {"controller.soe_margin",
         [&](const std::string& k, const std::string& v) {
             s.controller.soe_margin = parse_double(k, v);
         }},
        {"controller.baseline_weight",
         [&](const std::string& k, const std::string& v) {
             s.controller.baseline_weight = parse_double(k, v);
         }},
        {"controller.qp_dump_dir",
         [&](const std::string&, const std::string& v) { s.controller.qp_dump_dir = v; }},

        {"forecast.kind",
         [&](const std::string& k, const std::string& v) {
             if (v == "persistence") s.forecast_kind = ForecastProviderKind::Persistence;
             else if (v == "seasonal_naive24") s.forecast_kind = ForecastProviderKind::SeasonalNaive24;
             else if (v == "seasonal_ar") s.forecast_kind = ForecastProviderKind::SeasonalAR;
             else if (v == "oracle") s.forecast_kind = ForecastProviderKind::Oracle;
             else if (v == "zero") s.forecast_kind = ForecastProviderKind::Zero;
             else
                 throw ConfigError("scenario: key '" + k +
                                   "' expects persistence|seasonal_naive24|seasonal_ar|oracle|zero");
         }},
        {"forecast.level",
         [&](const std::string& k, const std::string& v) { s.forecast_level = parse_double(k, v); }},
    };

    s.bess.emplace();  // filled in place; dropped below when disabled
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("scenario: line " + std::to_string(line_no) + " is not key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = handlers.find(key);
        if (it == handlers.end())
            throw ConfigError("scenario: unknown key '" + key + "' at line " +
                              std::to_string(line_no));
        it->second(key, value);
    }

    const bool wants_bess = bess_enabled_explicit
                                ? bess_enabled_value
                                : s.controller.type != control::ControllerType::HydroOnly;
    if (!wants_bess) s.bess.reset();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string format_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "scenario.name=" << s.name << "\n";
    out << "scenario.trace=" << s.trace_path << "\n";
    out << "scenario.duration_h=" << fmt(s.duration_h) << "\n";
    out << "scenario.seed=" << s.seed << "\n";
    out << "scenario.output_dir=" << s.output_dir << "\n";
    out << "scenario.eps_move_kw=" << fmt(s.eps_move_kw) << "\n";

    out << "plant.sigma_f_kw_per_hz=" << fmt(s.plant.sigma_f_kw_per_hz) << "\n";
    out << "plant.f_nominal_hz=" << fmt(s.plant.f_nominal_hz) << "\n";
    out << "plant.deadband_hz=" << fmt(s.plant.deadband_hz) << "\n";
    out << "plant.dispatch_kw=";
    for (std::size_t i = 0; i < s.plant.dispatch_kw.size(); ++i) {
        if (i) out << ",";
        out << fmt(s.plant.dispatch_kw[i]);
    }
    out << "\n";
    out << "plant.h_min_kw=" << fmt(s.plant.h_min_kw) << "\n";
    out << "plant.h_max_kw=" << fmt(s.plant.h_max_kw) << "\n";
    out << "plant.h_dot_max_kw_per_s=" << fmt(s.plant.h_dot_max_kw_per_s) << "\n";
    out << "plant.tau_h_s=" << fmt(s.plant.tau_h_s) << "\n";
    out << "plant.dt_s=" << fmt(s.plant.dt_s) << "\n";

    out << "bess.enabled=" << (s.bess ? "true" : "false") << "\n";
    if (s.bess) {
        const BessConfig& b = *s.bess;
        out << "bess.capacity_kwh=" << fmt(b.capacity_kwh) << "\n";
        out << "bess.max_charge_kw=" << fmt(b.max_charge_kw) << "\n";
        out << "bess.max_discharge_kw=" << fmt(b.max_discharge_kw) << "\n";
        out << "bess.soe_min=" << fmt(b.soe_min) << "\n";
        out << "bess.soe_max=" << fmt(b.soe_max) << "\n";
        out << "bess.eta_ch=" << fmt(b.eta_ch) << "\n";
        out << "bess.eta_dch=" << fmt(b.eta_dch) << "\n";
        out << "bess.soe_initial=" << fmt(b.soe_initial) << "\n";
        out << "bess.ttc.ocv0_v=" << fmt(b.ttc.ocv0_v) << "\n";
        out << "bess.ttc.ocv_slope_v=" << fmt(b.ttc.ocv_slope_v) << "\n";
        out << "bess.ttc.r_s_ohm=" << fmt(b.ttc.r_s_ohm) << "\n";
        out << "bess.ttc.r1_ohm=" << fmt(b.ttc.r_ohm[0]) << "\n";
        out << "bess.ttc.c1_f=" << fmt(b.ttc.c_f[0]) << "\n";
        out << "bess.ttc.r2_ohm=" << fmt(b.ttc.r_ohm[1]) << "\n";
        out << "bess.ttc.c2_f=" << fmt(b.ttc.c_f[1]) << "\n";
        out << "bess.ttc.r3_ohm=" << fmt(b.ttc.r_ohm[2]) << "\n";
        out << "bess.ttc.c3_f=" << fmt(b.ttc.c_f[2]) << "\n";
        out << "bess.cap.b_rated_kw=" << fmt(b.capability.b_rated_kw) << "\n";
        out << "bess.cap.v_dc_min_v=" << fmt(b.capability.v_dc_min_v) << "\n";
        out << "bess.cap.v_dc_max_v=" << fmt(b.capability.v_dc_max_v) << "\n";
        out << "bess.cap.soe_derate_band=" << fmt(b.capability.soe_derate_band) << "\n";
    }

    out << "controller.kind=" << control::controller_type_name(s.controller.type) << "\n";
    out << "controller.dbf_threshold_mhz=" << fmt(s.controller.dbf_threshold_hz * 1000.0) << "\n";
    out << "controller.gamma=" << fmt(s.controller.gamma) << "\n";
    out << "controller.horizon=" << s.controller.horizon << "\n";
    out << "controller.fidelity="
        << (s.controller.fidelity == control::BatteryModelFidelity::FrozenVoltage
                ? "frozen"
                : "successive_linearization")
        << "\n";
    out << "controller.soe_margin=" << fmt(s.controller.soe_margin) << "\n";
    out << "controller.baseline_weight=" << fmt(s.controller.baseline_weight) << "\n";
    if (!s.controller.qp_dump_dir.empty())
        out << "controller.qp_dump_dir=" << s.controller.qp_dump_dir << "\n";

    switch (s.forecast_kind) {
        case ForecastProviderKind::Persistence: out << "forecast.kind=persistence\n"; break;
        case ForecastProviderKind::SeasonalNaive24: out << "forecast.kind=seasonal_naive24\n"; break;
        case ForecastProviderKind::SeasonalAR: out << "forecast.kind=seasonal_ar\n"; break;
        case ForecastProviderKind::Oracle: out << "forecast.kind=oracle\n"; break;
        case ForecastProviderKind::Zero: out << "forecast.kind=zero\n"; break;
    }
    out << "forecast.level=" << fmt(s.forecast_level) << "\n";
    return out.str();
}

void validate_scenario(const Scenario& s) {
    ValidationReport r = validate_plant(s.plant);
    if (s.bess) {
        const ValidationReport rb = validate_bess(*s.bess);
        r.violations.insert(r.violations.end(), rb.violations.begin(), rb.violations.end());
    }
    if (!(s.duration_h > 0)) r.violations.push_back("scenario: duration_h > 0");
    if (s.controller.gamma < 0) r.violations.push_back("controller: gamma >= 0");
    if (s.controller.horizon < 1) r.violations.push_back("controller: horizon >= 1");
    if (s.controller.type == control::ControllerType::Dbf && !(s.controller.dbf_threshold_hz > 0))
        r.violations.push_back("controller: dbf threshold > 0");
    if (s.controller.baseline_weight < 0) r.violations.push_back("controller: baseline_weight >= 0");
    if (s.bess) {
        const double half_band = 0.5 * (s.bess->soe_max - s.bess->soe_min);
        if (s.controller.soe_margin < 0 || s.controller.soe_margin >= half_band)
            r.violations.push_back("controller: soe_margin in [0, (SOE_max - SOE_min)/2)");
    }
    if (s.controller.type != control::ControllerType::HydroOnly && !s.bess)
        r.violations.push_back("scenario: battery controllers require bess.enabled=true");
    if (!(s.forecast_level > 0 && s.forecast_level < 1))
        r.violations.push_back("forecast: level in (0, 1)");

    if (!r.ok()) {
        std::string msg = "scenario validation failed:";
        for (const std::string& m : r.violations) msg += "\n  - " + m;
        throw ConfigError(msg);
    }
}

} // namespace hydrofcr

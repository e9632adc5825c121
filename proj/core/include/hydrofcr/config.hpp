#pragma once

#include <string>
#include <vector>

namespace hydrofcr {

/// Three-time-constant equivalent-circuit cell model: a series resistance
/// plus three parallel RC branches, with a linear open-circuit voltage.
struct TtcParams {
    double ocv0_v = 620.0;      ///< open-circuit voltage at SOE = 0
    double ocv_slope_v = 60.0;  ///< OCV rise from SOE 0 to 1
    double r_s_ohm = 0.05;      ///< series resistance
    double r_ohm[3] = {0.02, 0.03, 0.04};
    double c_f[3] = {500.0, 5000.0, 50000.0};
};

/// Converter capability-curve parameters: a symmetric rated bound derated
/// linearly near the SOE limits and near the DC voltage window edges.
struct CapabilityParams {
    double b_rated_kw = 9.0;
    double v_dc_min_v = 560.0;
    double v_dc_max_v = 720.0;
    double soe_derate_band = 0.05;  ///< fractional SOE width of the derating ramp
};

struct BessConfig {
    double capacity_kwh = 9.0;
    double max_charge_kw = 9.0;
    double max_discharge_kw = 9.0;
    double soe_min = 0.1;
    double soe_max = 0.9;
    double eta_ch = 0.95;
    double eta_dch = 0.95;
    double soe_initial = 0.5;
    TtcParams ttc;
    CapabilityParams capability;
};

struct PlantConfig {
    double sigma_f_kw_per_hz = 125.0;
    double f_nominal_hz = 50.0;
    double deadband_hz = 0.002;
    /// Hourly dispatch plan; hour g uses dispatch_kw[min(g, size-1)].
    std::vector<double> dispatch_kw = {27.0};
    double h_min_kw = 5.0;   // not stated for the reduced-scale unit; configurable
    double h_max_kw = 50.0;
    double h_dot_max_kw_per_s = 5.0;
    double tau_h_s = 1.5;
    double dt_s = 1.0;

    double dispatch_for_hour(long hour) const {
        if (dispatch_kw.empty()) return 0.0;
        const std::size_t i = hour < 0 ? 0
            : std::min<std::size_t>(static_cast<std::size_t>(hour), dispatch_kw.size() - 1);
        return dispatch_kw[i];
    }
};

/// Report-style validation result: one entry per violated invariant.
struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_config(const PlantConfig& plant, const BessConfig& bess);
ValidationReport validate_plant(const PlantConfig& plant);
ValidationReport validate_bess(const BessConfig& bess);

/// Reduced-scale defaults: 125 kW/Hz droop, 2 mHz dead band, flat 27 kW
/// dispatch, 50 kW unit.
PlantConfig default_plant_config();

/// Battery sized with a power-to-energy ratio of one.
BessConfig default_bess_config(double rating_kw);

} // namespace hydrofcr

#include "hydrofcr/config.hpp"

#include <cmath>
#include <sstream>

namespace hydrofcr {

namespace {

void require(std::vector<std::string>& out, bool cond, const std::string& msg) {
    if (!cond) out.push_back(msg);
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

ValidationReport validate_plant(const PlantConfig& p) {
    ValidationReport r;
    auto& v = r.violations;
    require(v, finite(p.sigma_f_kw_per_hz) && p.sigma_f_kw_per_hz > 0, "plant: sigma_f > 0");
    require(v, finite(p.f_nominal_hz) && p.f_nominal_hz >= 45.0 && p.f_nominal_hz <= 55.0,
            "plant: f_nominal in [45, 55] Hz");
    require(v, finite(p.deadband_hz) && p.deadband_hz >= 0, "plant: deadband >= 0");
    require(v, finite(p.dt_s) && p.dt_s > 0, "plant: dt > 0");
    require(v, finite(p.h_min_kw) && finite(p.h_max_kw) && p.h_min_kw < p.h_max_kw,
            "plant: H_min < H_max");
    require(v, finite(p.h_dot_max_kw_per_s) && p.h_dot_max_kw_per_s > 0, "plant: H_dot_max > 0");
    require(v, finite(p.tau_h_s) && p.tau_h_s > p.dt_s / 2.0, "plant: tau_H > dt/2");
    require(v, !p.dispatch_kw.empty(), "plant: dispatch plan nonempty");
    for (std::size_t i = 0; i < p.dispatch_kw.size(); ++i) {
        if (!finite(p.dispatch_kw[i]) || p.dispatch_kw[i] < p.h_min_kw ||
            p.dispatch_kw[i] > p.h_max_kw) {
            std::ostringstream os;
            os << "plant: dispatch[" << i << "] within [H_min, H_max]";
            v.push_back(os.str());
        }
    }
    return r;
}

ValidationReport validate_bess(const BessConfig& b) {
    ValidationReport r;
    auto& v = r.violations;
    require(v, finite(b.capacity_kwh) && b.capacity_kwh > 0, "bess: C_B > 0");
    require(v, finite(b.max_charge_kw) && b.max_charge_kw >= 0, "bess: B_max_charge >= 0");
    require(v, finite(b.max_discharge_kw) && b.max_discharge_kw >= 0, "bess: B_max_discharge >= 0");
    require(v, b.soe_min >= 0 && b.soe_min < b.soe_max && b.soe_max <= 1.0,
            "bess: SOE_min < SOE_max within [0, 1]");
    require(v, b.eta_ch > 0.5 && b.eta_ch <= 1.0, "bess: eta_ch efficiency in (0.5, 1]");
    require(v, b.eta_dch > 0.5 && b.eta_dch <= 1.0, "bess: eta_dch efficiency in (0.5, 1]");
    require(v, b.soe_initial >= 0 && b.soe_initial <= 1.0, "bess: SOE_initial in [0, 1]");

    const TtcParams& t = b.ttc;
    require(v, finite(t.ocv0_v) && t.ocv0_v > 0, "bess.ttc: ocv0 > 0");
    require(v, finite(t.ocv_slope_v), "bess.ttc: ocv_slope finite");
    require(v, finite(t.r_s_ohm) && t.r_s_ohm >= 0, "bess.ttc: R_s >= 0");
    for (int i = 0; i < 3; ++i) {
        require(v, finite(t.r_ohm[i]) && t.r_ohm[i] >= 0, "bess.ttc: branch resistance >= 0");
        require(v, finite(t.c_f[i]) && t.c_f[i] > 0, "bess.ttc: branch capacitance > 0");
    }

    const CapabilityParams& c = b.capability;
    require(v, finite(c.b_rated_kw) && c.b_rated_kw > 0, "bess.capability: B_rated > 0");
    require(v, finite(c.v_dc_min_v) && finite(c.v_dc_max_v) && c.v_dc_min_v < c.v_dc_max_v,
            "bess.capability: v_dc_min < v_dc_max");
    require(v, c.soe_derate_band >= 0 && c.soe_derate_band <= 0.2,
            "bess.capability: soe_derate_band in [0, 0.2]");
    return r;
}

ValidationReport validate_config(const PlantConfig& plant, const BessConfig& bess) {
    ValidationReport r = validate_plant(plant);
    ValidationReport rb = validate_bess(bess);
    r.violations.insert(r.violations.end(), rb.violations.begin(), rb.violations.end());
    return r;
}

PlantConfig default_plant_config() {
    return PlantConfig{};
}

BessConfig default_bess_config(double rating_kw) {
    BessConfig b;
    b.capacity_kwh = rating_kw;
    b.max_charge_kw = rating_kw;
    b.max_discharge_kw = rating_kw;
    b.capability.b_rated_kw = rating_kw;
    return b;
}

} // namespace hydrofcr

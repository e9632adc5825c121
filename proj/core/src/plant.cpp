#include "hydrofcr/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hydrofcr/errors.hpp"

namespace hydrofcr::plant {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

} // namespace

double ocv_v(const TtcParams& ttc, double soe) {
    return ttc.ocv0_v + ttc.ocv_slope_v * soe;
}

TtcDiscrete discretize_ttc(const TtcParams& ttc, double dt_s) {
    TtcDiscrete d{};
    d.psi_i_ohm = ttc.r_s_ohm;
    for (int i = 0; i < 3; ++i) {
        const double tau = ttc.r_ohm[i] * ttc.c_f[i];
        if (tau <= 0.0) {
            // zero-resistance branch degenerates to a wire
            d.decay[i] = 0.0;
            d.gain[i] = 0.0;
        } else {
            d.decay[i] = std::exp(-dt_s / tau);
            d.gain[i] = ttc.r_ohm[i] * (1.0 - d.decay[i]);
        }
        d.psi_i_ohm += d.gain[i];
    }
    return d;
}

HydroState hydro_step(HydroState state, double h_set_kw, const PlantConfig& cfg) {
    const double a = cfg.dt_s / cfg.tau_h_s;
    const double target = clamp(h_set_kw, cfg.h_min_kw, cfg.h_max_kw);
    double h_next = (1.0 - a) * state.h_kw + a * target;
    const double max_move = cfg.h_dot_max_kw_per_s * cfg.dt_s;
    h_next = state.h_kw + clamp(h_next - state.h_kw, -max_move, max_move);
    state.h_kw = clamp(h_next, cfg.h_min_kw, cfg.h_max_kw);
    return state;
}

BessState bess_step(const BessState& state, double b_set_kw, const BessConfig& cfg, double dt_s) {
    const double dc_kw = b_set_kw >= 0.0 ? b_set_kw * cfg.eta_ch : b_set_kw / cfg.eta_dch;
    const TtcDiscrete ttc = discretize_ttc(cfg.ttc, dt_s);

    // v(i) = v0 + psi*i with v0 the relaxed terminal voltage at zero current
    double v0 = ocv_v(cfg.ttc, state.soe);
    for (int i = 0; i < 3; ++i) v0 += ttc.decay[i] * state.x_rc_v[i];
    const double psi = ttc.psi_i_ohm;
    const double p_w = dc_kw * 1000.0;

    double i_dc;
    if (psi <= 0.0) {
        if (v0 <= 0.0) throw VoltageWindowViolated("bess: nonpositive open-circuit voltage");
        i_dc = p_w / v0;
    } else {
        const double disc = v0 * v0 + 4.0 * psi * p_w;
        if (disc < 0.0) {
            std::ostringstream os;
            os << "bess: demanded DC power " << dc_kw << " kW exceeds the deliverable limit "
               << -v0 * v0 / (4.0 * psi) / 1000.0 << " kW";
            throw VoltageWindowViolated(os.str());
        }
        i_dc = (-v0 + std::sqrt(disc)) / (2.0 * psi);
    }

    const double v_dc = v0 + psi * i_dc;
    const double guard_lo = 0.9 * cfg.capability.v_dc_min_v;
    const double guard_hi = 1.1 * cfg.capability.v_dc_max_v;
    if (v_dc < guard_lo || v_dc > guard_hi) {
        std::ostringstream os;
        os << "bess: DC voltage " << v_dc << " V outside guard band [" << guard_lo << ", "
           << guard_hi << "] V";
        throw VoltageWindowViolated(os.str());
    }

    BessState next = state;
    for (int i = 0; i < 3; ++i)
        next.x_rc_v[i] = ttc.decay[i] * state.x_rc_v[i] + ttc.gain[i] * i_dc;
    next.v_dc = v_dc;
    next.i_dc = i_dc;

    const double delta_soe = (v_dc * i_dc) * dt_s / 3.6e6 / cfg.capacity_kwh;
    const double soe_raw = state.soe + delta_soe;
    next.soe = clamp(soe_raw, 0.0, 1.0);
    next.soe_saturated = (soe_raw != next.soe);
    return next;
}

std::pair<double, double> capability(const BessState& state, const BessConfig& cfg) {
    const CapabilityParams& c = cfg.capability;
    const double band = c.soe_derate_band;
    double f_ch, f_dch;
    if (band > 0.0) {
        f_ch = clamp((cfg.soe_max - state.soe) / band, 0.0, 1.0);
        f_dch = clamp((state.soe - cfg.soe_min) / band, 0.0, 1.0);
    } else {
        f_ch = state.soe < cfg.soe_max ? 1.0 : 0.0;
        f_dch = state.soe > cfg.soe_min ? 1.0 : 0.0;
    }
    const double v_span = 0.05 * (c.v_dc_max_v - c.v_dc_min_v);
    const double vf = clamp((state.v_dc - c.v_dc_min_v) / v_span, 0.0, 1.0);
    return {-c.b_rated_kw * f_dch * vf, c.b_rated_kw * f_ch * vf};
}

BessState make_bess_state(const BessConfig& cfg, double soe0) {
    BessState s;
    s.soe = clamp(soe0, 0.0, 1.0);
    s.x_rc_v = {0.0, 0.0, 0.0};
    s.v_dc = ocv_v(cfg.ttc, s.soe);
    s.v_ac = 400.0;
    s.i_dc = 0.0;
    return s;
}

} // namespace hydrofcr::plant

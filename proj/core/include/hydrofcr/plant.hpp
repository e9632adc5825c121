#pragma once

#include <array>
#include <utility>

#include "hydrofcr/config.hpp"

namespace hydrofcr::plant {

struct HydroState {
    double h_kw = 0.0;
};

struct BessState {
    double soe = 0.5;
    std::array<double, 3> x_rc_v = {0.0, 0.0, 0.0};  ///< RC branch voltages
    double v_dc = 0.0;
    double v_ac = 400.0;
    double i_dc = 0.0;
    bool soe_saturated = false;  ///< set when the last step clipped SOE to [0, 1]
};

/// Exact exponential discretization of the TTC cell model at step dt:
///   x_i' = decay_i x_i + gain_i i,   v = ocv(SOE) + psi_i * i + sum(x_i').
/// psi_1 of the affine voltage form is the OCV term, evaluated at call time.
struct TtcDiscrete {
    std::array<double, 3> decay;
    std::array<double, 3> gain;   ///< ohm
    double psi_i_ohm;             ///< R_s + sum(gain)
};

double ocv_v(const TtcParams& ttc, double soe);

TtcDiscrete discretize_ttc(const TtcParams& ttc, double dt_s);

/// First-order response to a set-point, with the set-point clamped to the
/// power box and the per-step move clipped to the ramp limit.
HydroState hydro_step(HydroState state, double h_set_kw, const PlantConfig& cfg);

/// Advance the battery truth model by one step. b_set_kw is the AC set-point,
/// positive = charging. Throws VoltageWindowViolated when the demanded power
/// cannot be delivered or the DC voltage leaves the hard guard band.
BessState bess_step(const BessState& state, double b_set_kw, const BessConfig& cfg, double dt_s);

/// Admissible AC power box (b_lo <= 0 <= b_hi) at the given state.
std::pair<double, double> capability(const BessState& state, const BessConfig& cfg);

/// Fresh state at the given SOE with relaxed RC branches.
BessState make_bess_state(const BessConfig& cfg, double soe0);

} // namespace hydrofcr::plant

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hydrofcr/config.hpp"
#include "hydrofcr/forecast.hpp"
#include "hydrofcr/plant.hpp"
#include "hydrofcr/qp.hpp"
#include "hydrofcr/trace.hpp"

namespace hydrofcr::control {

// ---------------------------------------------------------------------------
// Upper layer: hourly SOE manager
// ---------------------------------------------------------------------------

struct UpperLayerInput {
    double soe_meas = 0.5;
    forecast::WForecast fc;
    double sigma_f_kw_per_hz = 125.0;
    BessConfig bess;
};

struct UpperLayerResult {
    double b0_kw = 0.0;        ///< hourly offset, positive = charging
    double b0_plus_kw = 0.0;   ///< charging component
    double b0_minus_kw = 0.0;  ///< discharging component
    double predicted_soe_end = 0.0;
    double soe_up = 0.0;       ///< band edge from the forecast half-widths
    double soe_down = 0.0;
    bool feasible = true;
    bool solved_by_qp = true;
};

/// Smallest constant hourly power offset keeping the SOE band inside its
/// limits: the charge/discharge-split QP, with a closed-form fallback when
/// the instance is infeasible (the offset then saturates toward feasibility).
UpperLayerResult solve_upper_layer(const UpperLayerInput& input);

/// Closed-form route over the one-dimensional offset; the QP path must agree
/// with this within solver tolerance on feasible instances.
UpperLayerResult solve_upper_layer_analytic(const UpperLayerInput& input);

// ---------------------------------------------------------------------------
// Shared droop arithmetic
// ---------------------------------------------------------------------------

/// P_disp + dead-banded (f_nominal - f_hat) * sigma_f.
double droop_target(double f_hat_hz, double p_disp_kw, const PlantConfig& plant);

// ---------------------------------------------------------------------------
// Controller selection
// ---------------------------------------------------------------------------

enum class ControllerType { HydroOnly, Dbf, Dlmpc };

enum class BatteryModelFidelity { FrozenVoltage, SuccessiveLinearization };

struct ControllerKind {
    ControllerType type = ControllerType::Dlmpc;
    double dbf_threshold_hz = 0.040;
    double gamma = 0.4;
    int horizon = 30;
    BatteryModelFidelity fidelity = BatteryModelFidelity::FrozenVoltage;
    double soe_margin = 0.005;       ///< tightening of the SOE box inside the lower layer
    double baseline_weight = 1e-4;   ///< weight pulling the battery toward its hourly offset
    std::string qp_dump_dir;         ///< when nonempty, dump the first lower-layer QP as CSV
};

const char* controller_type_name(ControllerType t);

// ---------------------------------------------------------------------------
// Lower layer: receding-horizon set-point splitting QP
// ---------------------------------------------------------------------------

struct LowerLayerInput {
    long k = 0;
    std::vector<double> f_hat_hz;   ///< forecast horizon, length p
    std::vector<double> p_disp_kw;  ///< PCC dispatch over the horizon (unshifted), length p
    double h_meas_kw = 27.0;
    plant::BessState bess_state;
    double b0_kw = 0.0;
    double h_anchor_jump_kw = 0.0;  ///< dispatch-shift feed-forward applied at this step
    double gamma = 0.4;
    int p = 30;
    double soe_margin = 0.005;
    double baseline_weight = 1e-4;
    BatteryModelFidelity fidelity = BatteryModelFidelity::FrozenVoltage;
};

/// Index bookkeeping for the stacked decision vector [h_0..h_{p-1}, b_0..
/// b_{p-1}, u_0..u_{p-1}] and the fixed constraint-row layout.
struct LlLayout {
    int p = 30;

    Eigen::Index h(int i) const { return i; }
    Eigen::Index b(int i) const { return p + i; }
    Eigen::Index u(int i) const { return 2 * p + i; }
    Eigen::Index num_vars() const { return 3 * p; }

    Eigen::Index row_dh_upper(int i) const { return i; }
    Eigen::Index row_dh_lower(int i) const { return p + i; }
    Eigen::Index row_u_box(int i) const { return 2 * p + i; }
    Eigen::Index row_h_box(int i) const { return 3 * p + i; }
    Eigen::Index row_hset_box(int i) const { return 4 * p + i; }
    Eigen::Index row_first_ramp() const { return 5 * p; }
    Eigen::Index row_b_box(int i) const { return 5 * p + 1 + i; }
    Eigen::Index row_soe(int i) const { return 6 * p + 1 + i; }
    Eigen::Index num_rows() const { return 7 * p + 1; }
};

qp::Problem build_ll_qp(const LowerLayerInput& input, const PlantConfig& plant,
                        const BessConfig& bess);

/// Decoded lower-layer solution: response, set-point and slack trajectories.
struct LlSolution {
    std::vector<double> h_kw;      ///< response trajectory
    std::vector<double> h_set_kw;  ///< recovered set-points
    std::vector<double> b_kw;
    std::vector<double> u_kw;
    double sum_abs_dh_kw = 0.0;    ///< includes the anchored first delta
};

LlSolution decode_ll_solution(const LowerLayerInput& input, const PlantConfig& plant,
                              const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Per-step controller operations
// ---------------------------------------------------------------------------

StepDecision step_hydro_only(long k, double f_meas_hz, double p_disp_kw,
                             const PlantConfig& plant);

/// Dead-band-filter split: deviations within the threshold go to the battery,
/// the exceedance goes to the hydro unit. Capability-clipped battery power is
/// not re-routed.
StepDecision step_dbf(long k, double f_meas_hz, double p_disp_kw, double threshold_hz,
                      double b0_kw, std::pair<double, double> capability_kw,
                      const PlantConfig& plant);

// ---------------------------------------------------------------------------
// Hour boundary
// ---------------------------------------------------------------------------

struct HourBoundaryResult {
    UpperLayerResult upper;
    double b0_kw = 0.0;
    double dispatch_shift_kw = 0.0;  ///< hydro dispatch becomes P_disp + B0
    bool forecast_fallback = false;
    forecast::WForecast used_forecast;
};

/// Hourly SOE-manager invocation: forecast the next hour from the realized
/// history, run the upper layer, and shift the hydro dispatch by the offset.
/// Insufficient history degrades to persistence and then to a zero forecast.
HourBoundaryResult hour_boundary(long g, double soe_meas,
                                 const forecast::HourlyIntegralSeries& history,
                                 const forecast::ForecastModel& model, const PlantConfig& plant,
                                 const BessConfig& bess);

// ---------------------------------------------------------------------------
// Stateful controllers driven by the scenario runner
// ---------------------------------------------------------------------------

class Controller {
public:
    virtual ~Controller() = default;

    virtual void on_hour_boundary(long g, double soe_meas, const forecast::WForecast& fc);

    virtual StepDecision step(long k, double f_meas_hz, double p_disp_kw, double h_meas_kw,
                              const plant::BessState* bess_state) = 0;

    double current_b0() const { return b0_; }
    const std::optional<UpperLayerResult>& last_upper() const { return last_upper_; }
    long fallback_count() const { return fallbacks_; }
    long clip_count() const { return clips_; }

protected:
    double b0_ = 0.0;
    double pending_jump_kw = 0.0;
    long fallbacks_ = 0;
    long clips_ = 0;
    std::optional<UpperLayerResult> last_upper_;
};

std::unique_ptr<Controller> make_controller(const ControllerKind& kind, const PlantConfig& plant,
                                            const std::optional<BessConfig>& bess);

} // namespace hydrofcr::control

#include "hydrofcr/control.hpp"

#include <algorithm>
#include <cmath>

#include "hydrofcr/errors.hpp"

namespace hydrofcr::control {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double sign(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Efficiency adjustment of the hourly integral: delivered energy drains
/// more than its AC value, absorbed energy stores less.
double adjust_for_efficiency(double w, const BessConfig& bess) {
    return w >= 0.0 ? w / bess.eta_dch : w * bess.eta_ch;
}

struct UpperLayerGeometry {
    double e_fcr_kwh;   ///< AC-side regulating energy drawn from the battery
    double e0_lo_kwh;   ///< feasible offset-energy interval
    double e0_hi_kwh;
    double e0_power_lo_kwh;  ///< offset energy reachable within the power limits
    double e0_power_hi_kwh;
};

UpperLayerGeometry upper_layer_geometry(const UpperLayerInput& in) {
    const BessConfig& b = in.bess;
    const double sigma = in.sigma_f_kw_per_hz;
    UpperLayerGeometry g{};
    g.e_fcr_kwh = sigma * adjust_for_efficiency(in.fc.w_hat, b);
    // soe_end(E0) = soe + (E0 - e_fcr)/C; band edges add +/- sigma*half_width/C
    g.e0_hi_kwh = b.capacity_kwh * (b.soe_max - in.soe_meas) + g.e_fcr_kwh - sigma * in.fc.w_down;
    g.e0_lo_kwh = b.capacity_kwh * (b.soe_min - in.soe_meas) + g.e_fcr_kwh + sigma * in.fc.w_up;
    g.e0_power_hi_kwh = b.eta_ch * b.max_charge_kw;
    g.e0_power_lo_kwh = -b.max_discharge_kw / b.eta_dch;
    return g;
}

UpperLayerResult finish_upper_layer(const UpperLayerInput& in, const UpperLayerGeometry& g,
                                    double b0_plus, double b0_minus, bool from_qp) {
    const BessConfig& b = in.bess;
    UpperLayerResult r;
    r.b0_plus_kw = std::max(0.0, b0_plus);
    r.b0_minus_kw = std::max(0.0, b0_minus);
    // shrink both components along the E0-preserving direction until one is zero
    const double t = std::min(r.b0_plus_kw * b.eta_ch, r.b0_minus_kw / b.eta_dch);
    if (t > 0.0) {
        r.b0_plus_kw = std::max(0.0, r.b0_plus_kw - t / b.eta_ch);
        r.b0_minus_kw = std::max(0.0, r.b0_minus_kw - t * b.eta_dch);
    }
    r.b0_kw = r.b0_plus_kw - r.b0_minus_kw;
    const double e0 = b.eta_ch * r.b0_plus_kw - r.b0_minus_kw / b.eta_dch;
    r.predicted_soe_end = in.soe_meas + (e0 - g.e_fcr_kwh) / b.capacity_kwh;
    r.soe_up = r.predicted_soe_end + in.sigma_f_kw_per_hz * in.fc.w_down / b.capacity_kwh;
    r.soe_down = r.predicted_soe_end - in.sigma_f_kw_per_hz * in.fc.w_up / b.capacity_kwh;
    const double tol = 1e-9 * std::max({1.0, std::abs(g.e0_lo_kwh), std::abs(g.e0_hi_kwh)});
    r.feasible = (e0 >= g.e0_lo_kwh - tol) && (e0 <= g.e0_hi_kwh + tol);
    r.solved_by_qp = from_qp;
    return r;
}

} // namespace

UpperLayerResult solve_upper_layer_analytic(const UpperLayerInput& input) {
    const BessConfig& b = input.bess;
    const UpperLayerGeometry g = upper_layer_geometry(input);

    double e0;
    if (g.e0_lo_kwh <= g.e0_hi_kwh) {
        e0 = clamp(0.0, g.e0_lo_kwh, g.e0_hi_kwh);
    } else {
        // band constraints conflict: split the violation evenly
        e0 = 0.5 * (g.e0_lo_kwh + g.e0_hi_kwh);
    }
    e0 = clamp(e0, g.e0_power_lo_kwh, g.e0_power_hi_kwh);

    double b0_plus = 0.0, b0_minus = 0.0;
    if (e0 >= 0.0)
        b0_plus = e0 / b.eta_ch;
    else
        b0_minus = -e0 * b.eta_dch;
    return finish_upper_layer(input, g, b0_plus, b0_minus, false);
}

UpperLayerResult solve_upper_layer(const UpperLayerInput& input) {
    const BessConfig& b = input.bess;
    const UpperLayerGeometry g = upper_layer_geometry(input);

    qp::Problem prob;
    prob.P.setConstant(2, 2, 2.0);
    prob.q = Eigen::VectorXd::Zero(2);
    prob.A.resize(3, 2);
    prob.A << b.eta_ch, -1.0 / b.eta_dch,
              1.0, 0.0,
              0.0, 1.0;
    prob.l.resize(3);
    prob.u.resize(3);
    prob.l << g.e0_lo_kwh, 0.0, 0.0;
    prob.u << g.e0_hi_kwh, b.max_charge_kw, b.max_discharge_kw;

    if (g.e0_lo_kwh > g.e0_hi_kwh) return solve_upper_layer_analytic(input);

    qp::Settings settings;
    settings.eps_abs = 1e-9;
    settings.max_iter = 50000;
    const qp::Solution sol = qp::solve(prob, settings);
    if (sol.status != qp::Status::Solved) return solve_upper_layer_analytic(input);
    return finish_upper_layer(input, g, sol.x[0], sol.x[1], true);
}

double droop_target(double f_hat_hz, double p_disp_kw, const PlantConfig& plant) {
    double df = plant.f_nominal_hz - f_hat_hz;
    if (std::abs(df) <= plant.deadband_hz) df = 0.0;
    return p_disp_kw + df * plant.sigma_f_kw_per_hz;
}

const char* controller_type_name(ControllerType t) {
    switch (t) {
        case ControllerType::HydroOnly: return "hydro_only";
        case ControllerType::Dbf: return "dbf";
        case ControllerType::Dlmpc: return "dlmpc";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Lower-layer QP assembly
// ---------------------------------------------------------------------------

namespace {

double soe_coeff(const BessConfig& bess, double dt_s) {
    const double eta_mid = 0.5 * (bess.eta_ch + 1.0 / bess.eta_dch);
    return eta_mid * dt_s / 3600.0 / bess.capacity_kwh;
}

Eigen::MatrixXd ll_quadratic(const LlLayout& L, double baseline_weight) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(L.num_vars(), L.num_vars());
    for (int i = 0; i < L.p; ++i) {
        P(L.h(i), L.h(i)) += 2.0;
        P(L.b(i), L.b(i)) += 2.0 + 2.0 * baseline_weight;
        P(L.h(i), L.b(i)) += -2.0;
        P(L.b(i), L.h(i)) += -2.0;
    }
    return P;
}

Eigen::MatrixXd ll_constraints(const LlLayout& L, const PlantConfig& plant) {
    const double a = plant.dt_s / plant.tau_h_s;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L.num_rows(), L.num_vars());
    for (int i = 0; i < L.p; ++i) {
        A(L.row_dh_upper(i), L.h(i)) = 1.0;
        A(L.row_dh_upper(i), L.u(i)) = -1.0;
        A(L.row_dh_lower(i), L.h(i)) = 1.0;
        A(L.row_dh_lower(i), L.u(i)) = 1.0;
        if (i > 0) {
            A(L.row_dh_upper(i), L.h(i - 1)) = -1.0;
            A(L.row_dh_lower(i), L.h(i - 1)) = -1.0;
        }
        A(L.row_u_box(i), L.u(i)) = 1.0;
        A(L.row_h_box(i), L.h(i)) = 1.0;
        A(L.row_hset_box(i), L.h(i)) = 1.0;
        if (i > 0) A(L.row_hset_box(i), L.h(i - 1)) = -(1.0 - a);
        A(L.row_b_box(i), L.b(i)) = 1.0;
        for (int j = 0; j <= i; ++j) A(L.row_soe(i), L.b(j)) = 1.0;
    }
    A(L.row_first_ramp(), L.h(0)) = 1.0;
    return A;
}

void ll_vectors(const LowerLayerInput& in, const PlantConfig& plant, const BessConfig& bess,
                const LlLayout& L, Eigen::VectorXd& q, Eigen::VectorXd& l, Eigen::VectorXd& u,
                const std::vector<std::pair<double, double>>* per_step_caps) {
    const double a = plant.dt_s / plant.tau_h_s;
    const double ramp = plant.h_dot_max_kw_per_s * plant.dt_s;
    const double anchor = in.h_meas_kw + in.h_anchor_jump_kw;
    const double c_soe = soe_coeff(bess, plant.dt_s);

    q = Eigen::VectorXd::Zero(L.num_vars());
    l = Eigen::VectorXd::Constant(L.num_rows(), -qp::kInf);
    u = Eigen::VectorXd::Constant(L.num_rows(), qp::kInf);

    const auto frozen_cap = plant::capability(in.bess_state, bess);
    const double soe = in.bess_state.soe;
    const double cum_lo = std::min((bess.soe_min + in.soe_margin - soe) / c_soe, 0.0);
    const double cum_hi = std::max((bess.soe_max - in.soe_margin - soe) / c_soe, 0.0);

    for (int i = 0; i < L.p; ++i) {
        const double target = droop_target(in.f_hat_hz[static_cast<std::size_t>(i)],
                                           in.p_disp_kw[static_cast<std::size_t>(i)], plant);
        q[L.h(i)] = -2.0 * target;
        q[L.b(i)] = 2.0 * target - 2.0 * in.baseline_weight * in.b0_kw;
        q[L.u(i)] = in.gamma;

        u[L.row_dh_upper(i)] = i == 0 ? anchor : 0.0;
        l[L.row_dh_lower(i)] = i == 0 ? anchor : 0.0;
        l[L.row_u_box(i)] = 0.0;
        u[L.row_u_box(i)] = ramp;
        l[L.row_h_box(i)] = plant.h_min_kw;
        u[L.row_h_box(i)] = plant.h_max_kw;
        l[L.row_hset_box(i)] = a * plant.h_min_kw + (i == 0 ? (1.0 - a) * in.h_meas_kw : 0.0);
        u[L.row_hset_box(i)] = a * plant.h_max_kw + (i == 0 ? (1.0 - a) * in.h_meas_kw : 0.0);
        const auto cap = per_step_caps ? (*per_step_caps)[static_cast<std::size_t>(i)] : frozen_cap;
        l[L.row_b_box(i)] = cap.first;
        u[L.row_b_box(i)] = cap.second;
        l[L.row_soe(i)] = cum_lo;
        u[L.row_soe(i)] = cum_hi;
    }
    l[L.row_first_ramp()] = in.h_meas_kw - ramp;
    u[L.row_first_ramp()] = in.h_meas_kw + ramp;
}

/// Propagate the TTC model along a candidate battery trajectory and return
/// the per-step capability boxes at the predicted (SOE, v_dc) points.
std::vector<std::pair<double, double>> predict_capability(const LowerLayerInput& in,
                                                          const PlantConfig& plant,
                                                          const BessConfig& bess,
                                                          const std::vector<double>& b_traj) {
    const plant::TtcDiscrete ttc = plant::discretize_ttc(bess.ttc, plant.dt_s);
    std::vector<std::pair<double, double>> caps;
    caps.reserve(b_traj.size());
    double soe = in.bess_state.soe;
    std::array<double, 3> x = in.bess_state.x_rc_v;
    for (double b_kw : b_traj) {
        const double dc_kw = b_kw >= 0.0 ? b_kw * bess.eta_ch : b_kw / bess.eta_dch;
        double v0 = plant::ocv_v(bess.ttc, soe);
        for (int j = 0; j < 3; ++j) v0 += ttc.decay[j] * x[j];
        double i_dc;
        if (ttc.psi_i_ohm <= 0.0) {
            i_dc = dc_kw * 1000.0 / std::max(v0, 1.0);
        } else {
            const double disc = std::max(v0 * v0 + 4.0 * ttc.psi_i_ohm * dc_kw * 1000.0, 0.0);
            i_dc = (-v0 + std::sqrt(disc)) / (2.0 * ttc.psi_i_ohm);
        }
        const double v = v0 + ttc.psi_i_ohm * i_dc;
        for (int j = 0; j < 3; ++j) x[j] = ttc.decay[j] * x[j] + ttc.gain[j] * i_dc;
        soe = clamp(soe + v * i_dc * plant.dt_s / 3.6e6 / bess.capacity_kwh, 0.0, 1.0);
        plant::BessState probe = in.bess_state;
        probe.soe = soe;
        probe.v_dc = v;
        caps.push_back(plant::capability(probe, bess));
    }
    return caps;
}

} // namespace

qp::Problem build_ll_qp(const LowerLayerInput& input, const PlantConfig& plant,
                        const BessConfig& bess) {
    if (input.p < 1) throw ConfigError("lower layer: horizon must be >= 1");
    if (input.f_hat_hz.size() != static_cast<std::size_t>(input.p) ||
        input.p_disp_kw.size() != static_cast<std::size_t>(input.p))
        throw ConfigError("lower layer: horizon vectors must have length p");

    const LlLayout L{input.p};
    qp::Problem prob;
    prob.P = ll_quadratic(L, input.baseline_weight);
    prob.A = ll_constraints(L, plant);
    ll_vectors(input, plant, bess, L, prob.q, prob.l, prob.u, nullptr);
    return prob;
}

LlSolution decode_ll_solution(const LowerLayerInput& input, const PlantConfig& plant,
                              const Eigen::VectorXd& x) {
    const LlLayout L{input.p};
    const double a = plant.dt_s / plant.tau_h_s;
    LlSolution out;
    out.h_kw.resize(static_cast<std::size_t>(input.p));
    out.h_set_kw.resize(static_cast<std::size_t>(input.p));
    out.b_kw.resize(static_cast<std::size_t>(input.p));
    out.u_kw.resize(static_cast<std::size_t>(input.p));
    double prev_h = input.h_meas_kw;
    for (int i = 0; i < input.p; ++i) {
        const double h = x[L.h(i)];
        out.h_kw[static_cast<std::size_t>(i)] = h;
        out.b_kw[static_cast<std::size_t>(i)] = x[L.b(i)];
        out.u_kw[static_cast<std::size_t>(i)] = x[L.u(i)];
        out.h_set_kw[static_cast<std::size_t>(i)] = (h - (1.0 - a) * prev_h) / a;
        const double anchor = i == 0 ? input.h_meas_kw + input.h_anchor_jump_kw : prev_h;
        out.sum_abs_dh_kw += std::abs(h - anchor);
        prev_h = h;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-step operations
// ---------------------------------------------------------------------------

StepDecision step_hydro_only(long k, double f_meas_hz, double p_disp_kw,
                             const PlantConfig& plant) {
    StepDecision d;
    d.k = k;
    d.p_set_kw = droop_target(f_meas_hz, p_disp_kw, plant);
    d.h_set_kw = clamp(d.p_set_kw, plant.h_min_kw, plant.h_max_kw);
    d.b_set_kw = 0.0;
    return d;
}

StepDecision step_dbf(long k, double f_meas_hz, double p_disp_kw, double threshold_hz,
                      double b0_kw, std::pair<double, double> capability_kw,
                      const PlantConfig& plant) {
    if (!(threshold_hz > 0.0)) throw ConfigError("dbf: threshold must be > 0");
    double df = plant.f_nominal_hz - f_meas_hz;
    if (std::abs(df) <= plant.deadband_hz) df = 0.0;

    const double sigma = plant.sigma_f_kw_per_hz;
    const double dispatch_shifted = p_disp_kw + b0_kw;
    StepDecision d;
    d.k = k;
    d.p_set_kw = p_disp_kw + df * sigma;
    double b;
    if (std::abs(df) <= threshold_hz) {
        b = b0_kw - df * sigma;
        d.h_set_kw = dispatch_shifted;
    } else {
        b = b0_kw - sign(df) * threshold_hz * sigma;
        d.h_set_kw = dispatch_shifted + sign(df) * (std::abs(df) - threshold_hz) * sigma;
    }
    const double b_clipped = clamp(b, capability_kw.first, capability_kw.second);
    d.capability_clipped = b_clipped != b;
    d.b_set_kw = b_clipped;
    d.h_set_kw = clamp(d.h_set_kw, plant.h_min_kw, plant.h_max_kw);
    return d;
}

HourBoundaryResult hour_boundary(long g, double soe_meas,
                                 const forecast::HourlyIntegralSeries& history,
                                 const forecast::ForecastModel& model, const PlantConfig& plant,
                                 const BessConfig& bess) {
    (void)g;
    HourBoundaryResult out;
    forecast::WForecast fc;
    try {
        fc = forecast::predict_next_hour(model, history);
    } catch (const InsufficientData&) {
        out.forecast_fallback = true;
        if (history.values.size() >= 2) {
            const auto persistence =
                forecast::fit(history, forecast::ModelKind::Persistence, model.level);
            fc = forecast::predict_next_hour(persistence, history);
        } else {
            fc.w_hat = history.values.empty() ? 0.0 : history.values.back();
            fc.w_up = 0.0;
            fc.w_down = 0.0;
        }
    }
    out.used_forecast = fc;
    UpperLayerInput in;
    in.soe_meas = soe_meas;
    in.fc = fc;
    in.sigma_f_kw_per_hz = plant.sigma_f_kw_per_hz;
    in.bess = bess;
    out.upper = solve_upper_layer(in);
    out.b0_kw = out.upper.b0_kw;
    out.dispatch_shift_kw = out.upper.b0_kw;
    return out;
}

// ---------------------------------------------------------------------------
// Stateful controllers
// ---------------------------------------------------------------------------

void Controller::on_hour_boundary(long, double, const forecast::WForecast&) {}

namespace {

class HydroOnlyController final : public Controller {
public:
    explicit HydroOnlyController(PlantConfig plant) : plant_(std::move(plant)) {}

    StepDecision step(long k, double f_meas_hz, double p_disp_kw, double,
                      const plant::BessState*) override {
        return step_hydro_only(k, f_meas_hz, p_disp_kw, plant_);
    }

private:
    PlantConfig plant_;
};

class BatteryController : public Controller {
public:
    BatteryController(ControllerKind kind, PlantConfig plant, BessConfig bess)
        : kind_(std::move(kind)), plant_(std::move(plant)), bess_(std::move(bess)) {}

    void on_hour_boundary(long, double soe_meas, const forecast::WForecast& fc) override {
        UpperLayerInput in;
        in.soe_meas = soe_meas;
        in.fc = fc;
        in.sigma_f_kw_per_hz = plant_.sigma_f_kw_per_hz;
        in.bess = bess_;
        const UpperLayerResult r = solve_upper_layer(in);
        const double max_jump = plant_.h_dot_max_kw_per_s * plant_.dt_s;
        pending_jump_kw = clamp(r.b0_kw - b0_, -max_jump, max_jump);
        b0_ = r.b0_kw;
        last_upper_ = r;
    }

protected:
    ControllerKind kind_;
    PlantConfig plant_;
    BessConfig bess_;
};

class DbfController final : public BatteryController {
public:
    using BatteryController::BatteryController;

    StepDecision step(long k, double f_meas_hz, double p_disp_kw, double,
                      const plant::BessState* bess_state) override {
        const auto cap = plant::capability(*bess_state, bess_);
        StepDecision d =
            step_dbf(k, f_meas_hz, p_disp_kw, kind_.dbf_threshold_hz, b0_, cap, plant_);
        if (d.capability_clipped) ++clips_;
        return d;
    }
};

class DlmpcController final : public BatteryController {
public:
    using BatteryController::BatteryController;

    StepDecision step(long k, double f_meas_hz, double p_disp_kw, double h_meas_kw,
                      const plant::BessState* bess_state) override {
        const int p = kind_.horizon;
        LowerLayerInput in;
        in.k = k;
        in.p = p;
        in.f_hat_hz.assign(static_cast<std::size_t>(p), f_meas_hz);
        in.p_disp_kw.assign(static_cast<std::size_t>(p), p_disp_kw);
        in.h_meas_kw = h_meas_kw;
        in.bess_state = *bess_state;
        in.b0_kw = b0_;
        in.h_anchor_jump_kw = pending_jump_kw;
        in.gamma = kind_.gamma;
        in.soe_margin = kind_.soe_margin;
        in.baseline_weight = kind_.baseline_weight;
        in.fidelity = kind_.fidelity;

        const LlLayout L{p};
        if (!solver_) {
            qp::Settings settings;
            settings.eps_abs = 1e-6;
            settings.max_iter = 4000;
            settings.polish = false;
            solver_ = std::make_unique<qp::Solver>(ll_quadratic(L, in.baseline_weight),
                                                   ll_constraints(L, plant_), settings);
        }
        Eigen::VectorXd q, l, u;
        ll_vectors(in, plant_, bess_, L, q, l, u, nullptr);
        solver_->set_vectors(q, l, u);
        if (!kind_.qp_dump_dir.empty() && !dumped_) {
            qp::dump_csv(build_ll_qp(in, plant_, bess_), kind_.qp_dump_dir + "/ll_qp_");
            dumped_ = true;
        }

        qp::Solution sol = have_warm_ ? solver_->solve(warm_x_, warm_y_) : solver_->solve();
        if (in.fidelity == BatteryModelFidelity::SuccessiveLinearization &&
            sol.status == qp::Status::Solved) {
            const LlSolution pass1 = decode_ll_solution(in, plant_, sol.x);
            const auto caps = predict_capability(in, plant_, bess_, pass1.b_kw);
            ll_vectors(in, plant_, bess_, L, q, l, u, &caps);
            solver_->set_vectors(q, l, u);
            sol = solver_->solve(sol.x, sol.y);
        }

        if (sol.status != qp::Status::Solved) {
            ++fallbacks_;
            have_warm_ = false;
            pending_jump_kw = 0.0;
            const auto cap = plant::capability(*bess_state, bess_);
            const double thr =
                std::max(cap.second, 1e-6) / plant_.sigma_f_kw_per_hz;
            StepDecision d = step_dbf(k, f_meas_hz, p_disp_kw, thr, b0_, cap, plant_);
            d.solver_status = 1;
            return d;
        }

        pending_jump_kw = 0.0;
        const LlSolution traj = decode_ll_solution(in, plant_, sol.x);
        const auto cap = plant::capability(*bess_state, bess_);

        StepDecision d;
        d.k = k;
        d.p_set_kw = droop_target(f_meas_hz, p_disp_kw, plant_);
        d.h_set_kw = clamp(traj.h_set_kw.front(), plant_.h_min_kw, plant_.h_max_kw);
        d.b_set_kw = clamp(traj.b_kw.front(), cap.first, cap.second);
        d.objective = sol.objective;

        warm_x_ = sol.x;
        warm_y_ = sol.y;
        shift_warm(L);
        have_warm_ = true;
        return d;
    }

private:
    /// Shift the stored solution one step forward so the next solve starts
    /// from the tail of this one.
    void shift_warm(const LlLayout& L) {
        const auto shift_block = [&](auto index_of) {
            for (int i = 0; i + 1 < L.p; ++i) warm_x_[index_of(i)] = warm_x_[index_of(i + 1)];
        };
        shift_block([&](int i) { return L.h(i); });
        shift_block([&](int i) { return L.b(i); });
        shift_block([&](int i) { return L.u(i); });
        const auto shift_rows = [&](auto row_of) {
            for (int i = 0; i + 1 < L.p; ++i) warm_y_[row_of(i)] = warm_y_[row_of(i + 1)];
        };
        shift_rows([&](int i) { return L.row_dh_upper(i); });
        shift_rows([&](int i) { return L.row_dh_lower(i); });
        shift_rows([&](int i) { return L.row_u_box(i); });
        shift_rows([&](int i) { return L.row_h_box(i); });
        shift_rows([&](int i) { return L.row_hset_box(i); });
        shift_rows([&](int i) { return L.row_b_box(i); });
        shift_rows([&](int i) { return L.row_soe(i); });
    }

    std::unique_ptr<qp::Solver> solver_;
    Eigen::VectorXd warm_x_, warm_y_;
    bool have_warm_ = false;
    bool dumped_ = false;
};

} // namespace

std::unique_ptr<Controller> make_controller(const ControllerKind& kind, const PlantConfig& plant,
                                            const std::optional<BessConfig>& bess) {
    switch (kind.type) {
        case ControllerType::HydroOnly:
            return std::make_unique<HydroOnlyController>(plant);
        case ControllerType::Dbf:
        case ControllerType::Dlmpc:
            if (!bess) throw ConfigError("controller: battery controllers require a BESS config");
            if (kind.type == ControllerType::Dbf)
                return std::make_unique<DbfController>(kind, plant, *bess);
            return std::make_unique<DlmpcController>(kind, plant, *bess);
    }
    throw ConfigError("controller: unknown kind");
}

} // namespace hydrofcr::control

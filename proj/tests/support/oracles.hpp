#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "hydrofcr/config.hpp"
#include "hydrofcr/control.hpp"
#include "hydrofcr/qp.hpp"

namespace hydrofcr::test {

/// Independent reference for the QP module: augmented Lagrangian with an
/// accelerated projected-gradient inner loop. Slow but simple; run to a much
/// tighter tolerance than the solver under test.
struct AlmResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    bool converged = false;
};

AlmResult alm_reference_solve(const qp::Problem& problem, double tol = 1e-10,
                              int max_outer = 300, int max_inner = 20000);

/// Feasible-by-construction random QP: P = M'M (optionally strictly PD), box
/// rows on every variable plus random coupling rows around a feasible point.
qp::Problem random_feasible_qp(std::mt19937_64& rng, int max_n = 20, int max_m = 40);

/// Brute-force scan over the hourly offset at a fixed grid; mirrors the
/// upper-layer contract (efficiency-adjusted forecast, band constraints,
/// minimal |B0|, least-violation saturation when infeasible).
struct UlScanResult {
    double b0_kw = 0.0;
    bool feasible = true;
};

UlScanResult ul_scan_oracle(const control::UpperLayerInput& input, double grid_kw = 0.001);

control::UpperLayerInput random_ul_input(std::mt19937_64& rng);

/// Fine-grid RK4 integration of the continuous TTC branch dynamics under a
/// constant current; returns the terminal voltage sampled every dt_s.
std::vector<double> ttc_ode_response(const TtcParams& ttc, double soe, double i_dc_a,
                                     double dt_s, int steps, int substeps = 1000);

/// Randomized lower-layer instance for the sparsity sweeps.
control::LowerLayerInput random_ll_input(std::mt19937_64& rng, const PlantConfig& plant,
                                         const BessConfig& bess, int p, bool flat_frequency);

} // namespace hydrofcr::test

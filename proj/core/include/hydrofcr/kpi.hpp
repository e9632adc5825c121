#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hydrofcr/config.hpp"

namespace hydrofcr::kpi {

enum RowFlag : std::uint32_t {
    FlagCapabilityClip = 1u << 0,
    FlagSoeSaturated = 1u << 1,
    FlagFallback = 1u << 2,
    FlagUpperInfeasible = 1u << 3,
    FlagForecastFallback = 1u << 4,
};

struct RunLogRow {
    long k = 0;
    double f_hz = 0.0;
    double p_set_kw = 0.0;
    double h_set_kw = 0.0;
    double h_kw = 0.0;
    double b_set_kw = 0.0;
    double b_kw = 0.0;
    double soe = 0.0;
    double v_dc = 0.0;
    std::uint32_t flags = 0;
};

struct RunLog {
    std::string run_id;
    std::string controller;
    double bess_kw = 0.0;  ///< 0 for the hydro-only configuration
    double dt_s = 1.0;
    std::vector<RunLogRow> rows;
    long fallback_count = 0;
    bool aborted = false;
};

struct KpiReport {
    std::string run_id;
    std::string controller;
    double bess_kw = 0.0;
    double te_rms_1s = 0.0;
    double e10 = 0.0;
    double e30 = 0.0;
    double e60 = 0.0;
    double mileage_kw = 0.0;
    long nom = 0;
    double dh_p95 = 0.0;
    long soe_violations = 0;
    long fallbacks = 0;
    double soe_min_seen = 0.0;
    double soe_max_seen = 0.0;
};

/// TE_k = P_set_k - (H_k - B_k), from plant truth.
std::vector<double> tracking_error_series(const RunLog& log);

/// RMS of non-overlapping window means of TE; delta_t must be a multiple of dt.
double energy_error(std::span<const double> te, double delta_t_s, double dt_s);

/// Servo-wear proxies on the hydro set-point: mileage is the summed |dH_set|
/// over moving steps, NoM counts maximal contiguous runs of moving steps.
std::pair<double, long> servo_kpis(const RunLog& log, double eps_move_kw);

/// Empirical quantiles of |dH/dt| of the response trajectory.
std::vector<double> dh_cdf(const RunLog& log, std::span<const double> quantiles);

struct SoeSafety {
    long violation_steps = 0;
    double soe_min_seen = 1.0;
    double soe_max_seen = 0.0;
};

SoeSafety soe_safety(const RunLog& log, const BessConfig& bess);

/// Default movement threshold: 0.25% of H_max.
double default_eps_move(const PlantConfig& plant);

KpiReport compute_kpis(const RunLog& log, const PlantConfig& plant, const BessConfig* bess,
                       double eps_move_kw);

/// Exact column set of the run-matrix KPI file.
extern const char* const kKpiCsvHeader;

std::string kpi_csv_row(const KpiReport& r);

void write_runlog_csv(std::ostream& out, const RunLog& log);

} // namespace hydrofcr::kpi

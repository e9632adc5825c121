#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hydrofcr/kpi.hpp"
#include "hydrofcr/scenario.hpp"
#include "hydrofcr/trace.hpp"

namespace hydrofcr::harness {

/// Read a `timestamp_utc,frequency_hz` CSV; strictly increasing timestamps at
/// a fixed 1 s spacing, frequencies inside the 45..55 Hz sanity band.
FrequencyTrace ingest_trace(const std::string& path);
FrequencyTrace parse_trace(std::istream& in, const std::string& origin);

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace);

struct SynthParams {
    double target_std_hz = 0.020;
    double mean_reversion_per_s = 0.05;
    double t0_utc_s = 1609459200.0;  // 2021-01-01 00:00:00 UTC
    bool split = false;
    double split_offset_hz = -0.150;  ///< added deviation (f - f0) during the split segment
    double split_start_h = 8.0;
    double split_duration_h = 3.0;
    double split_ramp_s = 60.0;
};

/// Ornstein-Uhlenbeck deviation around 50 Hz with an optional sustained
/// offset segment emulating a grid-split event; reproducible per seed.
FrequencyTrace synth_trace(std::uint64_t seed, double hours, const SynthParams& params = {});

struct RunResult {
    kpi::RunLog log;
    kpi::KpiReport report;
    long upper_layer_invocations = 0;
    double wall_seconds = 0.0;
    double max_step_ms = 0.0;
    double mean_step_ms = 0.0;
};

/// Closed-loop run: per-second controller step against the plant truth
/// models, hourly SOE-manager invocations, KPI computation.
RunResult run_scenario(const Scenario& scenario, const FrequencyTrace& trace);

/// Loads the trace from scenario.trace_path, runs, and writes
/// runlog_<name>.csv into scenario.output_dir. Appends to kpi_csv_path when
/// nonempty (header written if the file is new).
RunResult run_scenario_files(const Scenario& scenario, const std::string& kpi_csv_path);

/// Rating that covers the requested fraction of |f - f_nominal| at the droop.
double size_bess(double sigma_f_kw_per_hz, const FrequencyTrace& trace, double coverage);

struct ReductionRow {
    std::string run_id;
    std::string controller;
    double bess_kw = 0.0;
    double te_rms_1s_pct = 0.0;
    double e10_pct = 0.0;
    double e30_pct = 0.0;
    double e60_pct = 0.0;
    double mileage_pct = 0.0;
    double nom_pct = 0.0;
    double dh_p95_pct = 0.0;
};

struct ReductionTable {
    std::string baseline_id;
    std::vector<ReductionRow> rows;
};

ReductionTable compare(const std::vector<kpi::KpiReport>& reports, const std::string& baseline_id);

void write_reductions_csv(std::ostream& out, const ReductionTable& table);
std::string format_reduction_table(const ReductionTable& table);

std::vector<kpi::KpiReport> read_kpi_csv(const std::string& path);

/// Per-model backtest row in the shape of the forecasting comparison table.
struct BacktestRow {
    std::string model;
    double mse = 0.0;
    double sigma = 0.0;
    double gamma_95 = 0.0;
    double gamma_99 = 0.0;
    double durbin_watson = 0.0;
};

/// Fit each model on the head of the hourly series and score one-step-ahead
/// forecasts on the held-out tail.
std::vector<BacktestRow> forecast_backtest(const FrequencyTrace& trace, double f_nominal_hz,
                                           double train_fraction = 0.8);

void write_backtest_csv(std::ostream& out, const std::vector<BacktestRow>& rows);

} // namespace hydrofcr::harness

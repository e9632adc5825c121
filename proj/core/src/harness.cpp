#include "hydrofcr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hydrofcr/control.hpp"
#include "hydrofcr/errors.hpp"
#include "hydrofcr/forecast.hpp"
#include "hydrofcr/plant.hpp"

namespace hydrofcr::harness {

namespace {

constexpr const char* kTraceHeader = "timestamp_utc,frequency_hz";

std::string chomp(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

/// Portable standard-normal draw: 53-bit uniforms through Box-Muller, so a
/// fixed seed reproduces the same trace on any standard library.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

private:
    double uniform_open() {
        // (0, 1]: never returns 0, so log() stays finite
        return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace

FrequencyTrace parse_trace(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line) || chomp(line) != kTraceHeader)
        throw ParseError(origin + ": expected header '" + std::string(kTraceHeader) + "'");

    std::vector<double> samples;
    double t0 = 0.0, t_prev = 0.0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(origin + ": line " + std::to_string(line_no) + ": expected 2 fields");
        double ts, f;
        try {
            std::size_t p1 = 0, p2 = 0;
            ts = std::stod(line.substr(0, comma), &p1);
            f = std::stod(line.substr(comma + 1), &p2);
        } catch (const std::exception&) {
            throw ParseError(origin + ": line " + std::to_string(line_no) + ": bad number");
        }
        if (f < 45.0 || f > 55.0 || !std::isfinite(f))
            throw RangeError(origin + ": line " + std::to_string(line_no) + ": frequency " +
                             fmt(f) + " Hz outside [45, 55] Hz");
        if (samples.empty()) {
            t0 = ts;
        } else {
            const double gap = ts - t_prev;
            if (gap <= 0)
                throw ParseError(origin + ": line " + std::to_string(line_no) +
                                 ": timestamps not strictly increasing");
            if (std::abs(gap - 1.0) > 1e-6)
                throw GapError(origin + ": line " + std::to_string(line_no) + ": " + fmt(gap) +
                               " s gap, expected 1 s spacing");
        }
        t_prev = ts;
        samples.push_back(f);
    }
    if (samples.size() < 2) throw ParseError(origin + ": fewer than 2 samples");
    return FrequencyTrace(t0, 1.0, std::move(samples));
}

FrequencyTrace ingest_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("trace: cannot open '" + path + "'");
    return parse_trace(in, path);
}

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace) {
    out << kTraceHeader << "\n";
    char buf[96];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.9g\n", trace.timestamp(i), trace[i]);
        out << buf;
    }
}

FrequencyTrace synth_trace(std::uint64_t seed, double hours, const SynthParams& params) {
    if (!(hours >= 1.0)) throw ConfigError("synth: hours must be >= 1");
    const std::size_t n = static_cast<std::size_t>(std::llround(hours * 3600.0));
    const double theta = params.mean_reversion_per_s;
    const double a = std::exp(-theta);
    // exact AR(1) step keeps the stationary deviation at the target std
    const double q = params.target_std_hz * std::sqrt(1.0 - a * a);

    GaussianSource gauss(seed);
    std::vector<double> samples(n);
    double dev = 0.0;
    const double split_start_s = params.split_start_h * 3600.0;
    const double split_end_s = split_start_s + params.split_duration_h * 3600.0;
    for (std::size_t k = 0; k < n; ++k) {
        dev = a * dev + q * gauss.next();
        double offset = 0.0;
        if (params.split) {
            const double t = static_cast<double>(k);
            if (t >= split_start_s && t < split_end_s) {
                const double ramp_in = (t - split_start_s) / params.split_ramp_s;
                const double ramp_out = (split_end_s - t) / params.split_ramp_s;
                offset = params.split_offset_hz * std::min({1.0, ramp_in, ramp_out});
            }
        }
        samples[k] = 50.0 + dev + offset;
    }
    return FrequencyTrace(params.t0_utc_s, 1.0, std::move(samples));
}

// ---------------------------------------------------------------------------
// Forecast providers for the closed loop
// ---------------------------------------------------------------------------

namespace {

class ForecastProvider {
public:
    ForecastProvider(ForecastProviderKind kind, double level, const FrequencyTrace& trace,
                     double f_nominal, long steps_per_hour, long hours)
        : kind_(kind), level_(level) {
        if (kind_ == ForecastProviderKind::Oracle) {
            // run-relative hourly integrals over the whole horizon
            oracle_.reserve(static_cast<std::size_t>(hours));
            for (long g = 0; g < hours; ++g) {
                double acc = 0.0;
                for (long j = 0; j < steps_per_hour; ++j)
                    acc += f_nominal - trace[static_cast<std::size_t>(g * steps_per_hour + j)];
                oracle_.push_back(acc / 3600.0);
            }
        }
    }

    forecast::WForecast next_hour(long g, const forecast::HourlyIntegralSeries& realized,
                                  bool& fallback) {
        fallback = false;
        forecast::WForecast fc;
        fc.level = level_;
        switch (kind_) {
            case ForecastProviderKind::Zero:
                return fc;
            case ForecastProviderKind::Oracle:
                if (g < static_cast<long>(oracle_.size())) fc.w_hat = oracle_[static_cast<std::size_t>(g)];
                return fc;
            case ForecastProviderKind::Persistence:
            case ForecastProviderKind::SeasonalNaive24:
            case ForecastProviderKind::SeasonalAR:
                break;
        }
        const forecast::ModelKind mk =
            kind_ == ForecastProviderKind::Persistence ? forecast::ModelKind::Persistence
            : kind_ == ForecastProviderKind::SeasonalNaive24 ? forecast::ModelKind::SeasonalNaive24
                                                             : forecast::ModelKind::SeasonalAR;
        try {
            const auto model = forecast::fit(realized, mk, level_);
            return forecast::predict_next_hour(model, realized);
        } catch (const InsufficientData&) {
            fallback = true;
        }
        if (realized.values.size() >= 2) {
            const auto model = forecast::fit(realized, forecast::ModelKind::Persistence, level_);
            return forecast::predict_next_hour(model, realized);
        }
        fc.w_hat = realized.values.empty() ? 0.0 : realized.values.back();
        return fc;
    }

private:
    ForecastProviderKind kind_;
    double level_;
    std::vector<double> oracle_;
};

} // namespace

// ---------------------------------------------------------------------------
// Closed-loop runner
// ---------------------------------------------------------------------------

RunResult run_scenario(const Scenario& scenario, const FrequencyTrace& trace) {
    validate_scenario(scenario);
    const PlantConfig& plant = scenario.plant;
    const double dt = plant.dt_s;
    const long steps_per_hour = std::lround(3600.0 / dt);
    if (steps_per_hour < 1 || std::abs(static_cast<double>(steps_per_hour) * dt - 3600.0) > 1e-6)
        throw ConfigError("run: dt must divide one hour");
    const long hours = std::lround(scenario.duration_h);
    const long steps = std::lround(scenario.duration_h * 3600.0 / dt);
    if (steps > static_cast<long>(trace.size()))
        throw ConfigError("run: duration exceeds trace length");

    const bool has_bess = scenario.bess.has_value() &&
                          scenario.controller.type != control::ControllerType::HydroOnly;
    auto controller = control::make_controller(scenario.controller, plant, scenario.bess);

    plant::HydroState hydro{std::clamp(plant.dispatch_for_hour(0), plant.h_min_kw, plant.h_max_kw)};
    plant::BessState bess_state;
    if (has_bess) bess_state = plant::make_bess_state(*scenario.bess, scenario.bess->soe_initial);

    ForecastProvider provider(scenario.forecast_kind, scenario.forecast_level, trace,
                              plant.f_nominal_hz, steps_per_hour, hours);
    forecast::HourlyIntegralSeries realized;
    realized.t0_hour = trace.t0();
    double hour_acc = 0.0;

    RunResult result;
    kpi::RunLog& log = result.log;
    log.run_id = scenario.name;
    log.controller = control::controller_type_name(scenario.controller.type);
    log.bess_kw = has_bess ? scenario.bess->capability.b_rated_kw : 0.0;
    log.dt_s = dt;
    log.rows.reserve(static_cast<std::size_t>(steps));

    const auto t_run0 = std::chrono::steady_clock::now();
    double total_step_ms = 0.0;
    std::uint32_t hour_flags = 0;

    for (long k = 0; k < steps; ++k) {
        const double f = trace[static_cast<std::size_t>(k)];
        const long g = k / steps_per_hour;

        if (k % steps_per_hour == 0) {
            if (k > 0) {
                realized.values.push_back(hour_acc / 3600.0);
                hour_acc = 0.0;
            }
            hour_flags = 0;
            if (has_bess) {
                bool fc_fallback = false;
                const forecast::WForecast fc = provider.next_hour(g, realized, fc_fallback);
                controller->on_hour_boundary(g, bess_state.soe, fc);
                ++result.upper_layer_invocations;
                if (fc_fallback) hour_flags |= kpi::FlagForecastFallback;
                if (controller->last_upper() && !controller->last_upper()->feasible)
                    hour_flags |= kpi::FlagUpperInfeasible;
            }
        }
        hour_acc += (plant.f_nominal_hz - f) * dt;

        const double dispatch = plant.dispatch_for_hour(g);

        const auto t0 = std::chrono::steady_clock::now();
        const StepDecision d =
            controller->step(k, f, dispatch, hydro.h_kw, has_bess ? &bess_state : nullptr);
        const double step_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        total_step_ms += step_ms;
        result.max_step_ms = std::max(result.max_step_ms, step_ms);

        hydro = plant::hydro_step(hydro, d.h_set_kw, plant);

        double b_applied = 0.0;
        std::uint32_t flags = hour_flags;
        if (d.solver_status != 0) flags |= kpi::FlagFallback;
        if (d.capability_clipped) flags |= kpi::FlagCapabilityClip;
        if (has_bess) {
            const auto cap = plant::capability(bess_state, *scenario.bess);
            b_applied = std::clamp(d.b_set_kw, cap.first, cap.second);
            if (b_applied != d.b_set_kw) flags |= kpi::FlagCapabilityClip;
            try {
                bess_state = plant::bess_step(bess_state, b_applied, *scenario.bess, dt);
            } catch (const VoltageWindowViolated&) {
                log.aborted = true;
            }
            if (bess_state.soe_saturated) flags |= kpi::FlagSoeSaturated;
        }

        const double p_set = control::droop_target(f, dispatch, plant);
        kpi::RunLogRow row;
        row.k = k;
        row.f_hz = f;
        row.p_set_kw = p_set;
        row.h_set_kw = d.h_set_kw;
        row.h_kw = hydro.h_kw;
        row.b_set_kw = d.b_set_kw;
        row.b_kw = b_applied;
        row.soe = has_bess ? bess_state.soe : 0.0;
        row.v_dc = has_bess ? bess_state.v_dc : 0.0;
        row.flags = flags;
        log.rows.push_back(row);
        if (log.aborted) break;
    }

    log.fallback_count = controller->fallback_count();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_run0).count();
    result.mean_step_ms = log.rows.empty() ? 0.0 : total_step_ms / static_cast<double>(log.rows.size());

    const double eps_move =
        scenario.eps_move_kw >= 0.0 ? scenario.eps_move_kw : kpi::default_eps_move(plant);
    result.report = kpi::compute_kpis(log, plant, has_bess ? &*scenario.bess : nullptr, eps_move);
    return result;
}

RunResult run_scenario_files(const Scenario& scenario, const std::string& kpi_csv_path) {
    const FrequencyTrace trace = ingest_trace(scenario.trace_path);
    RunResult result = run_scenario(scenario, trace);

    namespace fs = std::filesystem;
    fs::create_directories(scenario.output_dir);
    const fs::path runlog_path = fs::path(scenario.output_dir) / ("runlog_" + scenario.name + ".csv");
    {
        std::ofstream out(runlog_path);
        if (!out) throw Error("run: cannot write " + runlog_path.string());
        kpi::write_runlog_csv(out, result.log);
    }
    if (!kpi_csv_path.empty()) {
        const bool fresh = !fs::exists(kpi_csv_path) || fs::file_size(kpi_csv_path) == 0;
        std::ofstream out(kpi_csv_path, std::ios::app);
        if (!out) throw Error("run: cannot write " + kpi_csv_path);
        if (fresh) out << kpi::kKpiCsvHeader << "\n";
        out << kpi::kpi_csv_row(result.report) << "\n";
    }
    if (result.log.aborted)
        throw VoltageWindowViolated("run '" + scenario.name +
                                    "' aborted: battery voltage window violated (partial log written)");
    return result;
}

double size_bess(double sigma_f_kw_per_hz, const FrequencyTrace& trace, double coverage) {
    if (!(coverage > 0.5 && coverage < 1.0))
        throw ConfigError("size_bess: coverage must be in (0.5, 1)");
    std::vector<double> deviations;
    deviations.reserve(trace.size());
    for (double f : trace.samples()) deviations.push_back(std::abs(50.0 - f));
    return sigma_f_kw_per_hz * forecast::quantile(std::move(deviations), coverage);
}

// ---------------------------------------------------------------------------
// Comparison tables
// ---------------------------------------------------------------------------

namespace {

double pct_change(double value, double base) {
    if (base == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (value - base) / std::abs(base) * 100.0;
}

} // namespace

ReductionTable compare(const std::vector<kpi::KpiReport>& reports, const std::string& baseline_id) {
    const auto it = std::find_if(reports.begin(), reports.end(),
                                 [&](const kpi::KpiReport& r) { return r.run_id == baseline_id; });
    if (it == reports.end()) throw MissingBaseline("compare: baseline '" + baseline_id + "' not found");
    const kpi::KpiReport& base = *it;

    ReductionTable table;
    table.baseline_id = baseline_id;
    for (const kpi::KpiReport& r : reports) {
        ReductionRow row;
        row.run_id = r.run_id;
        row.controller = r.controller;
        row.bess_kw = r.bess_kw;
        row.te_rms_1s_pct = pct_change(r.te_rms_1s, base.te_rms_1s);
        row.e10_pct = pct_change(r.e10, base.e10);
        row.e30_pct = pct_change(r.e30, base.e30);
        row.e60_pct = pct_change(r.e60, base.e60);
        row.mileage_pct = pct_change(r.mileage_kw, base.mileage_kw);
        row.nom_pct = pct_change(static_cast<double>(r.nom), static_cast<double>(base.nom));
        row.dh_p95_pct = pct_change(r.dh_p95, base.dh_p95);
        table.rows.push_back(row);
    }
    return table;
}

void write_reductions_csv(std::ostream& out, const ReductionTable& table) {
    out << "run_id,controller,bess_kw,te_rms_1s_pct,e10_pct,e30_pct,e60_pct,mileage_pct,nom_pct,"
           "dh_p95_pct\n";
    for (const ReductionRow& r : table.rows) {
        out << r.run_id << ',' << r.controller << ',' << fmt(r.bess_kw) << ','
            << fmt(r.te_rms_1s_pct) << ',' << fmt(r.e10_pct) << ',' << fmt(r.e30_pct) << ','
            << fmt(r.e60_pct) << ',' << fmt(r.mileage_pct) << ',' << fmt(r.nom_pct) << ','
            << fmt(r.dh_p95_pct) << "\n";
    }
}

std::string format_reduction_table(const ReductionTable& table) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-24s %-10s %8s %10s %10s %10s %10s %10s %10s\n", "run_id",
                  "controller", "bess_kw", "te_1s%", "e10%", "e30%", "e60%", "mileage%", "nom%");
    out << buf;
    for (const ReductionRow& r : table.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-24s %-10s %8.1f %+10.1f %+10.1f %+10.1f %+10.1f %+10.1f %+10.1f\n",
                      r.run_id.c_str(), r.controller.c_str(), r.bess_kw, r.te_rms_1s_pct,
                      r.e10_pct, r.e30_pct, r.e60_pct, r.mileage_pct, r.nom_pct);
        out << buf;
    }
    out << "baseline: " << table.baseline_id << "\n";
    return out.str();
}

std::vector<kpi::KpiReport> read_kpi_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("kpi: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || chomp(line) != kpi::kKpiCsvHeader)
        throw ParseError("kpi: unexpected header in '" + path + "'");
    std::vector<kpi::KpiReport> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 12)
            throw ParseError("kpi: line " + std::to_string(line_no) + ": expected 12 fields");
        kpi::KpiReport r;
        r.run_id = fields[0];
        r.controller = fields[1];
        try {
            r.bess_kw = std::stod(fields[2]);
            r.te_rms_1s = std::stod(fields[3]);
            r.e10 = std::stod(fields[4]);
            r.e30 = std::stod(fields[5]);
            r.e60 = std::stod(fields[6]);
            r.mileage_kw = std::stod(fields[7]);
            r.nom = std::stol(fields[8]);
            r.dh_p95 = std::stod(fields[9]);
            r.soe_violations = std::stol(fields[10]);
            r.fallbacks = std::stol(fields[11]);
        } catch (const std::exception&) {
            throw ParseError("kpi: line " + std::to_string(line_no) + ": bad number");
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forecast backtest
// ---------------------------------------------------------------------------

std::vector<BacktestRow> forecast_backtest(const FrequencyTrace& trace, double f_nominal_hz,
                                           double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("backtest: train fraction in (0, 1)");
    const forecast::HourlyIntegralSeries series = forecast::integrate_hourly(trace, f_nominal_hz);
    const std::size_t n = series.values.size();
    const std::size_t n_train = static_cast<std::size_t>(static_cast<double>(n) * train_fraction);
    if (n_train < 2 || n_train >= n)
        throw InsufficientData("backtest: not enough hours for a train/test split");

    const forecast::ModelKind kinds[] = {forecast::ModelKind::Persistence,
                                         forecast::ModelKind::SeasonalNaive24,
                                         forecast::ModelKind::SeasonalAR};
    std::vector<BacktestRow> rows;
    for (const forecast::ModelKind kind : kinds) {
        forecast::HourlyIntegralSeries train;
        train.t0_hour = series.t0_hour;
        train.values.assign(series.values.begin(),
                            series.values.begin() + static_cast<std::ptrdiff_t>(n_train));
        forecast::ForecastModel model;
        try {
            model = forecast::fit(train, kind);
        } catch (const InsufficientData&) {
            continue;  // not enough history for this model on this trace
        }
        std::vector<double> errors;
        forecast::HourlyIntegralSeries history = train;
        for (std::size_t t = n_train; t < n; ++t) {
            try {
                const forecast::WForecast fc = forecast::predict_next_hour(model, history);
                errors.push_back(series.values[t] - fc.w_hat);
            } catch (const InsufficientData&) {
                break;
            }
            history.values.push_back(series.values[t]);
        }
        if (errors.size() < 2) continue;
        BacktestRow row;
        row.model = forecast::model_kind_name(kind);
        double mse = 0.0;
        for (double e : errors) mse += e * e;
        row.mse = mse / static_cast<double>(errors.size());
        double mean = 0.0;
        for (double e : errors) mean += e;
        mean /= static_cast<double>(errors.size());
        double var = 0.0;
        for (double e : errors) var += (e - mean) * (e - mean);
        row.sigma = std::sqrt(var / static_cast<double>(errors.size() - 1));
        row.gamma_95 = forecast::gamma_t(errors, 2);
        row.gamma_99 = forecast::gamma_t(errors, 3);
        row.durbin_watson = forecast::durbin_watson(errors);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_backtest_csv(std::ostream& out, const std::vector<BacktestRow>& rows) {
    out << "model,mse,sigma,gamma_95,gamma_99,dw\n";
    for (const BacktestRow& r : rows) {
        out << r.model << ',' << fmt(r.mse) << ',' << fmt(r.sigma) << ',' << fmt(r.gamma_95) << ','
            << fmt(r.gamma_99) << ',' << fmt(r.durbin_watson) << "\n";
    }
}

} // namespace hydrofcr::harness

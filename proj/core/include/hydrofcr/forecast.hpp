#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hydrofcr/trace.hpp"

namespace hydrofcr::forecast {

/// Hourly integrals W_g of (f_nominal - f) in Hz*h, one per full hour, so
/// that sigma_f [kW/Hz] * W_g is the hour's regulating energy in kWh.
struct HourlyIntegralSeries {
    std::vector<double> values;
    double t0_hour = 0.0;
};

struct WForecast {
    double w_hat = 0.0;
    double w_up = 0.0;    ///< nonnegative upper half-width
    double w_down = 0.0;  ///< nonnegative lower half-width
    double level = 0.95;
};

enum class ModelKind { Persistence, SeasonalNaive24, SeasonalAR };

const char* model_kind_name(ModelKind k);

struct ForecastModel {
    ModelKind kind = ModelKind::Persistence;
    int ar_order = 6;
    int seasonal_period = 24;
    Eigen::VectorXd coefficients;  ///< AR weights on the differenced series
    double resid_q_lo = 0.0;       ///< empirical residual quantile at (1-level)/2
    double resid_q_hi = 0.0;       ///< empirical residual quantile at 1-(1-level)/2
    double resid_sigma = 0.0;
    double level = 0.95;
    bool ridge_fallback = false;   ///< set when the OLS design was singular
};

/// Integrate full hour-aligned windows of the deviation signal; partial edge
/// hours are dropped. Throws TraceTooShort when no full hour remains.
HourlyIntegralSeries integrate_hourly(const FrequencyTrace& trace, double f_nominal_hz);

ForecastModel fit(const HourlyIntegralSeries& series, ModelKind kind, double level = 0.95,
                  int ar_order = 6, int seasonal_period = 24);

WForecast predict_next_hour(const ForecastModel& model, const HourlyIntegralSeries& history);

/// Fraction of residuals with |r| >= k * sigma (Eq. of the k-sigma exceedance
/// rate); sigma is the sample standard deviation of the residuals.
double gamma_t(std::span<const double> residuals, int k_sigma);

double durbin_watson(std::span<const double> residuals);

/// Persistence predictor: the last measured frequency repeated horizon_p times.
std::vector<double> short_term_frequency(const FrequencyTrace& trace_so_far, int horizon_p);

/// Linear-interpolation empirical quantile of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> values, double p);

/// In-sample one-step residuals of a fitted model over its training series;
/// exposed for backtesting.
std::vector<double> one_step_residuals(const ForecastModel& model,
                                       const HourlyIntegralSeries& series);

} // namespace hydrofcr::forecast

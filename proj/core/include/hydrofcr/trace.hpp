#pragma once

#include <cstddef>
#include <vector>

namespace hydrofcr {

/// Uniformly sampled grid-frequency series. Immutable after construction;
/// construction validates the sanity bounds (45..55 Hz, dt > 0, length >= 2).
class FrequencyTrace {
public:
    FrequencyTrace(double t0_utc_s, double dt_s, std::vector<double> samples_hz);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }

    double duration_s() const { return static_cast<double>(samples_.size()) * dt_; }
    double timestamp(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }

private:
    double t0_;
    double dt_;
    std::vector<double> samples_;
};

/// Per-second actuated set-points plus solver diagnostics.
struct StepDecision {
    long k = 0;
    double h_set_kw = 0.0;
    double b_set_kw = 0.0;   ///< positive = charging
    double p_set_kw = 0.0;   ///< droop-implied PCC target
    double tracking_error_kw = 0.0;
    int solver_status = 0;   ///< 0 ok, 1 fallback engaged
    double objective = 0.0;
    bool capability_clipped = false;
};

} // namespace hydrofcr

#include "hydrofcr/trace.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "hydrofcr/errors.hpp"

namespace hydrofcr {

FrequencyTrace::FrequencyTrace(double t0_utc_s, double dt_s, std::vector<double> samples_hz)
    : t0_(t0_utc_s), dt_(dt_s), samples_(std::move(samples_hz)) {
    if (!(dt_ > 0) || !std::isfinite(dt_)) throw ConfigError("trace: dt must be > 0");
    if (samples_.size() < 2) throw ConfigError("trace: need at least 2 samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double f = samples_[i];
        if (!std::isfinite(f) || f < 45.0 || f > 55.0) {
            std::ostringstream os;
            os << "trace: sample " << i << " = " << f << " Hz outside [45, 55] Hz";
            throw RangeError(os.str());
        }
    }
}

} // namespace hydrofcr

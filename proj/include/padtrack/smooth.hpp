#pragma once
#include <array>
#include <span>
#include <vector>

#include "padtrack/errors.hpp"

namespace padtrack::smooth {

// Constant-velocity error-state filter over the predicted angle stream.
// `ratio` fixes the steady-state prior-variance / measurement-variance
// quotient; the measurement noise is derived from it through the alpha-beta
// correspondence, so large ratios trust the measurements and small ratios
// smooth hard.
struct KalmanConfig {
    double ratio = 2.67;
    double dt_s = 0.02;           // 50 Hz stream
    double process_noise = 1.0;   // white-noise acceleration intensity q

    void validate() const;
};

struct KalmanState {
    double angle_deg = 0.0;
    double velocity_dps = 0.0;
    std::array<double, 4> cov{};  // row-major 2x2, symmetric PSD
};

// Measurement variance implied by the config (q * dt^4 / Lambda^2).
double measurement_variance(const KalmanConfig& cfg);

// Steady-state Kalman gain on the angle component: ratio / (1 + ratio).
double steady_state_gain(const KalmanConfig& cfg);

// First measurement, zero velocity, large covariance.
KalmanState kalman_init(double first_measurement_deg, const KalmanConfig& cfg);

// Constant-velocity predict then measurement update (Joseph form).
KalmanState step(const KalmanState& state, double measurement_deg, const KalmanConfig& cfg);

// Runs the filter over a series; output length equals input length.
std::vector<double> smooth_series(std::span<const double> estimates_deg, const KalmanConfig& cfg);

} // namespace padtrack::smooth

#include "padtrack/smooth.hpp"

#include <cmath>

#include "padtrack/errors.hpp"

namespace padtrack::smooth {

void KalmanConfig::validate() const {
    if (!(ratio > 0.0)) throw ValidationError("kalman: ratio must be positive");
    if (!(dt_s > 0.0)) throw ValidationError("kalman: dt must be positive");
    if (!(process_noise > 0.0)) throw ValidationError("kalman: process noise must be positive");
}

namespace {

// Kalata correspondence for the white-noise-acceleration model: the desired
// prior/measurement variance quotient gamma fixes the steady-state position
// gain alpha = gamma/(1+gamma), hence beta and the tracking index Lambda,
// hence the measurement variance for a given q and dt.
double tracking_index(double ratio) {
    const double alpha = ratio / (1.0 + ratio);
    const double s = std::sqrt(1.0 - alpha);
    const double beta = 2.0 * (2.0 - alpha) - 4.0 * s;
    return beta / s;
}

} // namespace

double measurement_variance(const KalmanConfig& cfg) {
    cfg.validate();
    const double lam = tracking_index(cfg.ratio);
    const double dt2 = cfg.dt_s * cfg.dt_s;
    return cfg.process_noise * dt2 * dt2 / (lam * lam);
}

double steady_state_gain(const KalmanConfig& cfg) { return cfg.ratio / (1.0 + cfg.ratio); }

KalmanState kalman_init(double first_measurement_deg, const KalmanConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(first_measurement_deg)) throw ValidationError("kalman: non-finite measurement");
    KalmanState s;
    s.angle_deg = first_measurement_deg;
    s.velocity_dps = 0.0;
    const double big = 1e6 * measurement_variance(cfg) + 1.0;
    s.cov = {big, 0.0, 0.0, big};
    return s;
}

KalmanState step(const KalmanState& state, double measurement_deg, const KalmanConfig& cfg) {
    if (!std::isfinite(measurement_deg)) throw ValidationError("kalman: non-finite measurement");
    const double dt = cfg.dt_s;
    const double q = cfg.process_noise;
    const double r = measurement_variance(cfg);

    // predict: x = F x, P = F P F' + Q, with F = [[1, dt], [0, 1]]
    KalmanState s;
    s.angle_deg = state.angle_deg + dt * state.velocity_dps;
    s.velocity_dps = state.velocity_dps;

    const double p00 = state.cov[0], p01 = state.cov[1], p10 = state.cov[2], p11 = state.cov[3];
    double a00 = p00 + dt * (p10 + p01) + dt * dt * p11;
    double a01 = p01 + dt * p11;
    double a10 = p10 + dt * p11;
    double a11 = p11;
    const double dt2 = dt * dt;
    a00 += q * dt2 * dt2 / 4.0;
    a01 += q * dt2 * dt / 2.0;
    a10 += q * dt2 * dt / 2.0;
    a11 += q * dt2;

    // update with H = [1 0], Joseph form to keep P symmetric PSD
    const double innovation = measurement_deg - s.angle_deg;
    const double sc = a00 + r;
    const double k0 = a00 / sc;
    const double k1 = a10 / sc;
    s.angle_deg += k0 * innovation;
    s.velocity_dps += k1 * innovation;

    const double i00 = 1.0 - k0;  // I - K H
    const double b00 = i00 * a00;
    const double b01 = i00 * a01;
    const double b10 = a10 - k1 * a00;
    const double b11 = a11 - k1 * a01;
    s.cov[0] = b00 * i00 + k0 * k0 * r;
    s.cov[1] = -b00 * k1 + b01 + k0 * k1 * r;
    s.cov[2] = b10 * i00 + k1 * k0 * r;
    s.cov[3] = -b10 * k1 + b11 + k1 * k1 * r;
    // enforce exact symmetry against drift
    const double off = 0.5 * (s.cov[1] + s.cov[2]);
    s.cov[1] = off;
    s.cov[2] = off;
    return s;
}

std::vector<double> smooth_series(std::span<const double> estimates_deg, const KalmanConfig& cfg) {
    if (estimates_deg.empty()) throw ValidationError("smooth_series: empty input");
    std::vector<double> out;
    out.reserve(estimates_deg.size());
    KalmanState st = kalman_init(estimates_deg[0], cfg);
    out.push_back(st.angle_deg);
    for (std::size_t i = 1; i < estimates_deg.size(); ++i) {
        st = step(st, estimates_deg[i], cfg);
        out.push_back(st.angle_deg);
    }
    return out;
}

} // namespace padtrack::smooth

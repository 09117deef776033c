#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "padtrack/core.hpp"
#include "padtrack/rng.hpp"

namespace padtrack::sim {

// Angular positions of the six channels around the arm, degrees. Channels
// facing the olecranon stretch with flexion; the far side sees only the
// chaotic crease term.
struct SensorLayout {
    std::array<double, core::kChannels> position_deg{0.0, 60.0, 120.0, 180.0, 240.0, 300.0};
    double olecranon_deg = 180.0;

    void validate() const;
};

struct UserProfile {
    std::array<double, core::kChannels> gain{};       // raw counts per unit stretch
    std::array<double, core::kChannels> baseline{};   // raw counts at rest
    double girth_cm = 24.75;                          // valid range [20.5, 28]
    double noise_scale = 2.0;                         // additive Gaussian, raw counts
    double chaos_scale = 30.0;                        // crease-side nonlinearity amplitude
    std::uint64_t seed = 0;

    void validate() const;

    // Deterministic plausible profile for a given seed.
    static UserProfile standard(std::uint64_t seed);
    // New-wearer variant: gains and baselines shifted.
    UserProfile perturbed(double gain_factor, double baseline_shift) const;
};

struct MotionTemplate {
    std::string name;           // bend | walk | run | jump | clap
    double theta_lo_deg = 40.0;
    double theta_hi_deg = 180.0;
    double frequency_hz = 0.4;  // bending cycles per second
    double velocity_jitter = 0.2;

    void validate() const;
    static MotionTemplate named(const std::string& name);
};

struct GridSpec {
    double delta_eta_cm = 1.0;  // lateral step over [-4, 4]
    double delta_beta_deg = 5.0;  // circular step over [0, 360)

    // All placements of the grid, canonical order.
    std::vector<core::Placement> placements() const;
};

// Smooth quasi-periodic bend trajectory within [theta_lo, theta_hi]. Each
// cycle's frequency is perturbed by the template's velocity jitter; zero
// jitter gives an exactly periodic series. Deterministic per seed.
std::vector<double> gen_trajectory(const MotionTemplate& tpl, double duration_s, double rate_hz,
                                   std::uint64_t seed);

// Zero-noise stretch weight of a channel at a given circular offset.
double stretch_weight(const SensorLayout& layout, int channel, double beta_deg);

// Crease-side nonlinearity: two incommensurate sinusoids of theta with
// per-channel phases derived from the profile seed, plus a slow drift in t.
double chaos_term(const UserProfile& profile, int channel, double theta_deg, double t_s);

// Raw 6-channel response at one instant. `noise` feeds the additive Gaussian
// term; pass a zero-noise profile for the deterministic part only.
std::array<double, core::kChannels> sensor_response(double theta_deg, const core::Placement& placement,
                                                    const SensorLayout& layout,
                                                    const UserProfile& profile, double t_s,
                                                    Rng& noise);

// One session for (placement, template, user). The trajectory depends only on
// (seed, placement, template); the readings additionally on the profile, so
// two users at the same placement share ground truth.
core::Session gen_session(const core::Placement& placement, const MotionTemplate& tpl,
                          const UserProfile& profile, const SensorLayout& layout,
                          double duration_s, double rate_hz, std::uint64_t seed,
                          const std::string& user_id);

// Full grid x templates x users. Deterministic per seed; sessions come out in
// canonical order regardless of generation order.
core::Dataset gen_dataset(const GridSpec& grid, const std::vector<MotionTemplate>& templates,
                          const std::vector<UserProfile>& users, const SensorLayout& layout,
                          double duration_s, double rate_hz, std::uint64_t seed);

} // namespace padtrack::sim

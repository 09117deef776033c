#include "padtrack/sim.hpp"

#include <algorithm>
#include <cmath>

#include "padtrack/text.hpp"

namespace padtrack::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cos_deg(double deg) { return std::cos(deg * kPi / 180.0); }

double wrap360(double deg) {
    double b = std::fmod(deg, 360.0);
    if (b < 0.0) b += 360.0;
    return b;
}

// Lateral attenuation: S_lat(4) = 0.6, so a 4 cm shift weakens but never
// kills the stretch signal.
double lateral_attenuation(double eta_cm) { return 1.0 - std::abs(eta_cm) / 10.0; }

std::uint64_t placement_hash(const core::Placement& p) {
    return hash_combine(hash_double(p.eta_cm), hash_double(p.beta_deg));
}

} // namespace

void SensorLayout::validate() const {
    for (int a = 0; a < core::kChannels; ++a)
        for (int b = a + 1; b < core::kChannels; ++b)
            if (wrap360(position_deg[static_cast<std::size_t>(a)]) ==
                wrap360(position_deg[static_cast<std::size_t>(b)]))
                throw ValidationError("layout: duplicate channel positions");
}

void UserProfile::validate() const {
    for (double g : gain)
        if (!(g > 0.0)) throw ValidationError("profile: gains must be positive");
    for (double b : baseline)
        if (b < 0.0 || b > core::kRawMax)
            throw ValidationError("profile: baseline outside [0, 1023]");
    if (girth_cm < 20.5 || girth_cm > 28.0)
        throw ValidationError("profile: arm girth " + fmt(girth_cm) + " cm outside [20.5, 28]");
    if (noise_scale < 0.0 || chaos_scale < 0.0)
        throw ValidationError("profile: noise/chaos scales must be non-negative");
}

UserProfile UserProfile::standard(std::uint64_t seed) {
    UserProfile p;
    p.seed = seed;
    Rng rng(hash_combine(seed, 0xa11ce5ULL));
    for (int c = 0; c < core::kChannels; ++c) {
        p.gain[static_cast<std::size_t>(c)] = rng.uniform(360.0, 440.0);
        p.baseline[static_cast<std::size_t>(c)] = rng.uniform(150.0, 250.0);
    }
    p.girth_cm = rng.uniform(20.5, 28.0);
    return p;
}

UserProfile UserProfile::perturbed(double gain_factor, double baseline_shift) const {
    UserProfile p = *this;
    for (int c = 0; c < core::kChannels; ++c) {
        auto k = static_cast<std::size_t>(c);
        p.gain[k] *= gain_factor;
        p.baseline[k] = std::clamp(p.baseline[k] + baseline_shift, 0.0, core::kRawMax);
    }
    p.seed = hash_combine(seed, 0x9e11ULL);
    return p;
}

void MotionTemplate::validate() const {
    if (!(theta_lo_deg >= 40.0 && theta_lo_deg < theta_hi_deg && theta_hi_deg <= 180.0))
        throw ValidationError("motion: need 40 <= lo < hi <= 180 degrees");
    if (!(frequency_hz > 0.0)) throw ValidationError("motion: frequency must be positive");
    if (velocity_jitter < 0.0 || velocity_jitter >= 1.0)
        throw ValidationError("motion: jitter must be in [0, 1)");
}

MotionTemplate MotionTemplate::named(const std::string& name) {
    if (name == "bend") return {"bend", 40.0, 180.0, 0.4, 0.2};
    if (name == "walk") return {"walk", 90.0, 160.0, 1.0, 0.1};
    if (name == "run") return {"run", 70.0, 160.0, 2.0, 0.15};
    if (name == "jump") return {"jump", 60.0, 170.0, 1.5, 0.15};
    if (name == "clap") return {"clap", 40.0, 140.0, 2.5, 0.1};
    throw ValidationError("unknown motion template '" + name + "'");
}

std::vector<core::Placement> GridSpec::placements() const {
    if (!(delta_eta_cm > 0.0) || !(delta_beta_deg > 0.0))
        throw ValidationError("grid: steps must be positive");
    std::vector<core::Placement> out;
    for (double eta = -core::kEtaMaxCm; eta <= core::kEtaMaxCm + 1e-9; eta += delta_eta_cm)
        for (double beta = 0.0; beta < 360.0 - 1e-9; beta += delta_beta_deg)
            out.push_back(core::make_placement(eta, beta));
    if (out.empty()) throw ValidationError("grid: no placements");
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> gen_trajectory(const MotionTemplate& tpl, double duration_s, double rate_hz,
                                   std::uint64_t seed) {
    tpl.validate();
    if (!(duration_s > 0.0) || !(rate_hz > 0.0))
        throw ValidationError("gen_trajectory: duration and rate must be positive");

    const std::size_t n = static_cast<std::size_t>(std::floor(duration_s * rate_hz));
    const double dt = 1.0 / rate_hz;
    const double amplitude = 0.5 * (tpl.theta_hi_deg - tpl.theta_lo_deg);

    // One raised-cosine dip per cycle with a jittered per-cycle period. Cycle
    // boundaries sit at theta = theta_hi with zero slope, so the series is C1
    // even when consecutive cycles run at different speeds.
    Rng rng(hash_combine(seed, 0x7bead5ULL));
    auto next_period = [&]() {
        return 1.0 / (tpl.frequency_hz * (1.0 + tpl.velocity_jitter * (2.0 * rng.uniform01() - 1.0)));
    };
    std::vector<double> out(n);
    double cycle_start = 0.0;
    double period = next_period();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        while (t - cycle_start >= period) {
            cycle_start += period;
            period = next_period();
        }
        const double tau = (t - cycle_start) / period;
        out[i] = tpl.theta_hi_deg - amplitude * (1.0 - std::cos(2.0 * kPi * tau));
    }
    return out;
}

double stretch_weight(const SensorLayout& layout, int channel, double beta_deg) {
    const double pos = layout.position_deg[static_cast<std::size_t>(channel)] + beta_deg;
    return std::max(0.0, cos_deg(pos - layout.olecranon_deg));
}

double chaos_term(const UserProfile& profile, int channel, double theta_deg, double t_s) {
    Rng rng(hash_combine(hash_combine(profile.seed, 0xc4a05ULL), static_cast<std::uint64_t>(channel)));
    const double period1 = rng.uniform(7.0, 10.0);         // degrees of theta
    const double period2 = period1 * 1.41421356237309515;  // incommensurate pair
    const double p1 = rng.uniform(0.0, 2.0 * kPi);
    const double p2 = rng.uniform(0.0, 2.0 * kPi);
    const double p3 = rng.uniform(0.0, 2.0 * kPi);
    const double drift_period_s = rng.uniform(7.0, 11.0);
    const double base = std::sin(2.0 * kPi * theta_deg / period1 + p1) +
                        std::sin(2.0 * kPi * theta_deg / period2 + p2);
    const double drift = 1.0 + 0.2 * std::sin(2.0 * kPi * t_s / drift_period_s + p3);
    return 0.5 * profile.chaos_scale * base * drift;
}

std::array<double, core::kChannels> sensor_response(double theta_deg, const core::Placement& placement,
                                                    const SensorLayout& layout,
                                                    const UserProfile& profile, double t_s,
                                                    Rng& noise) {
    if (!(theta_deg >= 0.0 && theta_deg <= 190.0))
        throw ValidationError("sensor_response: theta outside [0, 190]");
    const double bend = (180.0 - theta_deg) / 140.0;
    const double s_lat = lateral_attenuation(placement.eta_cm);

    std::array<double, core::kChannels> out{};
    for (int c = 0; c < core::kChannels; ++c) {
        const auto k = static_cast<std::size_t>(c);
        const double w = stretch_weight(layout, c, placement.beta_deg);
        double v = profile.baseline[k] + profile.gain[k] * w * bend * s_lat +
                   (1.0 - w) * chaos_term(profile, c, theta_deg, t_s);
        if (profile.noise_scale > 0.0) v += noise.normal(0.0, profile.noise_scale);
        out[k] = std::clamp(v, core::kRawMin, core::kRawMax);
    }
    return out;
}

core::Session gen_session(const core::Placement& placement, const MotionTemplate& tpl,
                          const UserProfile& profile, const SensorLayout& layout,
                          double duration_s, double rate_hz, std::uint64_t seed,
                          const std::string& user_id) {
    layout.validate();
    profile.validate();

    const std::uint64_t traj_seed =
        hash_combine(hash_combine(seed, placement_hash(placement)), fnv1a(tpl.name));
    std::vector<double> theta = gen_trajectory(tpl, duration_s, rate_hz, traj_seed);

    core::Session s;
    s.placement = placement;
    s.motion_id = tpl.name;
    s.user_id = user_id;
    s.rate_hz = rate_hz;
    s.truth = theta;
    s.frames.resize(theta.size());

    Rng noise(hash_combine(traj_seed, hash_combine(profile.seed, 0x0015eULL)));
    const double dt_ms = 1000.0 / rate_hz;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        s.frames[i].timestamp_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * dt_ms));
        s.frames[i].readings =
            sensor_response(theta[i], placement, layout, profile, static_cast<double>(i) / rate_hz, noise);
    }
    s.validate(true);
    return s;
}

core::Dataset gen_dataset(const GridSpec& grid, const std::vector<MotionTemplate>& templates,
                          const std::vector<UserProfile>& users, const SensorLayout& layout,
                          double duration_s, double rate_hz, std::uint64_t seed) {
    const std::vector<core::Placement> places = grid.placements();
    if (templates.empty()) throw ValidationError("gen_dataset: no motion templates");
    if (users.empty()) throw ValidationError("gen_dataset: no users");

    core::Dataset ds;
    for (const auto& p : places)
        for (const auto& tpl : templates)
            for (std::size_t u = 0; u < users.size(); ++u)
                ds.sessions.push_back(gen_session(p, tpl, users[u], layout, duration_s, rate_hz, seed,
                                                  "u" + fmt(static_cast<std::int64_t>(u))));
    ds.sort_canonical();
    return ds;
}

} // namespace padtrack::sim

#pragma once
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padtrack/errors.hpp"

namespace padtrack::core {

constexpr int kChannels = 6;
constexpr double kRawMin = 0.0;
constexpr double kRawMax = 1023.0;
constexpr double kEtaMaxCm = 4.0;
constexpr double kAngleMinDeg = 0.0;
constexpr double kAngleMaxDeg = 190.0;

// Pad pose on the arm: lateral offset eta (cm, along the arm) and circular
// offset beta (degrees about the arm axis, stored normalized to [0,360)).
struct Placement {
    double eta_cm = 0.0;
    double beta_deg = 0.0;

    friend auto operator<=>(const Placement&, const Placement&) = default;
};

// Normalizes beta modulo 360 and checks eta in [-4, 4].
Placement make_placement(double eta_cm, double beta_deg);

struct SensorFrame {
    std::int64_t timestamp_ms = 0;
    std::array<double, kChannels> readings{};
};

// One recording at one placement. `truth` (degrees), when present, is aligned
// 1:1 with `frames`. Frames are strictly increasing in timestamp.
struct Session {
    Placement placement;
    std::vector<SensorFrame> frames;
    std::vector<double> truth;   // empty or same size as frames
    std::string user_id;
    std::string motion_id;
    double rate_hz = 50.0;

    bool has_truth() const { return !truth.empty(); }
    std::size_t size() const { return frames.size(); }
    std::vector<double> channel(int c) const;
    void validate(bool raw_range = false) const;
};

enum class Split { train, validate, test };
const char* split_name(Split s);

struct Dataset {
    std::vector<Session> sessions;              // canonical order (placement, motion, user)
    std::map<Placement, Split> split;

    std::vector<Placement> placements() const;  // unique, sorted
    std::vector<const Session*> sessions_in(Split s) const;
    void sort_canonical();
};

// One model input: W consecutive frames x C channels (row-major, frame-major),
// already normalized; target is the truth angle at the window's last frame.
struct Window {
    std::vector<double> values;  // size = length * channels
    std::optional<double> target;
    int length = 0;
    int channels = 0;
};

// Per-channel min-max statistics captured by normalize_minmax, reused at
// inference so a session is always scaled by its own placement's stats.
struct MinMaxStats {
    std::array<double, kChannels> lo{};
    std::array<double, kChannels> hi{};
    std::array<bool, kChannels> degenerate{};   // max == min, mapped to 0.5
};

// ---- session file I/O ------------------------------------------------------
// CSV: header `timestamp_ms,s1..s6[,angle_deg]`, one frame per row.
// Sidecar `<basename>.meta`: eta_cm, beta_deg, user_id, motion_id, rate_hz.

Session load_session(const std::filesystem::path& csv_path);
void save_session(const Session& s, const std::filesystem::path& csv_path,
                  const std::string& extra_meta = "");

// ---- preprocessing ---------------------------------------------------------

// Per-channel min-max scaling to [0,1]; a constant channel maps to 0.5 and is
// flagged degenerate.
std::pair<Session, MinMaxStats> normalize_minmax(const Session& s);
Session apply_minmax(const Session& s, const MinMaxStats& stats);

// Replaces samples with |v - mean| > z*sd (per channel) by linear
// interpolation between the nearest clean neighbours. Frame count unchanged;
// no-op on sessions shorter than 3 frames.
Session remove_outliers(const Session& s, double z = 3.0);

// Linear interpolation of the truth signal onto the sensor timestamp grid.
// Sensor timestamps outside the truth range are an error.
std::vector<double> resample_truth(std::span<const std::int64_t> truth_ts_ms,
                                   std::span<const double> truth_deg,
                                   std::span<const std::int64_t> sensor_ts_ms);

// Sliding windows of length W, stride 1. `active_channels` keeps the first K
// channels (sensor-count ablation). Sessions shorter than W yield nothing.
std::vector<Window> make_windows(const Session& s, int W, int active_channels = kChannels);

// Assigns whole placements to train/validate/test. Quotas by largest
// remainder so exact fractions produce exact counts; deterministic per seed.
Dataset partition(Dataset dataset, double train_frac, double validate_frac,
                  double test_frac, std::uint64_t seed);

} // namespace padtrack::core

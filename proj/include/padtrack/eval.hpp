#pragma once
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padtrack/core.hpp"

namespace padtrack::eval {

// mean |pred - truth|, degrees
double mae(std::span<const double> pred, std::span<const double> truth);

// Angle-variation speed: sum of |delta theta| over a window of `window_frames`
// consecutive frames divided by the window duration in ms, anchored at the
// window's last frame. The first window-1 entries are back-filled from the
// first complete window so the output matches the input length. Series
// shorter than the window yield an empty result.
std::vector<double> velocity_series(std::span<const double> truth_deg, double rate_hz,
                                    int window_frames = 2);

// Product-moment correlation; both inputs must be non-constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct MwuResult {
    double u = 0.0;        // U statistic of the first sample, midrank ties
    double p_two_sided = 1.0;
    bool exact = false;    // enumeration (small samples) vs normal approximation
};

// Exact enumeration when min(|a|,|b|) < 8 and the arrangement count is
// tractable; otherwise normal approximation with tie correction and
// continuity correction.
MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct BinStat {
    double lo = 0.0;
    double hi = 0.0;
    double mae = 0.0;
    std::size_t count = 0;
};

struct PlacementStat {
    core::Placement placement;
    double mae = 0.0;
    std::size_t count = 0;
};

struct ReportOptions {
    double angle_bin_deg = 10.0;     // bins over [30, 180]
    double angle_min_deg = 30.0;
    double angle_max_deg = 180.0;
    double velocity_bin = 0.1;       // deg/ms bins over [0, velocity_max]
    double velocity_max = 2.0;
    int velocity_window_frames = 2;
    bool smoothed = false;           // provenance only
};

struct ErrorReport {
    double overall_mae = 0.0;
    std::size_t total_samples = 0;
    std::vector<PlacementStat> by_placement;
    std::vector<BinStat> by_angle;      // out-of-range samples clamp to edge bins
    std::vector<BinStat> by_velocity;   // overflow clamps to the last bin
    std::optional<double> corr_velocity_vs_error;      // per-sample
    std::optional<double> corr_angle_count_vs_mae;     // per occupied angle bin
    ReportOptions options;
};

// One evaluated session: aligned prediction/truth plus the placement and the
// truth-derived velocity series.
struct SessionEval {
    core::Placement placement;
    std::vector<double> pred;
    std::vector<double> truth;
    std::vector<double> velocity;
};

ErrorReport build_report(std::span<const SessionEval> sessions, const ReportOptions& options);

} // namespace padtrack::eval

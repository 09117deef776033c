#pragma once
#include <span>
#include <string>
#include <vector>

#include "padtrack/core.hpp"

namespace padtrack::entropy {

struct EntropyConfig {
    int m = 2;                  // template window size
    double r = 0.25;            // similarity tolerance (on normalized data)
    double fuzzy_power = 2.0;   // exponent of the fuzzy membership function
    bool r_times_sd = false;    // scale r by the series' standard deviation

    void validate() const;
};

enum class RankCriterion { none, fuzzy, sd, jitter };

const char* criterion_name(RankCriterion c);
RankCriterion criterion_from_name(const std::string& name);

// Channel complexity values plus the ascending permutation they induce.
// order[i] is the original index of the i-th least complex channel; ties
// break toward the lower original index.
struct EntropyRanking {
    std::vector<double> entropies;  // indexed by original channel
    std::vector<int> order;
    RankCriterion tag = RankCriterion::none;
};

// Fuzzy entropy of a scalar series: ln phi^m - ln phi^(m+1), where phi^k
// averages exp(-(d_ij)^p / r) over all template pairs of width k; templates
// are mean-removed and d_ij is the Chebyshev distance. Needs |series| >= m+2.
// A zero-variance series yields 0 (and guards r_times_sd against r = 0).
double fuzzy_entropy(std::span<const double> series, const EntropyConfig& cfg = {});

// Population standard deviation. |series| >= 1.
double sd_criterion(std::span<const double> series);

// RMS of the third finite difference divided by dt^3. |series| >= 4.
double jitter_criterion(std::span<const double> series, double dt_s);

// Computes the per-channel criterion over the whole session (once per
// placement) and reorders channels ascending. `none` returns the session
// unchanged with an identity ranking. Expects normalized, outlier-cleaned
// input. `active_channels` restricts to the first K channels.
std::pair<core::Session, EntropyRanking> rank_channels(const core::Session& s,
                                                       RankCriterion criterion,
                                                       const EntropyConfig& cfg = {},
                                                       int active_channels = core::kChannels,
                                                       bool descending = false);

// Reorders a session's channels by an existing ranking.
core::Session apply_ranking(const core::Session& s, const EntropyRanking& ranking);

} // namespace padtrack::entropy

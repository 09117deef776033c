#include "padtrack/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "padtrack/errors.hpp"
#include "padtrack/text.hpp"

namespace padtrack::entropy {

void EntropyConfig::validate() const {
    if (m < 1) throw ValidationError("entropy: m must be >= 1");
    if (!(r > 0.0)) throw ValidationError("entropy: r must be positive");
    if (!(fuzzy_power > 0.0)) throw ValidationError("entropy: fuzzy_power must be positive");
}

const char* criterion_name(RankCriterion c) {
    switch (c) {
        case RankCriterion::none: return "none";
        case RankCriterion::fuzzy: return "fuzzy";
        case RankCriterion::sd: return "sd";
        case RankCriterion::jitter: return "jitter";
    }
    return "?";
}

RankCriterion criterion_from_name(const std::string& name) {
    if (name == "none") return RankCriterion::none;
    if (name == "fuzzy") return RankCriterion::fuzzy;
    if (name == "sd") return RankCriterion::sd;
    if (name == "jitter") return RankCriterion::jitter;
    throw ValidationError("unknown ranking criterion '" + name + "'");
}

namespace {

// Mean similarity over all ordered template pairs of width m: templates are
// the mean-removed subsequences, distance is the componentwise max.
double phi(std::span<const double> u, int m, double r, double power) {
    const std::size_t n = u.size();
    const std::size_t count = n - static_cast<std::size_t>(m) + 1;

    // mean-removed templates, stored contiguously
    std::vector<double> tpl(count * static_cast<std::size_t>(m));
    double window_sum = 0.0;
    for (int k = 0; k < m; ++k) window_sum += u[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < count; ++i) {
        const double mean = window_sum / static_cast<double>(m);
        for (int k = 0; k < m; ++k)
            tpl[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] =
                u[i + static_cast<std::size_t>(k)] - mean;
        if (i + 1 < count) window_sum += u[i + static_cast<std::size_t>(m)] - u[i];
    }

    const bool square = (power == 2.0);
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double* a = &tpl[i * static_cast<std::size_t>(m)];
        double row = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            if (j == i) continue;
            const double* b = &tpl[j * static_cast<std::size_t>(m)];
            double d = 0.0;
            for (int k = 0; k < m; ++k) {
                const double diff = std::abs(a[k] - b[k]);
                if (diff > d) d = diff;
            }
            const double dp = square ? d * d : std::pow(d, power);
            row += std::exp(-dp / r);
        }
        total += row / static_cast<double>(count - 1);
    }
    return total / static_cast<double>(count);
}

} // namespace

double fuzzy_entropy(std::span<const double> series, const EntropyConfig& cfg) {
    cfg.validate();
    const std::size_t n = series.size();
    if (n < static_cast<std::size_t>(cfg.m) + 2)
        throw ValidationError("fuzzy_entropy: series length " + fmt(static_cast<std::int64_t>(n)) +
                              " < m+2 = " + fmt(static_cast<std::int64_t>(cfg.m + 2)));

    double r = cfg.r;
    if (cfg.r_times_sd) {
        const double sd = sd_criterion(series);
        if (sd == 0.0) return 0.0;
        r *= sd;
    }

    const double phi_m = phi(series, cfg.m, r, cfg.fuzzy_power);
    const double phi_m1 = phi(series, cfg.m + 1, r, cfg.fuzzy_power);
    if (!(phi_m > 0.0) || !(phi_m1 > 0.0))
        throw NumericError("fuzzy_entropy: similarity sum underflowed to zero");
    return std::log(phi_m) - std::log(phi_m1);
}

double sd_criterion(std::span<const double> series) {
    if (series.empty()) throw ValidationError("sd_criterion: empty series");
    const double n = static_cast<double>(series.size());
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : series) {
        const double d = v - mean;
        var += d * d;
    }
    return std::sqrt(var / n);
}

double jitter_criterion(std::span<const double> series, double dt_s) {
    if (series.size() < 4) throw ValidationError("jitter_criterion: need at least 4 samples");
    if (!(dt_s > 0.0)) throw ValidationError("jitter_criterion: dt must be positive");
    const double dt3 = dt_s * dt_s * dt_s;
    double acc = 0.0;
    const std::size_t n = series.size() - 3;
    for (std::size_t i = 0; i < n; ++i) {
        const double d3 =
            (series[i + 3] - 3.0 * series[i + 2] + 3.0 * series[i + 1] - series[i]) / dt3;
        acc += d3 * d3;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

std::pair<core::Session, EntropyRanking> rank_channels(const core::Session& s,
                                                       RankCriterion criterion,
                                                       const EntropyConfig& cfg,
                                                       int active_channels,
                                                       bool descending) {
    if (active_channels < 1 || active_channels > core::kChannels)
        throw ValidationError("rank_channels: active channel count out of range");

    EntropyRanking ranking;
    ranking.tag = criterion;
    ranking.entropies.assign(static_cast<std::size_t>(active_channels), 0.0);
    ranking.order.resize(static_cast<std::size_t>(active_channels));
    std::iota(ranking.order.begin(), ranking.order.end(), 0);

    if (criterion == RankCriterion::none) return {s, ranking};

    for (int c = 0; c < active_channels; ++c) {
        const std::vector<double> series = s.channel(c);
        double v = 0.0;
        switch (criterion) {
            case RankCriterion::fuzzy: v = fuzzy_entropy(series, cfg); break;
            case RankCriterion::sd: v = sd_criterion(series); break;
            case RankCriterion::jitter: v = jitter_criterion(series, 1.0 / s.rate_hz); break;
            case RankCriterion::none: break;
        }
        ranking.entropies[static_cast<std::size_t>(c)] = v;
    }

    std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](int a, int b) {
        const double ea = ranking.entropies[static_cast<std::size_t>(a)];
        const double eb = ranking.entropies[static_cast<std::size_t>(b)];
        return descending ? ea > eb : ea < eb;
    });

    return {apply_ranking(s, ranking), ranking};
}

core::Session apply_ranking(const core::Session& s, const EntropyRanking& ranking) {
    core::Session out = s;
    const std::size_t k = ranking.order.size();
    for (std::size_t i = 0; i < s.frames.size(); ++i)
        for (std::size_t c = 0; c < k; ++c)
            out.frames[i].readings[c] = s.frames[i].readings[static_cast<std::size_t>(ranking.order[c])];
    return out;
}

} // namespace padtrack::entropy

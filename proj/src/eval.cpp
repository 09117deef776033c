#include "padtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "padtrack/errors.hpp"
#include "padtrack/text.hpp"

namespace padtrack::eval {

double mae(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw ValidationError("mae: length mismatch (" + fmt(static_cast<std::int64_t>(pred.size())) +
                              " vs " + fmt(static_cast<std::int64_t>(truth.size())) + ")");
    if (pred.empty()) throw ValidationError("mae: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

std::vector<double> velocity_series(std::span<const double> truth_deg, double rate_hz,
                                    int window_frames) {
    if (window_frames < 2) throw ValidationError("velocity: window must be >= 2 frames");
    if (!(rate_hz > 0.0)) throw ValidationError("velocity: rate must be positive");
    const std::size_t n = truth_deg.size();
    if (n < static_cast<std::size_t>(window_frames)) return {};

    const double duration_ms = static_cast<double>(window_frames - 1) / rate_hz * 1000.0;
    std::vector<double> out(n, 0.0);
    for (std::size_t last = static_cast<std::size_t>(window_frames) - 1; last < n; ++last) {
        double sum = 0.0;
        for (std::size_t k = last - static_cast<std::size_t>(window_frames) + 2; k <= last; ++k)
            sum += std::abs(truth_deg[k] - truth_deg[k - 1]);
        out[last] = sum / duration_ms;
    }
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(window_frames); ++i)
        out[i] = out[static_cast<std::size_t>(window_frames) - 1];
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("pearson: need two equal-length series of size >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: constant input");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// U statistic of sample a with midrank ties.
double u_statistic(std::span<const double> a, std::span<const double> b) {
    struct Tagged {
        double v;
        bool from_a;
    };
    std::vector<Tagged> pool;
    pool.reserve(a.size() + b.size());
    for (double v : a) pool.push_back({v, true});
    for (double v : b) pool.push_back({v, false});
    std::sort(pool.begin(), pool.end(), [](const Tagged& x, const Tagged& y) { return x.v < y.v; });

    double rank_sum_a = 0.0;
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j + 1 < pool.size() && pool[j + 1].v == pool[i].v) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (pool[k].from_a) rank_sum_a += midrank;
        i = j + 1;
    }
    const double na = static_cast<double>(a.size());
    return rank_sum_a - na * (na + 1.0) / 2.0;
}

double tie_sum(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pool(a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    std::sort(pool.begin(), pool.end());
    double s = 0.0;
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j + 1 < pool.size() && pool[j + 1] == pool[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        s += t * t * t - t;
        i = j + 1;
    }
    return s;
}

double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// Exact two-sided p by enumerating which pooled positions belong to side a:
// the fraction of arrangements at least as far from the null mean as observed.
double exact_two_sided_p(std::span<const double> a, std::span<const double> b, double u_obs) {
    const std::size_t na = a.size(), nb = b.size();
    std::vector<double> pool(a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    std::sort(pool.begin(), pool.end());

    const double mean_u = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    const double dev_obs = std::abs(u_obs - mean_u);

    std::vector<bool> take(pool.size(), false);
    std::fill(take.begin(), take.begin() + static_cast<std::ptrdiff_t>(na), true);
    std::sort(take.begin(), take.end());  // lowest lexicographic selector first

    std::size_t extreme = 0, total = 0;
    std::vector<double> sel_a, sel_b;
    sel_a.reserve(na);
    sel_b.reserve(nb);
    do {
        sel_a.clear();
        sel_b.clear();
        for (std::size_t i = 0; i < pool.size(); ++i) (take[i] ? sel_a : sel_b).push_back(pool[i]);
        const double u = u_statistic(sel_a, sel_b);
        if (std::abs(u - mean_u) >= dev_obs - 1e-12) ++extreme;
        ++total;
    } while (std::next_permutation(take.begin(), take.end()));

    return static_cast<double>(extreme) / static_cast<double>(total);
}

} // namespace

MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u: empty sample");
    MwuResult res;
    res.u = u_statistic(a, b);

    const std::size_t min_n = std::min(a.size(), b.size());
    const double combos = binomial(a.size() + b.size(), min_n);
    if (min_n < 8 && combos <= 2e6) {
        res.exact = true;
        res.p_two_sided = exact_two_sided_p(a, b, res.u);
        return res;
    }

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double nn = na + nb;
    const double mean_u = na * nb / 2.0;
    double var = na * nb / 12.0 * ((nn + 1.0) - tie_sum(a, b) / (nn * (nn - 1.0)));
    if (var <= 0.0) {  // all values tied
        res.p_two_sided = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::abs(res.u - mean_u) - 0.5) / std::sqrt(var);
    res.p_two_sided = std::min(1.0, 2.0 * normal_sf(z));
    return res;
}

ErrorReport build_report(std::span<const SessionEval> sessions, const ReportOptions& options) {
    if (sessions.empty()) throw ValidationError("report: empty split");
    ErrorReport rep;
    rep.options = options;

    const std::size_t n_angle_bins = static_cast<std::size_t>(
        std::ceil((options.angle_max_deg - options.angle_min_deg) / options.angle_bin_deg - 1e-9));
    const std::size_t n_vel_bins =
        static_cast<std::size_t>(std::ceil(options.velocity_max / options.velocity_bin - 1e-9));
    std::vector<double> angle_err(n_angle_bins, 0.0), vel_err(n_vel_bins, 0.0);
    std::vector<std::size_t> angle_cnt(n_angle_bins, 0), vel_cnt(n_vel_bins, 0);

    std::map<core::Placement, std::pair<double, std::size_t>> per_place;
    std::vector<double> all_vel, all_abs_err;
    double err_sum = 0.0;
    std::size_t total = 0;

    for (const auto& s : sessions) {
        if (s.pred.size() != s.truth.size() || s.pred.size() != s.velocity.size())
            throw ValidationError("report: misaligned session series");
        auto& pp = per_place[s.placement];
        for (std::size_t i = 0; i < s.pred.size(); ++i) {
            const double err = std::abs(s.pred[i] - s.truth[i]);
            err_sum += err;
            ++total;
            pp.first += err;
            ++pp.second;

            const double rel = (s.truth[i] - options.angle_min_deg) / options.angle_bin_deg;
            std::size_t abin = rel <= 0.0 ? 0
                                          : std::min(n_angle_bins - 1,
                                                     static_cast<std::size_t>(std::floor(rel)));
            angle_err[abin] += err;
            ++angle_cnt[abin];

            const double vrel = s.velocity[i] / options.velocity_bin;
            std::size_t vbin = vrel <= 0.0 ? 0
                                           : std::min(n_vel_bins - 1,
                                                      static_cast<std::size_t>(std::floor(vrel)));
            vel_err[vbin] += err;
            ++vel_cnt[vbin];

            all_vel.push_back(s.velocity[i]);
            all_abs_err.push_back(err);
        }
    }
    if (total == 0) throw ValidationError("report: no samples");

    rep.overall_mae = err_sum / static_cast<double>(total);
    rep.total_samples = total;
    for (const auto& [pl, acc] : per_place)
        rep.by_placement.push_back({pl, acc.first / static_cast<double>(acc.second), acc.second});
    for (std::size_t i = 0; i < n_angle_bins; ++i)
        rep.by_angle.push_back({options.angle_min_deg + static_cast<double>(i) * options.angle_bin_deg,
                                options.angle_min_deg + static_cast<double>(i + 1) * options.angle_bin_deg,
                                angle_cnt[i] ? angle_err[i] / static_cast<double>(angle_cnt[i]) : 0.0,
                                angle_cnt[i]});
    for (std::size_t i = 0; i < n_vel_bins; ++i)
        rep.by_velocity.push_back({static_cast<double>(i) * options.velocity_bin,
                                   static_cast<double>(i + 1) * options.velocity_bin,
                                   vel_cnt[i] ? vel_err[i] / static_cast<double>(vel_cnt[i]) : 0.0,
                                   vel_cnt[i]});

    try {
        rep.corr_velocity_vs_error = pearson(all_vel, all_abs_err);
    } catch (const ValidationError&) {
        rep.corr_velocity_vs_error.reset();
    }
    std::vector<double> occ_counts, occ_mae;
    for (const auto& bs : rep.by_angle)
        if (bs.count > 0) {
            occ_counts.push_back(static_cast<double>(bs.count));
            occ_mae.push_back(bs.mae);
        }
    if (occ_counts.size() >= 2) {
        try {
            rep.corr_angle_count_vs_mae = pearson(occ_counts, occ_mae);
        } catch (const ValidationError&) {
            rep.corr_angle_count_vs_mae.reset();
        }
    }
    return rep;
}

} // namespace padtrack::eval

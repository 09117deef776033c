#include "padtrack/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "padtrack/rng.hpp"
#include "padtrack/text.hpp"

namespace padtrack::core {

Placement make_placement(double eta_cm, double beta_deg) {
    if (!std::isfinite(eta_cm) || !std::isfinite(beta_deg))
        throw ValidationError("placement: non-finite offsets");
    if (eta_cm < -kEtaMaxCm || eta_cm > kEtaMaxCm)
        throw ValidationError("placement: eta " + fmt(eta_cm) + " cm outside [-4, 4]");
    double b = std::fmod(beta_deg, 360.0);
    if (b < 0.0) b += 360.0;
    if (b >= 360.0) b = 0.0;  // fmod rounding at the seam
    return Placement{eta_cm, b};
}

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validate: return "validate";
        case Split::test: return "test";
    }
    return "?";
}

std::vector<double> Session::channel(int c) const {
    std::vector<double> out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) out[i] = frames[i].readings[static_cast<std::size_t>(c)];
    return out;
}

void Session::validate(bool raw_range) const {
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].timestamp_ms <= frames[i - 1].timestamp_ms)
            throw ValidationError("session: timestamps not strictly increasing at frame " +
                                  fmt(static_cast<std::int64_t>(i)));
    if (!frames.empty() && frames.front().timestamp_ms < 0)
        throw ValidationError("session: negative timestamp");
    if (!truth.empty() && truth.size() != frames.size())
        throw ValidationError("session: truth length " + fmt(static_cast<std::int64_t>(truth.size())) +
                              " != frame count " + fmt(static_cast<std::int64_t>(frames.size())));
    for (double a : truth)
        if (!(a >= kAngleMinDeg && a <= kAngleMaxDeg))
            throw ValidationError("session: truth angle " + fmt(a) + " outside [0, 190] deg");
    if (raw_range) {
        for (std::size_t i = 0; i < frames.size(); ++i)
            for (double v : frames[i].readings)
                if (!(v >= kRawMin && v <= kRawMax))
                    throw ValidationError("session: reading " + fmt(v) + " outside [0, 1023] at frame " +
                                          fmt(static_cast<std::int64_t>(i)));
    }
    if (rate_hz <= 0.0) throw ValidationError("session: rate_hz must be positive");
}

std::vector<Placement> Dataset::placements() const {
    std::vector<Placement> out;
    for (const auto& s : sessions) out.push_back(s.placement);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<const Session*> Dataset::sessions_in(Split sp) const {
    std::vector<const Session*> out;
    for (const auto& s : sessions) {
        auto it = split.find(s.placement);
        if (it != split.end() && it->second == sp) out.push_back(&s);
    }
    return out;
}

void Dataset::sort_canonical() {
    std::sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
        return std::tie(a.placement, a.motion_id, a.user_id) < std::tie(b.placement, b.motion_id, b.user_id);
    });
}

// ---- session file I/O ------------------------------------------------------

namespace {

std::filesystem::path meta_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta");
    return p;
}

} // namespace

Session load_session(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path.string());

    Session s;
    std::string line;
    long line_no = 0;
    bool with_angle = false;

    if (!std::getline(in, line)) throw ParseError(csv_path.string(), 1, "empty file");
    ++line_no;
    {
        std::string_view h = trim(line);
        if (h == "timestamp_ms,s1,s2,s3,s4,s5,s6")
            with_angle = false;
        else if (h == "timestamp_ms,s1,s2,s3,s4,s5,s6,angle_deg")
            with_angle = true;
        else
            throw ParseError(csv_path.string(), line_no, "unexpected header '" + std::string(h) + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = trim(line);
        if (v.empty()) continue;
        auto cols = split(v, ',');
        const std::size_t want = with_angle ? 8 : 7;
        if (cols.size() != want)
            throw ParseError(csv_path.string(), line_no,
                             "expected " + fmt(static_cast<std::int64_t>(want)) + " columns, got " +
                                 fmt(static_cast<std::int64_t>(cols.size())));
        SensorFrame f;
        try {
            f.timestamp_ms = parse_i64(cols[0]);
            for (int c = 0; c < kChannels; ++c)
                f.readings[static_cast<std::size_t>(c)] = parse_double(cols[static_cast<std::size_t>(c) + 1]);
            if (with_angle) s.truth.push_back(parse_double(cols[7]));
        } catch (const ParseError& e) {
            throw ParseError(csv_path.string(), line_no, e.what());
        }
        s.frames.push_back(f);
    }

    std::ifstream meta(meta_path(csv_path));
    if (!meta) throw IoError("missing sidecar " + meta_path(csv_path).string());
    double eta = 0.0, beta = 0.0;
    bool got_eta = false, got_beta = false, got_user = false, got_motion = false, got_rate = false;
    long meta_line = 0;
    while (std::getline(meta, line)) {
        ++meta_line;
        std::string_view v = trim(line);
        if (v.empty()) continue;
        const std::size_t eq = v.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(meta_path(csv_path).string(), meta_line, "expected key=value");
        std::string_view key = v.substr(0, eq), val = v.substr(eq + 1);
        if (key == "eta_cm") { eta = parse_double(val); got_eta = true; }
        else if (key == "beta_deg") { beta = parse_double(val); got_beta = true; }
        else if (key == "user_id") { s.user_id = std::string(val); got_user = true; }
        else if (key == "motion_id") { s.motion_id = std::string(val); got_motion = true; }
        else if (key == "rate_hz") { s.rate_hz = parse_double(val); got_rate = true; }
        else if (key == "config_hash") { /* provenance, not part of the session */ }
        else throw ParseError(meta_path(csv_path).string(), meta_line, "unknown key '" + std::string(key) + "'");
    }
    if (!(got_eta && got_beta && got_user && got_motion && got_rate))
        throw ParseError(meta_path(csv_path).string(), meta_line, "incomplete metadata");
    s.placement = make_placement(eta, beta);

    s.validate(true);
    return s;
}

void save_session(const Session& s, const std::filesystem::path& csv_path, const std::string& extra_meta) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + csv_path.string());
    const bool with_angle = s.has_truth();
    out << (with_angle ? "timestamp_ms,s1,s2,s3,s4,s5,s6,angle_deg\n" : "timestamp_ms,s1,s2,s3,s4,s5,s6\n");
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        const auto& f = s.frames[i];
        out << fmt(f.timestamp_ms);
        for (double v : f.readings) out << ',' << fmt(v);
        if (with_angle) out << ',' << fmt(s.truth[i]);
        out << '\n';
    }
    std::ofstream meta(meta_path(csv_path), std::ios::binary);
    if (!meta) throw IoError("cannot write " + meta_path(csv_path).string());
    meta << "eta_cm=" << fmt(s.placement.eta_cm) << '\n'
         << "beta_deg=" << fmt(s.placement.beta_deg) << '\n'
         << "user_id=" << s.user_id << '\n'
         << "motion_id=" << s.motion_id << '\n'
         << "rate_hz=" << fmt(s.rate_hz) << '\n';
    if (!extra_meta.empty()) meta << extra_meta;
}

// ---- preprocessing ---------------------------------------------------------

std::pair<Session, MinMaxStats> normalize_minmax(const Session& s) {
    if (s.frames.empty()) throw ValidationError("normalize: empty session");
    MinMaxStats st;
    for (int c = 0; c < kChannels; ++c) {
        double lo = s.frames[0].readings[static_cast<std::size_t>(c)];
        double hi = lo;
        for (const auto& f : s.frames) {
            lo = std::min(lo, f.readings[static_cast<std::size_t>(c)]);
            hi = std::max(hi, f.readings[static_cast<std::size_t>(c)]);
        }
        st.lo[static_cast<std::size_t>(c)] = lo;
        st.hi[static_cast<std::size_t>(c)] = hi;
        st.degenerate[static_cast<std::size_t>(c)] = (hi == lo);
    }
    return {apply_minmax(s, st), st};
}

Session apply_minmax(const Session& s, const MinMaxStats& st) {
    Session out = s;
    for (auto& f : out.frames) {
        for (int c = 0; c < kChannels; ++c) {
            const auto k = static_cast<std::size_t>(c);
            f.readings[k] = st.degenerate[k] ? 0.5 : (f.readings[k] - st.lo[k]) / (st.hi[k] - st.lo[k]);
        }
    }
    return out;
}

Session remove_outliers(const Session& s, double z) {
    if (z <= 0.0) throw ValidationError("remove_outliers: z must be positive");
    const std::size_t n = s.frames.size();
    if (n < 3) return s;

    Session out = s;
    for (int c = 0; c < kChannels; ++c) {
        const auto k = static_cast<std::size_t>(c);
        double mean = 0.0;
        for (const auto& f : s.frames) mean += f.readings[k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& f : s.frames) {
            const double d = f.readings[k] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        const double cut = z * sd;

        std::vector<bool> bad(n, false);
        bool any = false, all = true;
        for (std::size_t i = 0; i < n; ++i) {
            bad[i] = std::abs(s.frames[i].readings[k] - mean) > cut;
            any = any || bad[i];
            all = all && bad[i];
        }
        if (!any || all) continue;

        for (std::size_t i = 0; i < n; ++i) {
            if (!bad[i]) continue;
            // nearest clean neighbours on each side
            std::ptrdiff_t l = static_cast<std::ptrdiff_t>(i) - 1;
            while (l >= 0 && bad[static_cast<std::size_t>(l)]) --l;
            std::size_t r = i + 1;
            while (r < n && bad[r]) ++r;
            double repl;
            if (l >= 0 && r < n) {
                const double a = s.frames[static_cast<std::size_t>(l)].readings[k];
                const double b = s.frames[r].readings[k];
                const double t = static_cast<double>(i - static_cast<std::size_t>(l)) /
                                 static_cast<double>(r - static_cast<std::size_t>(l));
                repl = a + (b - a) * t;
            } else if (l >= 0) {
                repl = s.frames[static_cast<std::size_t>(l)].readings[k];
            } else {
                repl = s.frames[r].readings[k];
            }
            out.frames[i].readings[k] = repl;
        }
    }
    return out;
}

std::vector<double> resample_truth(std::span<const std::int64_t> truth_ts,
                                   std::span<const double> truth_deg,
                                   std::span<const std::int64_t> sensor_ts) {
    if (truth_ts.size() != truth_deg.size() || truth_ts.empty())
        throw ValidationError("resample_truth: truth series empty or mismatched");
    for (std::size_t i = 1; i < truth_ts.size(); ++i)
        if (truth_ts[i] <= truth_ts[i - 1])
            throw ValidationError("resample_truth: truth timestamps not strictly increasing");

    std::vector<double> out;
    out.reserve(sensor_ts.size());
    for (std::int64_t t : sensor_ts) {
        if (t < truth_ts.front() || t > truth_ts.back())
            throw ValidationError("resample_truth: sensor timestamp " + fmt(t) +
                                  " outside truth range [" + fmt(truth_ts.front()) + ", " +
                                  fmt(truth_ts.back()) + "]");
        // last index a with truth_ts[a] <= t
        const auto it = std::upper_bound(truth_ts.begin(), truth_ts.end(), t);
        const std::size_t a = static_cast<std::size_t>(it - truth_ts.begin()) - 1;
        if (truth_ts[a] == t || a + 1 == truth_ts.size()) {
            out.push_back(truth_deg[a]);
        } else {
            const double t0 = static_cast<double>(truth_ts[a]);
            const double t1 = static_cast<double>(truth_ts[a + 1]);
            const double w = (static_cast<double>(t) - t0) / (t1 - t0);
            out.push_back(truth_deg[a] + (truth_deg[a + 1] - truth_deg[a]) * w);
        }
    }
    return out;
}

std::vector<Window> make_windows(const Session& s, int W, int active_channels) {
    if (W < 1) throw ValidationError("make_windows: W must be >= 1");
    if (active_channels < 1 || active_channels > kChannels)
        throw ValidationError("make_windows: active channel count out of range");
    std::vector<Window> out;
    const std::size_t n = s.frames.size();
    if (n < static_cast<std::size_t>(W)) return out;

    out.reserve(n - static_cast<std::size_t>(W) + 1);
    for (std::size_t i = 0; i + static_cast<std::size_t>(W) <= n; ++i) {
        Window w;
        w.length = W;
        w.channels = active_channels;
        w.values.resize(static_cast<std::size_t>(W) * static_cast<std::size_t>(active_channels));
        for (int t = 0; t < W; ++t)
            for (int c = 0; c < active_channels; ++c)
                w.values[static_cast<std::size_t>(t) * static_cast<std::size_t>(active_channels) +
                         static_cast<std::size_t>(c)] =
                    s.frames[i + static_cast<std::size_t>(t)].readings[static_cast<std::size_t>(c)];
        if (s.has_truth()) w.target = s.truth[i + static_cast<std::size_t>(W) - 1];
        out.push_back(std::move(w));
    }
    return out;
}

Dataset partition(Dataset dataset, double train_frac, double validate_frac, double test_frac,
                  std::uint64_t seed) {
    if (!(train_frac > 0.0 && validate_frac > 0.0 && test_frac > 0.0))
        throw ValidationError("partition: fractions must be positive");
    if (std::abs(train_frac + validate_frac + test_frac - 1.0) > 1e-9)
        throw ValidationError("partition: fractions must sum to 1");

    std::vector<Placement> places = dataset.placements();
    const std::size_t n = places.size();
    if (n < 3) throw ValidationError("partition: need at least 3 placements for 3 splits");

    Rng rng(hash_combine(seed, 0x5eedc0defULL));
    rng.shuffle(places);

    const double fracs[3] = {train_frac, validate_frac, test_frac};
    std::size_t counts[3];
    double rema[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double q = fracs[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(q + 1e-9));
        rema[i] = q - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    while (assigned < n) {  // largest remainder, ties to the earlier split
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (rema[i] > rema[best] + 1e-12) best = i;
        ++counts[best];
        rema[best] = -1.0;
        ++assigned;
    }

    dataset.split.clear();
    std::size_t idx = 0;
    const Split order[3] = {Split::train, Split::validate, Split::test};
    for (int i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < counts[i]; ++k) dataset.split[places[idx++]] = order[i];
    return dataset;
}

} // namespace padtrack::core

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "padtrack/core.hpp"
#include "padtrack/rng.hpp"
#include "padtrack/sim.hpp"

using namespace padtrack;
using namespace padtrack::core;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "padtrack_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

Session tiny_session(std::size_t n, bool with_truth = true) {
    Session s;
    s.placement = make_placement(1.0, 45.0);
    s.user_id = "u0";
    s.motion_id = "bend";
    s.rate_hz = 50.0;
    for (std::size_t i = 0; i < n; ++i) {
        SensorFrame f;
        f.timestamp_ms = static_cast<std::int64_t>(i * 20);
        for (int c = 0; c < kChannels; ++c)
            f.readings[static_cast<std::size_t>(c)] = 100.0 + 10.0 * static_cast<double>(i) + c;
        s.frames.push_back(f);
        if (with_truth) s.truth.push_back(90.0 + static_cast<double>(i));
    }
    return s;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("placement invariants") {
    CHECK(make_placement(0.0, 365.0).beta_deg == doctest::Approx(5.0));
    CHECK(make_placement(0.0, -5.0).beta_deg == doctest::Approx(355.0));
    CHECK(make_placement(-4.0, 0.0).eta_cm == -4.0);
    CHECK_THROWS_AS(make_placement(4.5, 0.0), ValidationError);
    CHECK_THROWS_AS(make_placement(-4.01, 0.0), ValidationError);
}

TEST_CASE("load_session parses a minimal well-formed file") {
    auto csv = temp_file("mini.csv");
    {
        std::ofstream out(csv);
        out << "timestamp_ms,s1,s2,s3,s4,s5,s6,angle_deg\n";
        out << "0,1,2,3,4,5,6,90\n20,2,3,4,5,6,7,91\n40,3,4,5,6,7,8,92\n";
        std::ofstream meta(temp_file("mini.meta"));
        meta << "eta_cm=1\nbeta_deg=45\nuser_id=u0\nmotion_id=bend\nrate_hz=50\n";
    }
    Session s = load_session(csv);
    CHECK(s.frames.size() == 3);
    CHECK(s.truth.size() == 3);
    CHECK(s.placement.eta_cm == 1.0);
    CHECK(s.frames[2].readings[5] == 8.0);
}

TEST_CASE("load_session rejects out-of-range readings") {
    auto csv = temp_file("oob.csv");
    {
        std::ofstream out(csv);
        out << "timestamp_ms,s1,s2,s3,s4,s5,s6\n0,1024,2,3,4,5,6\n";
        std::ofstream meta(temp_file("oob.meta"));
        meta << "eta_cm=0\nbeta_deg=0\nuser_id=u\nmotion_id=m\nrate_hz=50\n";
    }
    CHECK_THROWS_AS(load_session(csv), ValidationError);
}

TEST_CASE("load_session reports the offending line for malformed rows") {
    auto csv = temp_file("bad.csv");
    {
        std::ofstream out(csv);
        out << "timestamp_ms,s1,s2,s3,s4,s5,s6\n0,1,2,3,4,5,6\nnope,1,2,3,4,5,6\n";
        std::ofstream meta(temp_file("bad.meta"));
        meta << "eta_cm=0\nbeta_deg=0\nuser_id=u\nmotion_id=m\nrate_hz=50\n";
    }
    try {
        load_session(csv);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("load_session rejects non-monotonic timestamps") {
    auto csv = temp_file("mono.csv");
    {
        std::ofstream out(csv);
        out << "timestamp_ms,s1,s2,s3,s4,s5,s6\n0,1,2,3,4,5,6\n0,1,2,3,4,5,6\n";
        std::ofstream meta(temp_file("mono.meta"));
        meta << "eta_cm=0\nbeta_deg=0\nuser_id=u\nmotion_id=m\nrate_hz=50\n";
    }
    CHECK_THROWS_AS(load_session(csv), ValidationError);
}

TEST_CASE("generated session round-trips losslessly and canonically") {
    auto profile = sim::UserProfile::standard(7);
    auto s = sim::gen_session(make_placement(2.0, 120.0), sim::MotionTemplate::named("bend"), profile,
                              sim::SensorLayout{}, 4.0, 50.0, 99, "u0");
    auto csv = temp_file("round.csv");
    save_session(s, csv);
    Session back = load_session(csv);
    REQUIRE(back.frames.size() == s.frames.size());
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        CHECK(back.frames[i].timestamp_ms == s.frames[i].timestamp_ms);
        for (int c = 0; c < kChannels; ++c)
            CHECK(back.frames[i].readings[static_cast<std::size_t>(c)] ==
                  s.frames[i].readings[static_cast<std::size_t>(c)]);
    }
    CHECK(back.truth == s.truth);
    CHECK(back.placement == s.placement);
    CHECK(back.rate_hz == s.rate_hz);

    // canonical: re-saving the loaded session is byte-identical
    auto csv2 = temp_file("round2.csv");
    save_session(back, csv2);
    CHECK(read_file(csv) == read_file(csv2));
}

TEST_CASE("normalize_minmax endpoints, linear map, degenerate channel") {
    Session s = tiny_session(3, false);
    // channel 0: 0 .. 1023; channel 1: 100,300,200; channel 2: constant
    s.frames[0].readings = {0.0, 100.0, 512.0, 1.0, 2.0, 3.0};
    s.frames[1].readings = {500.0, 300.0, 512.0, 2.0, 3.0, 4.0};
    s.frames[2].readings = {1023.0, 200.0, 512.0, 3.0, 4.0, 5.0};
    auto [norm, stats] = normalize_minmax(s);
    CHECK(norm.frames[0].readings[0] == 0.0);
    CHECK(norm.frames[2].readings[0] == 1.0);
    CHECK(norm.frames[0].readings[1] == 0.0);
    CHECK(norm.frames[1].readings[1] == 1.0);
    CHECK(norm.frames[2].readings[1] == doctest::Approx(0.5));
    for (const auto& f : norm.frames) CHECK(f.readings[2] == 0.5);
    CHECK(stats.degenerate[2]);
    CHECK_FALSE(stats.degenerate[0]);

    SUBCASE("idempotent on already-normalized data") {
        auto [norm2, stats2] = normalize_minmax(norm);
        for (std::size_t i = 0; i < norm.frames.size(); ++i)
            for (int c = 0; c < 2; ++c)
                CHECK(norm2.frames[i].readings[static_cast<std::size_t>(c)] ==
                      doctest::Approx(norm.frames[i].readings[static_cast<std::size_t>(c)]).epsilon(1e-12));
    }
}

TEST_CASE("remove_outliers replaces a lone spike by the neighbour midpoint") {
    Session s = tiny_session(11, false);
    for (std::size_t i = 0; i < s.frames.size(); ++i)
        for (int c = 0; c < kChannels; ++c) s.frames[i].readings[static_cast<std::size_t>(c)] = 100.0;
    s.frames[5].readings[2] = 100.0;
    // alternate small wiggle so sd > 0, then one huge spike
    for (std::size_t i = 0; i < s.frames.size(); ++i)
        s.frames[i].readings[0] = 100.0 + ((i % 2 == 0) ? 0.5 : -0.5);
    s.frames[5].readings[0] = 500.0;
    Session cleaned = remove_outliers(s, 3.0);
    CHECK(cleaned.frames.size() == s.frames.size());
    const double expect = 0.5 * (s.frames[4].readings[0] + s.frames[6].readings[0]);
    CHECK(cleaned.frames[5].readings[0] == doctest::Approx(expect));
    // untouched channel stays identical
    for (std::size_t i = 0; i < s.frames.size(); ++i) CHECK(cleaned.frames[i].readings[3] == 100.0);
}

TEST_CASE("remove_outliers alters at most 0.5% of clean gaussian samples") {
    Rng rng(123);
    Session s = tiny_session(4000, false);
    for (auto& f : s.frames)
        for (int c = 0; c < kChannels; ++c)
            f.readings[static_cast<std::size_t>(c)] = 500.0 + rng.normal(0.0, 20.0);
    Session cleaned = remove_outliers(s, 3.0);
    std::size_t altered = 0;
    for (std::size_t i = 0; i < s.frames.size(); ++i)
        for (int c = 0; c < kChannels; ++c)
            if (cleaned.frames[i].readings[static_cast<std::size_t>(c)] !=
                s.frames[i].readings[static_cast<std::size_t>(c)])
                ++altered;
    CHECK(static_cast<double>(altered) <=
          0.005 * static_cast<double>(s.frames.size() * kChannels));
}

TEST_CASE("remove_outliers keeps all-equal series unchanged") {
    Session s = tiny_session(20, false);
    for (auto& f : s.frames)
        for (int c = 0; c < kChannels; ++c) f.readings[static_cast<std::size_t>(c)] = 512.0;
    Session cleaned = remove_outliers(s, 3.0);
    for (std::size_t i = 0; i < s.frames.size(); ++i)
        CHECK(cleaned.frames[i].readings == s.frames[i].readings);
}

TEST_CASE("resample_truth midpoint, identity, and grid conversion") {
    const std::vector<std::int64_t> truth_ts{0, 20};
    const std::vector<double> truth_v{100.0, 120.0};
    SUBCASE("midpoint") {
        const std::vector<std::int64_t> sensor{10};
        auto out = resample_truth(truth_ts, truth_v, sensor);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == doctest::Approx(110.0));
    }
    SUBCASE("identity on identical grids") {
        auto out = resample_truth(truth_ts, truth_v, truth_ts);
        CHECK(out == truth_v);
    }
    SUBCASE("extrapolation is an error") {
        const std::vector<std::int64_t> sensor{30};
        CHECK_THROWS_AS(resample_truth(truth_ts, truth_v, sensor), ValidationError);
    }
    SUBCASE("60 Hz truth onto 50 Hz grid keeps the sensor count") {
        std::vector<std::int64_t> t60, t50;
        std::vector<double> v60;
        for (int i = 0; i < 120; ++i) {
            t60.push_back(static_cast<std::int64_t>(std::llround(i * 1000.0 / 60.0)));
            v60.push_back(100.0 + i);
        }
        for (int i = 0; i < 99; ++i) t50.push_back(i * 20);
        auto out = resample_truth(t60, v60, t50);
        CHECK(out.size() == t50.size());
    }
}

TEST_CASE("make_windows counts and target alignment") {
    Session s30 = tiny_session(30);
    Session s100 = tiny_session(100);
    Session s29 = tiny_session(29);
    // widen readings so they are within raw range
    CHECK(make_windows(s30, 30).size() == 1);
    CHECK(make_windows(s100, 30).size() == 71);
    CHECK(make_windows(s29, 30).empty());

    auto ws = make_windows(s100, 30);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        REQUIRE(ws[i].target.has_value());
        CHECK(*ws[i].target == s100.truth[i + 29]);
    }
    // values slice matches the frames
    CHECK(ws[3].values[0] == s100.frames[3].readings[0]);
    CHECK(ws[3].values[5] == s100.frames[3].readings[5]);
}

TEST_CASE("partition quotas, determinism, and split disjointness") {
    auto make_ds = [](int n) {
        Dataset ds;
        for (int i = 0; i < n; ++i) {
            Session s;
            s.placement = make_placement(0.0, static_cast<double>(i) * 360.0 / static_cast<double>(n));
            s.user_id = "u";
            s.motion_id = "m";
            ds.sessions.push_back(s);
        }
        return ds;
    };

    SUBCASE("639 placements at recorded fractions give 378/126/135") {
        Dataset ds = partition(make_ds(639), 378.0 / 639.0, 126.0 / 639.0, 135.0 / 639.0, 11);
        std::size_t n_train = 0, n_val = 0, n_test = 0;
        for (const auto& [p, sp] : ds.split) {
            if (sp == Split::train) ++n_train;
            else if (sp == Split::validate) ++n_val;
            else ++n_test;
        }
        CHECK(n_train == 378);
        CHECK(n_val == 126);
        CHECK(n_test == 135);
    }
    SUBCASE("three placements at equal fractions get one each") {
        Dataset ds = partition(make_ds(3), 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 5);
        std::set<Split> seen;
        for (const auto& [p, sp] : ds.split) seen.insert(sp);
        CHECK(seen.size() == 3);
    }
    SUBCASE("same seed twice gives identical splits") {
        Dataset a = partition(make_ds(24), 0.5, 0.25, 0.25, 77);
        Dataset b = partition(make_ds(24), 0.5, 0.25, 0.25, 77);
        CHECK(a.split == b.split);
    }
    SUBCASE("every placement lands in exactly one split") {
        Dataset ds = partition(make_ds(24), 0.5, 0.25, 0.25, 3);
        CHECK(ds.split.size() == 24);
        for (const auto& p : ds.placements()) CHECK(ds.split.count(p) == 1);
    }
    SUBCASE("fewer placements than splits fails") {
        CHECK_THROWS_AS(partition(make_ds(2), 0.4, 0.3, 0.3, 1), ValidationError);
    }
    SUBCASE("bad fractions fail") {
        CHECK_THROWS_AS(partition(make_ds(10), 0.5, 0.5, 0.5, 1), ValidationError);
        CHECK_THROWS_AS(partition(make_ds(10), 1.0, -0.5, 0.5, 1), ValidationError);
    }
}

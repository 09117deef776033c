#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "padtrack/eval.hpp"
#include "padtrack/rng.hpp"

using namespace padtrack;
using namespace padtrack::eval;

TEST_CASE("mae closed forms and oracle") {
    std::vector<double> a{10.0, 20.0}, b{12.0, 16.0};
    CHECK(mae(a, a) == 0.0);
    CHECK(mae(a, b) == doctest::Approx(3.0));
    std::vector<double> c{1.0};
    CHECK_THROWS_AS(mae(a, c), ValidationError);

    Rng rng(2);
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        x[i] = rng.uniform(0.0, 180.0);
        y[i] = rng.uniform(0.0, 180.0);
    }
    double want = 0.0;
    for (std::size_t i = 0; i < 30; ++i) want += std::abs(x[i] - y[i]);
    want /= 30.0;
    CHECK(mae(x, y) == doctest::Approx(want).epsilon(1e-12));

    SUBCASE("permutation invariance under a shared permutation") {
        std::vector<std::size_t> perm(30);
        for (std::size_t i = 0; i < 30; ++i) perm[i] = i;
        rng.shuffle(perm);
        std::vector<double> xp(30), yp(30);
        for (std::size_t i = 0; i < 30; ++i) {
            xp[i] = x[perm[i]];
            yp[i] = y[perm[i]];
        }
        CHECK(mae(xp, yp) == doctest::Approx(mae(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("velocity closed forms") {
    SUBCASE("constant series is all zeros") {
        std::vector<double> c(20, 90.0);
        auto v = velocity_series(c, 50.0, 2);
        REQUIRE(v.size() == 20);
        for (double x : v) CHECK(x == 0.0);
    }
    SUBCASE("1 deg/frame ramp at 50 Hz is 0.05 deg/ms everywhere") {
        std::vector<double> ramp(40);
        for (std::size_t i = 0; i < 40; ++i) ramp[i] = static_cast<double>(i);
        auto v = velocity_series(ramp, 50.0, 2);
        REQUIRE(v.size() == 40);
        for (double x : v) CHECK(x == doctest::Approx(0.05).epsilon(1e-12));
    }
    SUBCASE("triangle wave matches a hand oracle") {
        // period 4: 0,1,2,1 ... window of 3 frames at 50 Hz spans 40 ms
        std::vector<double> tri;
        for (int i = 0; i < 12; ++i) {
            const int ph = i % 4;
            tri.push_back(ph == 3 ? 1.0 : static_cast<double>(ph));
        }
        auto v = velocity_series(tri, 50.0, 3);
        REQUIRE(v.size() == tri.size());
        for (std::size_t last = 2; last < tri.size(); ++last) {
            const double want =
                (std::abs(tri[last] - tri[last - 1]) + std::abs(tri[last - 1] - tri[last - 2])) / 40.0;
            CHECK(v[last] == doctest::Approx(want).epsilon(1e-12));
        }
    }
    SUBCASE("short series yields empty; bad window rejected") {
        std::vector<double> one{1.0};
        CHECK(velocity_series(one, 50.0, 2).empty());
        std::vector<double> ok(10, 0.0);
        CHECK_THROWS_AS(velocity_series(ok, 50.0, 1), ValidationError);
    }
    SUBCASE("velocity is never negative") {
        Rng rng(31);
        std::vector<double> s(100);
        for (auto& x : s) x = rng.uniform(40.0, 180.0);
        for (double x : velocity_series(s, 50.0, 2)) CHECK(x >= 0.0);
    }
}

TEST_CASE("pearson closed forms, oracle, and affine invariance") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    std::vector<double> y2x1{3.0, 5.0, 7.0, 9.0};
    std::vector<double> ynegx{-1.0, -2.0, -3.0, -4.0};
    CHECK(pearson(x, y2x1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, ynegx) == doctest::Approx(-1.0).epsilon(1e-12));

    std::vector<double> constant(4, 2.0);
    CHECK_THROWS_AS(pearson(x, constant), ValidationError);

    Rng rng(17);
    std::vector<double> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
        a[i] = rng.normal(0.0, 2.0);
        b[i] = 0.4 * a[i] + rng.normal(0.0, 1.0);
    }
    // independent two-pass oracle
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= 50;
    mb /= 50;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    CHECK(pearson(a, b) == doctest::Approx(sab / std::sqrt(saa * sbb)).epsilon(1e-12));

    std::vector<double> a_aff(50), b_aff(50);
    for (std::size_t i = 0; i < 50; ++i) {
        a_aff[i] = 3.0 * a[i] + 7.0;
        b_aff[i] = 0.5 * b[i] - 2.0;
    }
    CHECK(pearson(a_aff, b_aff) == doctest::Approx(pearson(a, b)).epsilon(1e-12));
}

TEST_CASE("mann-whitney U statistic and p values") {
    std::vector<double> a{1.0, 2.0}, b{3.0, 4.0};
    auto res = mann_whitney_u(a, b);
    CHECK(res.u == 0.0);
    CHECK(res.exact);

    SUBCASE("identical multisets sit at the null mean") {
        std::vector<double> m{1.0, 2.0, 5.0};
        auto r = mann_whitney_u(m, m);
        CHECK(r.u == doctest::Approx(4.5));  // |a||b|/2
        CHECK(r.p_two_sided == doctest::Approx(1.0));
    }
    SUBCASE("exact p matches the 70-arrangement enumeration oracle") {
        Rng rng(23);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> x(4), y(4);
            for (auto& v : x) v = rng.uniform(0.0, 10.0);
            for (auto& v : y) v = rng.uniform(2.0, 12.0);
            auto r = mann_whitney_u(x, y);
            CHECK(r.exact);
            CHECK(r.p_two_sided == doctest::Approx(oracle::mwu_exact_p_enumerated(x, y)).epsilon(1e-12));
            CHECK(r.u == doctest::Approx(oracle::u_stat_direct(x, y)).epsilon(1e-12));
        }
    }
    SUBCASE("ties are handled by midranks in the exact path too") {
        std::vector<double> x{1.0, 2.0, 2.0, 3.0}, y{2.0, 2.0, 4.0, 5.0};
        auto r = mann_whitney_u(x, y);
        CHECK(r.u == doctest::Approx(oracle::u_stat_direct(x, y)).epsilon(1e-12));
        CHECK(r.p_two_sided == doctest::Approx(oracle::mwu_exact_p_enumerated(x, y)).epsilon(1e-12));
    }
    SUBCASE("large samples use the normal approximation") {
        Rng rng(29);
        std::vector<double> x(200), y(220);
        for (auto& v : x) v = rng.normal(0.0, 1.0);
        for (auto& v : y) v = rng.normal(0.5, 1.0);
        auto r = mann_whitney_u(x, y);
        CHECK_FALSE(r.exact);
        CHECK(r.p_two_sided > 0.0);
        CHECK(r.p_two_sided < 0.05);  // clear shift
    }
    SUBCASE("empty samples are rejected") {
        std::vector<double> e;
        std::vector<double> ok{1.0};
        CHECK_THROWS_AS(mann_whitney_u(e, ok), ValidationError);
    }
}

TEST_CASE("report conserves counts across bins") {
    Rng rng(37);
    std::vector<SessionEval> sessions;
    std::size_t total = 0;
    for (int s = 0; s < 3; ++s) {
        SessionEval se;
        se.placement = core::make_placement(static_cast<double>(s), 40.0 * s);
        const std::size_t n = 50 + static_cast<std::size_t>(s) * 13;
        for (std::size_t i = 0; i < n; ++i) {
            const double truth = rng.uniform(20.0, 190.0);  // also outside the bin range
            se.truth.push_back(truth);
            se.pred.push_back(truth + rng.normal(0.0, 5.0));
            se.velocity.push_back(rng.uniform(0.0, 3.0));   // overflow bin included
        }
        total += n;
        sessions.push_back(std::move(se));
    }
    auto rep = build_report(sessions, ReportOptions{});
    CHECK(rep.total_samples == total);
    std::size_t angle_total = 0, vel_total = 0, place_total = 0;
    for (const auto& b : rep.by_angle) angle_total += b.count;
    for (const auto& b : rep.by_velocity) vel_total += b.count;
    for (const auto& p : rep.by_placement) place_total += p.count;
    CHECK(angle_total == total);
    CHECK(vel_total == total);
    CHECK(place_total == total);
    CHECK(rep.overall_mae > 0.0);
    CHECK(rep.by_placement.size() == 3);

    SUBCASE("empty split is an error") {
        std::vector<SessionEval> none;
        CHECK_THROWS_AS(build_report(none, ReportOptions{}), ValidationError);
    }
}

#include "liencycle/bifurcation.hpp"
#include "liencycle/error.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace liencycle;

TEST_CASE("point classification") {
    const auto i = classify_point(Family::GLO, -1.0, 0.0, 1.0);
    CHECK(i.label == RegionLabel::I);
    CHECK(i.cycle_count == 1);
    CHECK(i.origin == OriginType::Source);
    const auto ii = classify_point(Family::GLO, 1.0, -2.0, 1.0);
    CHECK(ii.label == RegionLabel::II);
    CHECK(ii.cycle_count == 0);
    const auto iii = classify_point(Family::GLO, 1.0, -2.6, 1.0);
    CHECK(iii.label == RegionLabel::III);
    CHECK(iii.cycle_count == 2);
    CHECK(classify_point(Family::GLO, 0.0, 1.0, 1.0).label == RegionLabel::H1);
    CHECK(classify_point(Family::GLO, 0.0, -1.0, 1.0).label == RegionLabel::H2);
    CHECK(classify_point(Family::Filippov, 1.0, -2.6, 1.0).label == RegionLabel::III);
    const auto bad = classify_point(Family::GLO, 1.0, -2.6, -1.0);
    CHECK(bad.label == RegionLabel::Unclassified);
    CHECK_FALSE(bad.reason.empty());
}

TEST_CASE("region map inserts a = 0 and is deterministic") {
    BifurcationOptions opts;
    const auto m1 = region_map(Family::GLO, 1.0, -0.5, 1.0, -3.0, 0.0, 3, 5, opts);
    CHECK(m1.a_values.size() == 4);
    CHECK(std::count(m1.a_values.begin(), m1.a_values.end(), 0.0) == 1);
    CHECK(m1.cells.size() == 20);
    CHECK(m1.violations.empty());
    for (const auto& c : m1.cells) {
        if (c.a < 0.0) CHECK(c.label == RegionLabel::I);
        if (c.a == 0.0) CHECK(c.label == (c.b >= 0.0 ? RegionLabel::H1 : RegionLabel::H2));
    }
    opts.workers = 2;
    const auto m2 = region_map(Family::GLO, 1.0, -0.5, 1.0, -3.0, 0.0, 3, 5, opts);
    std::ostringstream a, b;
    write_regions_csv(a, m1);
    write_regions_csv(b, m2);
    CHECK(a.str() == b.str());
    CHECK_THROWS_AS((void)region_map(Family::GLO, 1.0, 0.0, 1.0, -1.0, 0.0, 1, 5), ConfigError);
}

TEST_CASE("double-limit-cycle curve lies between the analytic bounds") {
    BifurcationOptions opts;
    const auto trace = trace_dl(Family::GLO, 1.0, {1.0}, opts);
    REQUIRE(trace.points.size() == 1);
    const auto& p = trace.points[0];
    CHECK(p.bounds_ok);
    CHECK(p.phi > -2.5);
    CHECK(p.phi < -2.0);
    CHECK(p.bracket_width <= 1e-4);
    // Consistency on both sides of the located fold.
    CHECK(classify_point(Family::GLO, 1.0, p.phi - 10 * p.bracket_width, 1.0, opts).cycle_count == 2);
    CHECK(classify_point(Family::GLO, 1.0, p.phi + 10 * p.bracket_width, 1.0, opts).cycle_count == 0);
}

TEST_CASE("Rychkov family obeys the same bounds") {
    const auto trace = trace_dl(Family::Rychkov, 0.0, {1.0, 2.0});
    for (const auto& p : trace.points) CHECK(p.bounds_ok);
    CHECK(trace.phi_decreasing);
}

TEST_CASE("trace_dl input validation") {
    CHECK_THROWS_AS((void)trace_dl(Family::GLO, 1.0, {0.0}), ConfigError);
    BifurcationOptions opts;
    opts.cycles.y_max = 1e-2;  // scan too short to see any cycle
    CHECK_THROWS_AS((void)trace_dl(Family::GLO, 1.0, {1.0}, opts), BracketInvalid);
    CHECK(parse_family("filippov") == Family::Filippov);
    CHECK_THROWS_AS((void)parse_family("vdp"), ConfigError);
}

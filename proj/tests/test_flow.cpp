#include "liencycle/error.hpp"
#include "liencycle/flow.hpp"
#include "liencycle/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace liencycle;

TEST_CASE("harmonic oscillator closes after one period") {
    const System sys(builtin::hamiltonian_test());
    IntegrationOptions opts;
    opts.stop_after_events = 2;
    const auto traj = integrate(sys, 0.0, 1.0, 100.0, opts);
    REQUIRE(traj.terminal == Terminal::ReturnedToSection);
    REQUIRE(traj.events.size() == 2);
    CHECK(traj.events[0].direction == Direction::RightToLeft);
    CHECK(traj.events[1].direction == Direction::LeftToRight);
    CHECK(std::abs(traj.back().x) < 1e-8);
    CHECK(std::abs(traj.back().y - 1.0) < 1e-8);
    CHECK(std::abs(traj.back().t - 2.0 * std::numbers::pi) < 1e-8);
}

TEST_CASE("damped linear oscillator matches the matrix exponential") {
    // x' = y - k x, y' = -x
    const double k = 0.4;
    SystemSpec s;
    s.name = "linear";
    s.domain_d = 5.0;
    s.F_terms = {OddTerm::power(k, 1.0)};
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    const System sys(s);
    const double x0 = 0.7, y0 = 1.3;
    const auto traj = integrate(sys, x0, y0, 12.0);
    const double mu = -k / 2.0, w = std::sqrt(1.0 - k * k / 4.0);
    for (const auto& p : traj.samples) {
        const double e = std::exp(mu * p.t), c = std::cos(w * p.t), sn = std::sin(w * p.t) / w;
        // exp(At) = e^{mu t} [cos(wt) I + sin(wt)/w (A - mu I)], A = [[-k, 1], [-1, 0]]
        const double x = e * (c * x0 + sn * ((-k - mu) * x0 + y0));
        const double y = e * (c * y0 + sn * (-x0 - mu * y0));
        CHECK(std::abs(p.x - x) < 1e-8);
        CHECK(std::abs(p.y - y) < 1e-8);
    }
    CHECK(traj.events.size() >= 3);
}

TEST_CASE("central symmetry of trajectories") {
    for (const auto& spec : {builtin::glo(1.0, -2.6, 1.0), builtin::filippov(1.0, -2.6, 1.0)}) {
        const System sys(spec);
        const auto a = integrate(sys, 0.3, 1.1, 20.0);
        const auto b = integrate(sys, -0.3, -1.1, 20.0);
        REQUIRE(a.samples.size() == b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i].t == doctest::Approx(b.samples[i].t).epsilon(1e-12));
            CHECK(std::abs(a.samples[i].x + b.samples[i].x) < 1e-8);
            CHECK(std::abs(a.samples[i].y + b.samples[i].y) < 1e-8);
        }
    }
}

TEST_CASE("crossings of the Filippov system are transversal") {
    const System sys(builtin::filippov(1.0, -2.6, 1.0));
    CHECK(crossing_indicator(0.5) > 0.0);
    CHECK(crossing_indicator(0.0) == 0.0);
    const auto traj = integrate(sys, 0.0, 2.0, 40.0);
    REQUIRE(traj.events.size() > 4);
    for (std::size_t i = 0; i < traj.events.size(); ++i) {
        const auto& e = traj.events[i];
        CHECK(std::abs(e.y) > 1e-3);
        CHECK(crossing_indicator(e.y) > 0.0);
        // Events alternate and have the sign required by the direction.
        CHECK((e.direction == Direction::RightToLeft) == (e.y < 0.0));
        if (i > 0) CHECK(e.direction != traj.events[i - 1].direction);
    }
    CHECK(energy_residual(sys, traj) < 1e-6);
}

TEST_CASE("energy identity holds on smooth and discontinuous systems") {
    for (const auto& spec : {builtin::glo(1.0, -3.0, 1.0), builtin::pls(1.0, 1.0, -1.8),
                             builtin::filippov(-1.0, 0.0, 1.0)}) {
        const System sys(spec);
        const auto traj = integrate(sys, 0.0, 1.5 * sys.y_scale(), 30.0);
        CHECK(energy_residual(sys, traj) < 1e-6);
    }
}

TEST_CASE("origin approach terminates") {
    // Linear node x' = y - 3x, y' = -x: exponential approach to the origin disk.
    SystemSpec s;
    s.name = "node";
    s.domain_d = 2.0;
    s.F_terms = {OddTerm::power(3.0, 1.0)};
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    const System sys(s);
    const auto traj = integrate(sys, 0.0, 0.05, 1e4);
    CHECK(traj.terminal == Terminal::EnteredOriginDisk);
}

TEST_CASE("node wedge traps degenerate-node approaches") {
    const System sys(builtin::glo(1.0, -2.6, 0.0));
    CHECK(in_node_wedge(sys, 0.01, 0.008));
    CHECK(in_node_wedge(sys, -0.01, -0.008));
    CHECK_FALSE(in_node_wedge(sys, 0.01, -0.008));
    CHECK_FALSE(in_node_wedge(sys, 0.01, 0.02));  // above y = F(x)
    // A focus (Filippov step) never has such a wedge.
    const System fil(builtin::filippov(1.0, -2.6, 1.0));
    CHECK_FALSE(in_node_wedge(fil, 0.01, 0.008));
    IntegrationOptions opts;
    opts.detect_trapping = true;
    const auto traj = integrate(sys, 0.0, 0.01, 1e4, opts);
    CHECK(traj.terminal == Terminal::EnteredOriginDisk);
}

TEST_CASE("leaving the domain") {
    const System sys(builtin::glo(-1.0, 0.0, 1.0));
    const auto traj = integrate(sys, 0.0, 10.0 * sys.y_cap(), 1.0);
    CHECK(traj.terminal == Terminal::LeftDomain);
}

TEST_CASE("dense output interpolates the step ends") {
    const System sys(builtin::glo(1.0, -2.6, 1.0));
    const auto traj = integrate(sys, 0.2, 1.0, 5.0);
    for (const auto& p : traj.pieces) {
        CHECK(p.x_at(p.t0) == doctest::Approx(p.x0));
        CHECK(p.y_at(p.t1) == doctest::Approx(p.y1));
        CHECK(p.max_abs_x() >= std::max(std::abs(p.x0), std::abs(p.x1)));
    }
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    CHECK(os.str().rfind("t,x,y,event\n", 0) == 0);
}

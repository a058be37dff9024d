#include "liencycle/cycles.hpp"
#include "liencycle/error.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

using namespace liencycle;

namespace {

SystemSpec van_der_pol() {
    SystemSpec s;
    s.name = "van-der-pol";
    s.domain_d = 5.0;
    s.F_terms = {OddTerm::power(-1.0, 1.0), OddTerm::power(1.0 / 3.0, 3.0)};
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    return s;
}

}  // namespace

TEST_CASE("Hamiltonian displacement vanishes") {
    const System sys(builtin::hamiltonian_test());
    for (int i = 0; i < 20; ++i) {
        const double y0 = 0.05 * std::pow(1.25, i);
        const auto r = half_return(sys, y0);
        REQUIRE(r.outcome == ReturnOutcome::Returned);
        CHECK(std::abs(r.displacement) < 1e-8);
        CHECK(r.max_x == doctest::Approx(y0).epsilon(1e-8));
    }
    CHECK_THROWS_AS((void)half_return(sys, 0.0), ConfigError);
}

TEST_CASE("van der Pol cycle matches the classical values") {
    // mu = 1: amplitude 2.00861986, period 6.66328686 (standard references).
    const System sys(van_der_pol());
    const auto cycles = find_cycles(sys);
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0].amplitude == doctest::Approx(2.00861986).epsilon(1e-7));
    CHECK(cycles[0].period == doctest::Approx(6.66328686).epsilon(1e-7));
    CHECK(cycles[0].stability == Stability::Stable);
    CHECK(origin_stability(sys) == OriginType::Source);
}

TEST_CASE("two nested cycles of the quintic oscillator") {
    const System sys(builtin::glo(1.0, -2.6, 1.0));
    DisplacementProfile profile;
    const auto cycles = find_cycles(sys, {}, profile);
    REQUIRE(cycles.size() == 2);
    CHECK(cycles[0].stability == Stability::Unstable);
    CHECK(cycles[1].stability == Stability::Stable);
    CHECK(cycles[0].amplitude < cycles[1].amplitude);
    CHECK(cycle_multiplicity(cycles) == 2);
    CHECK(origin_stability(sys) == OriginType::Sink);
    for (const auto& c : cycles) {
        CHECK(c.residual < 1e-8 * c.y0_star);
        // Slope of the half-return displacement is exp(div / 2) - 1.
        CHECK(c.displacement_slope == doctest::Approx(std::expm1(c.div_integral / 2.0)).epsilon(1e-3));
        CHECK((c.displacement_slope > 0.0) == (c.div_integral > 0.0));
    }
    std::ostringstream os;
    write_profile_csv(os, profile);
    CHECK(os.str().rfind("y0,y1,displacement,max_x,outcome\n", 0) == 0);
}

TEST_CASE("cycle counts across the regimes") {
    CHECK(find_cycles(System(builtin::glo(0.0, 1.0, 1.0))).empty());
    CHECK(find_cycles(System(builtin::glo(4.0, -4.0, 1.0))).empty());
    const auto one = find_cycles(System(builtin::glo(-1.0, 0.0, 1.0)));
    REQUIRE(one.size() == 1);
    CHECK(one[0].div_integral < 0.0);
    CHECK(origin_stability(System(builtin::glo(-1.0, 0.0, 1.0))) == OriginType::Source);
}

TEST_CASE("strongly repelling inner cycle") {
    const System sys(builtin::glo(4.0, -6.0, 1.0));
    const auto cycles = find_cycles(sys);
    REQUIRE(cycles.size() == 2);
    CHECK(cycles[0].stability == Stability::Unstable);
    CHECK(cycles[0].div_integral > 10.0);
    CHECK(cycles[1].stability == Stability::Stable);
}

TEST_CASE("scan is independent of the worker count") {
    const System sys(builtin::filippov(1.0, -2.6, 1.0));
    CycleOptions one, two;
    two.workers = 2;
    const auto a = find_cycles(sys, one);
    const auto b = find_cycles(sys, two);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].y0_star == b[i].y0_star);
}

TEST_CASE("normalization preserves the section ordinates") {
    const auto sys = std::make_shared<const System>(builtin::glo(1.0, -2.6, 0.0));
    const auto ns = normalize_system(sys);
    for (double x : {1e-3, 0.2, 1.0, 2.5}) CHECK(ns->h_inverse(ns->h(x)) == doctest::Approx(x).epsilon(1e-12));
    CHECK(ns->h_inverse(-ns->h(0.7)) == doctest::Approx(-0.7));
    const auto a = find_cycles(*sys);
    const auto b = find_cycles(*ns);
    REQUIRE(a.size() == 2);
    REQUIRE(b.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i].y0_star - b[i].y0_star) < 1e-6);
        CHECK(a[i].stability == b[i].stability);
    }
}

TEST_CASE("divergence integral needs a closed orbit") {
    const System sys(builtin::glo(1.0, -2.6, 1.0));
    const auto open = integrate(sys, 0.0, 1.5, 1.0);
    CHECK_THROWS_AS((void)divergence_integral(sys, open), NonClosed);
    const System ham(builtin::hamiltonian_test());
    CHECK(std::abs(divergence_integral(ham, full_cycle(ham, 1.0))) < 1e-12);
}

TEST_CASE("semistable candidates count twice") {
    std::vector<LimitCycle> v(2);
    v[0].stability = Stability::Stable;
    v[1].stability = Stability::SemistableCandidate;
    CHECK(cycle_multiplicity(v) == 3);
}

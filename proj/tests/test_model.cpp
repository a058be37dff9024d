#include "liencycle/error.hpp"
#include "liencycle/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace liencycle;

namespace {

double quintic(double a, double b, double x) { return a * x + b * x * x * x + std::pow(x, 5); }

}  // namespace

TEST_CASE("F is odd with F(0) = 0 and matches the quintic") {
    const System sys(builtin::glo(1.0, -2.6, 1.0));
    CHECK(sys.F(0.0) == 0.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CHECK(sys.F(x) == doctest::Approx(quintic(1.0, -2.6, x)).epsilon(1e-13));
        CHECK(sys.F(-x) == -sys.F(x));
        CHECK(sys.G(-x) == sys.G(x));
        CHECK(sys.f(x) == doctest::Approx(1.0 - 7.8 * x * x + 5.0 * std::pow(x, 4)).epsilon(1e-12));
    }
}

TEST_CASE("g and G with the sign step, sgn(0) = 0") {
    const System fil(builtin::filippov(1.0, -2.6, 0.5));
    CHECK(fil.g(0.0) == 0.0);
    CHECK(fil.g(0.2) == doctest::Approx(0.7));
    CHECK(fil.g(-0.2) == doctest::Approx(-0.7));
    CHECK(fil.G(0.0) == 0.0);
    CHECK(fil.G(0.4) == doctest::Approx(0.08 + 0.2));
    const System glo(builtin::glo(1.0, -2.6, 2.0));
    CHECK(glo.G(1.5) == doctest::Approx(2.25 + std::pow(1.5, 4) / 4.0));
    CHECK(glo.energy(0.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("energy is nonnegative and vanishes only at the origin") {
    const System sys(builtin::filippov(1.0, -2.6, 1.0));
    CHECK(sys.energy(0.0, 0.0) == 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) CHECK(sys.energy(u(rng), u(rng)) > 0.0);
}

TEST_CASE("closed-form characteristic points of the quintic") {
    // x^4 - 3 x^2 + 1 = 0 has the golden-ratio roots.
    const System sys(builtin::glo(1.0, -3.0, 1.0));
    const auto& p = sys.characteristic_points();
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(p.beta1 == doctest::Approx(phi - 1.0).epsilon(1e-14));
    CHECK(p.beta2 == doctest::Approx(phi).epsilon(1e-14));
    CHECK(p.alpha1 == doctest::Approx(std::sqrt((9.0 + std::sqrt(61.0)) / 10.0)).epsilon(1e-14));
    CHECK(std::abs(sys.F(p.beta1)) < 1e-14);
    CHECK(std::abs(sys.f(p.alpha1)) < 1e-13);
    CHECK(p.method == CharacteristicPoints::Method::ClosedForm);
    CHECK_FALSE(p.alpha1_is_corner);
}

TEST_CASE("numeric characteristic points agree with the closed form") {
    // Same quintic written with a general term list, so the numeric path is used.
    SystemSpec s;
    s.name = "quintic-numeric";
    s.domain_d = 3.0;
    s.F_terms = {OddTerm::power(1.0, 1.0), OddTerm::power(-3.0, 3.0), OddTerm::power(2.0, 5.0)};
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    const System sys(s);
    const auto& p = sys.characteristic_points();
    // 1 - 3 x^2 + 2 x^4 = (1 - x^2)(1 - 2 x^2)
    CHECK(p.beta1 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(p.beta2 == doctest::Approx(1.0).epsilon(1e-10));
    // 1 - 9 x^2 + 10 x^4 = 0, larger root
    CHECK(p.alpha1 == doctest::Approx(std::sqrt((9.0 + std::sqrt(41.0)) / 20.0)).epsilon(1e-10));
    CHECK(p.method == CharacteristicPoints::Method::Numeric);
}

TEST_CASE("piecewise characteristic points with a corner at alpha1") {
    // With u = |x|^{2/3}: F/sgn = 0.2u (u<1), 1 - 0.8u (1<u<2), u - 2.6 (u>2).
    const System sys(builtin::pls(1.0, 1.0, -1.8));
    const auto& p = sys.characteristic_points();
    CHECK(p.beta1 == doctest::Approx(std::pow(1.25, 1.5)).epsilon(1e-10));
    CHECK(p.alpha1 == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-10));
    CHECK(p.beta2 == doctest::Approx(std::pow(2.6, 1.5)).epsilon(1e-10));
    CHECK(p.alpha1_is_corner);
    CHECK(sys.is_corner(1.0));
    CHECK(sys.is_corner(std::pow(2.0, 1.5)));
    CHECK(sys.F_non_lipschitz_at_origin());
    CHECK_THROWS_AS((void)sys.f(0.0), NonDifferentiable);
}

TEST_CASE("no positive zeros gives ShapeMismatch") {
    const System sys(builtin::glo(1.0, -2.0, 1.0));
    CHECK_FALSE(sys.has_characteristic_points());
    CHECK_THROWS_AS((void)sys.characteristic_points(), ShapeMismatch);
    CHECK_FALSE(sys.shape_error().empty());
}

TEST_CASE("spec validation") {
    SystemSpec s = builtin::glo(1.0, -2.6, 1.0);
    SUBCASE("sign step in F") {
        s.F_terms.push_back(OddTerm::sign_step(1.0));
        try {
            System sys(s);
            FAIL("accepted a discontinuous F");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("(H1)") != std::string::npos);
        }
    }
    SUBCASE("x g0 <= 0") {
        s.g0_terms = {OddTerm::power(-1.0, 1.0)};
        CHECK_THROWS_AS(System{s}, ConfigError);
    }
    SUBCASE("negative step") {
        s.c = -0.5;
        CHECK_THROWS_AS(System{s}, ConfigError);
    }
    SUBCASE("nonpositive exponent") {
        s.F_terms.push_back(OddTerm::power(1.0, 0.0));
        CHECK_THROWS_AS(System{s}, ConfigError);
    }
    SUBCASE("sign step in g0") {
        s.g0_terms.push_back(OddTerm::sign_step(1.0));
        CHECK_THROWS_AS(System{s}, ConfigError);
    }
}

TEST_CASE("term algebra") {
    const auto sat = OddTerm::saturated(2.0, 2.0 / 3.0, 1.0);
    CHECK(sat.value(0.5) == doctest::Approx(2.0 * std::pow(0.5, 2.0 / 3.0)));
    CHECK(sat.value(-8.0) == doctest::Approx(-2.0));
    CHECK(sat.derivative(8.0) == 0.0);
    CHECK(sat.corner() == doctest::Approx(1.0));
    const auto cube = OddTerm::power(1.5, 3.0);
    CHECK(cube.value(-2.0) == -12.0);
    CHECK(cube.derivative(-2.0) == doctest::Approx(18.0));
    CHECK(cube.second_derivative(-2.0) == doctest::Approx(-18.0));
    CHECK(cube.antiderivative(2.0) == doctest::Approx(6.0));
    // Finite-difference check of the antiderivative of a saturated term.
    const double h = 1e-6;
    for (double x : {0.3, 0.9, 1.7}) {
        const double fd = (sat.antiderivative(x + h) - sat.antiderivative(x - h)) / (2 * h);
        CHECK(fd == doctest::Approx(sat.value(x)).epsilon(1e-7));
    }
}

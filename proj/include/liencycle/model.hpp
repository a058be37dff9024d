#pragma once

// Liénard systems  x' = y - F(x),  y' = -g(x)  with odd F and
// g(x) = g0(x) + c * sgn(x).  F and g0 are sums of odd closed-form terms so
// that derivatives and antiderivatives are exact.

#include <optional>
#include <string>
#include <vector>

namespace liencycle {

enum class TermKind { PowerOdd, SaturatedPowerOdd, SignStep };

/// One odd building block of F or g0.
///   PowerOdd(k,p)(x)             = k sgn(x) |x|^p
///   SaturatedPowerOdd(k,p,s)(x)  = k sgn(x) min(|x|^p, s)
///   SignStep(k)(x)               = k sgn(x)
/// with sgn(0) = 0.
struct OddTerm {
    TermKind kind = TermKind::PowerOdd;
    double coef = 0.0;
    double exponent = 1.0;
    double saturation = 0.0;

    static OddTerm power(double coef, double exponent);
    static OddTerm saturated(double coef, double exponent, double saturation);
    static OddTerm sign_step(double coef);

    [[nodiscard]] double value(double x) const;
    /// Even function. At a saturation corner the one-sided value from larger |x| (0).
    /// Throws NonDifferentiable at x = 0 when exponent < 1.
    [[nodiscard]] double derivative(double x) const;
    [[nodiscard]] double second_derivative(double x) const;
    /// Even function, zero at x = 0.
    [[nodiscard]] double antiderivative(double x) const;

    /// |x| at which the saturated branch begins (SaturatedPowerOdd only).
    [[nodiscard]] double corner() const;
    /// True when the derivative is unbounded at 0.
    [[nodiscard]] bool singular_at_origin() const {
        return kind != TermKind::SignStep && exponent < 1.0;
    }
};

struct SystemSpec {
    std::string name;
    double domain_d = 1.0;
    double c = 0.0;  ///< sign-step coefficient of g
    std::vector<OddTerm> F_terms;
    std::vector<OddTerm> g0_terms;
};

struct CharacteristicPoints {
    enum class Method { ClosedForm, Numeric };
    double beta1 = 0.0;
    double alpha1 = 0.0;
    double beta2 = 0.0;
    std::vector<double> fprime_zeros;  ///< positive zeros (or sign-change corners) of F'
    bool alpha1_is_corner = false;     ///< F' changes sign by a jump at alpha1
    Method method = Method::Numeric;
};

/// Read-only view of a planar Liénard vector field used by the integrator and
/// the cycle machinery. The step part of g is exposed separately so callers
/// can evaluate each half-plane's smooth field up to x = 0.
class LienardField {
public:
    virtual ~LienardField() = default;

    [[nodiscard]] virtual double F(double x) const = 0;
    [[nodiscard]] virtual double f(double x) const = 0;
    [[nodiscard]] virtual double g0(double x) const = 0;
    [[nodiscard]] virtual double G(double x) const = 0;
    [[nodiscard]] virtual double step() const = 0;
    [[nodiscard]] virtual double domain() const = 0;
    /// Positive |x| values where F' jumps.
    [[nodiscard]] virtual const std::vector<double>& corners() const = 0;
    [[nodiscard]] virtual bool f_singular_at_origin() const = 0;
    /// Frequency scale near the origin, used to shape the origin disk.
    [[nodiscard]] virtual double origin_frequency() const = 0;
    /// sqrt(2 G(beta2)) when beta2 exists, else 1.
    [[nodiscard]] virtual double y_scale() const = 0;
    [[nodiscard]] virtual const std::string& name() const = 0;
    /// beta1 < alpha1 < beta2 when F has the two-zero shape, else nullptr.
    [[nodiscard]] virtual const CharacteristicPoints* points() const { return nullptr; }

    [[nodiscard]] double g(double x) const {
        const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        return g0(x) + step() * s;
    }
    /// Smooth restoring force of the half-plane with sign `side`, extended to x = 0.
    [[nodiscard]] double g_side(double x, int side) const { return g0(x) + step() * side; }
    [[nodiscard]] double energy(double x, double y) const { return G(x) + 0.5 * y * y; }
    /// Default bound on |y| for integrations: 10 sqrt(2 G(d)).
    [[nodiscard]] double y_cap() const;
};

/// Validated system built from a SystemSpec.
class System final : public LienardField {
public:
    /// Throws ConfigError when the spec violates the structural requirements
    /// (continuous F, x g0(x) > 0, c >= 0, positive exponents, ...).
    explicit System(SystemSpec spec);

    [[nodiscard]] const SystemSpec& spec() const noexcept { return spec_; }

    double F(double x) const override;
    double f(double x) const override;
    double g0(double x) const override;
    double G(double x) const override;
    double step() const override { return spec_.c; }
    double domain() const override { return spec_.domain_d; }
    const std::vector<double>& corners() const override { return corners_; }
    bool f_singular_at_origin() const override;
    double origin_frequency() const override { return omega_; }
    double y_scale() const override { return y_scale_; }
    const std::string& name() const override { return spec_.name; }
    const CharacteristicPoints* points() const override { return points_ ? &*points_ : nullptr; }

    [[nodiscard]] double f_prime(double x) const;   ///< F''
    [[nodiscard]] double g0_prime(double x) const;  ///< g0'
    [[nodiscard]] bool is_corner(double x) const;

    /// Throws ShapeMismatch when F lacks exactly two positive simple zeros.
    [[nodiscard]] const CharacteristicPoints& characteristic_points() const;
    [[nodiscard]] bool has_characteristic_points() const { return points_.has_value(); }
    /// Why characteristic_points() fails, empty when it succeeds.
    [[nodiscard]] const std::string& shape_error() const { return shape_error_; }

    /// max |F| on the bracketing grid.
    [[nodiscard]] double F_scale() const { return F_scale_; }
    /// Non-Lipschitz terms in F (exponent < 1) make F non-Lipschitz at 0.
    [[nodiscard]] bool F_non_lipschitz_at_origin() const;
    [[nodiscard]] bool g0_non_lipschitz_at_origin() const;

private:
    void compute_points();
    [[nodiscard]] std::optional<CharacteristicPoints> closed_form_points() const;

    SystemSpec spec_;
    std::vector<double> corners_;
    double omega_ = 1.0;
    double y_scale_ = 1.0;
    double F_scale_ = 0.0;
    std::optional<CharacteristicPoints> points_;
    std::string shape_error_;
    int zeros_found_ = 0;
};

/// Builtins. Defaults for domain_d are chosen so every cycle of the family fits.
namespace builtin {
/// x' = y - (a x + b x^3 + x^5), y' = -(c x + x^3)
[[nodiscard]] SystemSpec glo(double a, double b, double c);
/// x' = y - (a x + b x^3 + x^5), y' = -x - c sgn(x)
[[nodiscard]] SystemSpec filippov(double a, double b, double c);
/// x' = y - (mu1 x + mu2 x^3 + x^5), y' = -x
[[nodiscard]] SystemSpec rychkov(double mu1, double mu2);
/// F = sgn(x)[a1|x|^{2/3} + a2 min(|x|^{2/3},1) + a3 min(|x|^{2/3},2)], g = x^{1/3}
[[nodiscard]] SystemSpec pls(double a1, double a2, double a3);
/// F = 0, g = x
[[nodiscard]] SystemSpec hamiltonian_test();
}  // namespace builtin

/// Sign function with sgn(0) = 0.
[[nodiscard]] constexpr double sgn(double x) noexcept {
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

}  // namespace liencycle

#include "liencycle/model.hpp"

#include "liencycle/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace liencycle {

namespace {

constexpr int kBracketGridPoints = 4096;
constexpr double kGridLowFraction = 1e-6;

bool is_small_integer(double p) {
    return p >= 0.0 && p <= 32.0 && std::floor(p) == p;
}

/// a^p for a >= 0, exact repeated multiplication for integer p.
double abs_pow(double a, double p) {
    if (p == 1.0) return a;
    if (is_small_integer(p)) {
        double r = 1.0;
        for (int i = 0; i < static_cast<int>(p); ++i) r *= a;
        return r;
    }
    if (a == 0.0) return p > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(a, p);
}

double odd(double x, double magnitude) {
    if (x > 0.0) return magnitude;
    if (x < 0.0) return -magnitude;
    return 0.0;
}

/// Bisection on a sign change of `fn` in [lo, hi] down to adjacent doubles.
template <typename Fn>
double bisect_sign(Fn&& fn, double lo, double hi) {
    double flo = fn(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> grid(n);
    const double ratio = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) grid[i] = lo * std::exp(ratio * i);
    grid.back() = hi;
    return grid;
}

double quintic_domain(double a, double b) {
    return std::max(3.0, 2.0 * std::sqrt(1.0 + std::max(std::abs(a), std::abs(b))));
}

}  // namespace

// ---------------------------------------------------------------------------
// OddTerm

OddTerm OddTerm::power(double coef, double exponent) {
    return OddTerm{TermKind::PowerOdd, coef, exponent, 0.0};
}

OddTerm OddTerm::saturated(double coef, double exponent, double saturation) {
    return OddTerm{TermKind::SaturatedPowerOdd, coef, exponent, saturation};
}

OddTerm OddTerm::sign_step(double coef) {
    return OddTerm{TermKind::SignStep, coef, 0.0, 0.0};
}

double OddTerm::value(double x) const {
    const double a = std::abs(x);
    switch (kind) {
    case TermKind::PowerOdd:
        return odd(x, coef * abs_pow(a, exponent));
    case TermKind::SaturatedPowerOdd:
        return odd(x, coef * std::min(abs_pow(a, exponent), saturation));
    case TermKind::SignStep:
        return odd(x, coef);
    }
    return 0.0;
}

double OddTerm::derivative(double x) const {
    const double a = std::abs(x);
    switch (kind) {
    case TermKind::PowerOdd:
    case TermKind::SaturatedPowerOdd:
        if (kind == TermKind::SaturatedPowerOdd && abs_pow(a, exponent) >= saturation) return 0.0;
        if (exponent == 1.0) return coef;
        if (a == 0.0) {
            if (exponent < 1.0) throw NonDifferentiable(x);
            return 0.0;
        }
        return coef * exponent * abs_pow(a, exponent - 1.0);
    case TermKind::SignStep:
        if (a == 0.0) throw NonDifferentiable(x);
        return 0.0;
    }
    return 0.0;
}

double OddTerm::second_derivative(double x) const {
    const double a = std::abs(x);
    if (kind == TermKind::SignStep) return 0.0;
    if (kind == TermKind::SaturatedPowerOdd && abs_pow(a, exponent) >= saturation) return 0.0;
    if (exponent == 1.0) return 0.0;
    if (a == 0.0) {
        if (exponent < 2.0) throw NonDifferentiable(x);
        return 0.0;
    }
    return odd(x, coef * exponent * (exponent - 1.0) * abs_pow(a, exponent - 2.0));
}

double OddTerm::antiderivative(double x) const {
    const double a = std::abs(x);
    switch (kind) {
    case TermKind::PowerOdd:
        return coef * abs_pow(a, exponent + 1.0) / (exponent + 1.0);
    case TermKind::SaturatedPowerOdd: {
        const double ap = abs_pow(a, exponent);
        if (ap <= saturation) return coef * a * ap / (exponent + 1.0);
        const double ac = corner();
        return coef * (ac * saturation / (exponent + 1.0) + saturation * (a - ac));
    }
    case TermKind::SignStep:
        return coef * a;
    }
    return 0.0;
}

double OddTerm::corner() const {
    if (kind != TermKind::SaturatedPowerOdd) return std::numeric_limits<double>::infinity();
    return std::pow(saturation, 1.0 / exponent);
}

// ---------------------------------------------------------------------------
// LienardField

double LienardField::y_cap() const {
    return 10.0 * std::sqrt(2.0 * G(domain()));
}

// ---------------------------------------------------------------------------
// System

System::System(SystemSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.domain_d > 0.0) || !std::isfinite(spec_.domain_d))
        throw ConfigError("domain_d", "must be a finite positive number");
    if (!(spec_.c >= 0.0) || !std::isfinite(spec_.c))
        throw ConfigError("c", "the sign-step coefficient of g must be >= 0");

    auto check_terms = [](const std::vector<OddTerm>& terms, const char* field) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& t = terms[i];
            const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
            if (!std::isfinite(t.coef)) throw ConfigError(where, "coef must be finite");
            if (t.kind == TermKind::SignStep) {
                if (std::string(field) == "F_terms")
                    throw ConfigError(where, "F must be continuous (H1); SignStep terms are not allowed in F_terms");
                throw ConfigError(where, "g0 must be continuous; put the jump of g into c");
            }
            if (!(t.exponent > 0.0) || !std::isfinite(t.exponent))
                throw ConfigError(where, "exponent must be > 0");
            if (t.kind == TermKind::SaturatedPowerOdd && !(t.saturation > 0.0))
                throw ConfigError(where, "saturation must be > 0");
        }
    };
    check_terms(spec_.F_terms, "F_terms");
    check_terms(spec_.g0_terms, "g0_terms");
    if (spec_.g0_terms.empty()) throw ConfigError("g0_terms", "g0 must satisfy x g0(x) > 0; got g0 = 0");

    const auto grid = geometric_grid(kGridLowFraction * spec_.domain_d, spec_.domain_d, 1000);
    for (double x : grid) {
        if (!(g0(x) > 0.0) || !(g0(-x) < 0.0)) {
            std::ostringstream os;
            os << "x g0(x) > 0 violated at x = " << x;
            throw ConfigError("g0_terms", os.str());
        }
    }

    for (const auto& t : spec_.F_terms) {
        if (t.kind == TermKind::SaturatedPowerOdd) corners_.push_back(t.corner());
    }
    std::sort(corners_.begin(), corners_.end());
    corners_.erase(std::unique(corners_.begin(), corners_.end()), corners_.end());

    double gp = 0.0;
    const double x_small = 1e-8 * spec_.domain_d;
    for (const auto& t : spec_.g0_terms) gp += t.derivative(x_small);
    omega_ = std::sqrt(std::clamp(gp, 1.0, 1e6));

    compute_points();
    if (points_) y_scale_ = std::sqrt(2.0 * G(points_->beta2));
}

double System::F(double x) const {
    double s = 0.0;
    for (const auto& t : spec_.F_terms) s += t.value(x);
    return s;
}

double System::f(double x) const {
    double s = 0.0;
    for (const auto& t : spec_.F_terms) s += t.derivative(x);
    return s;
}

double System::f_prime(double x) const {
    double s = 0.0;
    for (const auto& t : spec_.F_terms) s += t.second_derivative(x);
    return s;
}

double System::g0(double x) const {
    double s = 0.0;
    for (const auto& t : spec_.g0_terms) s += t.value(x);
    return s;
}

double System::g0_prime(double x) const {
    double s = 0.0;
    for (const auto& t : spec_.g0_terms) s += t.derivative(x);
    return s;
}

double System::G(double x) const {
    double s = spec_.c * std::abs(x);
    for (const auto& t : spec_.g0_terms) s += t.antiderivative(x);
    return s;
}

bool System::f_singular_at_origin() const {
    return std::any_of(spec_.F_terms.begin(), spec_.F_terms.end(),
                       [](const OddTerm& t) { return t.singular_at_origin(); });
}

bool System::F_non_lipschitz_at_origin() const { return f_singular_at_origin(); }

bool System::g0_non_lipschitz_at_origin() const {
    return std::any_of(spec_.g0_terms.begin(), spec_.g0_terms.end(),
                       [](const OddTerm& t) { return t.singular_at_origin(); });
}

bool System::is_corner(double x) const {
    const double a = std::abs(x);
    return std::any_of(corners_.begin(), corners_.end(), [a](double c) {
        return std::abs(a - c) <= 1e-12 * std::max(1.0, c);
    });
}

const CharacteristicPoints& System::characteristic_points() const {
    if (!points_) throw ShapeMismatch(zeros_found_, shape_error_);
    return *points_;
}

std::optional<CharacteristicPoints> System::closed_form_points() const {
    // a x + b x^3 + x^5 with a > 0, b < -2 sqrt(a).
    double a = 0.0, b = 0.0, lead = 0.0;
    for (const auto& t : spec_.F_terms) {
        if (t.kind != TermKind::PowerOdd) return std::nullopt;
        if (t.exponent == 1.0) a += t.coef;
        else if (t.exponent == 3.0) b += t.coef;
        else if (t.exponent == 5.0) lead += t.coef;
        else return std::nullopt;
    }
    if (lead != 1.0 || !(a > 0.0) || !(b < -2.0 * std::sqrt(a))) return std::nullopt;

    CharacteristicPoints p;
    p.method = CharacteristicPoints::Method::ClosedForm;
    const double disc = std::sqrt(b * b - 4.0 * a);
    p.beta1 = std::sqrt((-b - disc) / 2.0);
    p.beta2 = std::sqrt((-b + disc) / 2.0);
    const double disc_f = std::sqrt(9.0 * b * b - 20.0 * a);
    const double x1 = std::sqrt((-3.0 * b - disc_f) / 10.0);
    const double x2 = std::sqrt((-3.0 * b + disc_f) / 10.0);
    p.fprime_zeros = {x1, x2};
    p.alpha1 = x2;
    if (!(p.beta2 < spec_.domain_d)) return std::nullopt;
    return p;
}

void System::compute_points() {
    const double d = spec_.domain_d;
    const auto grid = geometric_grid(kGridLowFraction * d, d, kBracketGridPoints);
    std::vector<double> Fv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Fv[i] = F(grid[i]);
        F_scale_ = std::max(F_scale_, std::abs(Fv[i]));
    }
    if (F_scale_ == 0.0) F_scale_ = 1.0;

    if (auto closed = closed_form_points()) {
        zeros_found_ = 2;
        points_ = std::move(closed);
        return;
    }

    auto Ffn = [this](double x) { return F(x); };
    std::vector<double> zeros;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (Fv[i] == 0.0) {
            zeros.push_back(grid[i]);
        } else if ((Fv[i] > 0.0) != (Fv[i + 1] > 0.0) && Fv[i + 1] != 0.0) {
            zeros.push_back(bisect_sign(Ffn, grid[i], grid[i + 1]));
        }
    }
    zeros_found_ = static_cast<int>(zeros.size());
    if (zeros.size() != 2) {
        shape_error_ = "found " + std::to_string(zeros.size()) + " sign change(s) of F on the bracketing grid";
        return;
    }

    CharacteristicPoints p;
    p.method = CharacteristicPoints::Method::Numeric;
    p.beta1 = zeros[0];
    p.beta2 = zeros[1];
    if (!(Fv[0] > 0.0)) {
        shape_error_ = "F is not positive on (0, beta1)";
        return;
    }

    auto ffn = [this](double x) { return f(x); };
    double prev = f(grid[0]);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double next = f(grid[i + 1]);
        if (prev != 0.0 && next != 0.0 && (prev > 0.0) != (next > 0.0))
            p.fprime_zeros.push_back(bisect_sign(ffn, grid[i], grid[i + 1]));
        else if (next == 0.0 && prev != 0.0)
            p.fprime_zeros.push_back(grid[i + 1]);
        prev = next;
    }
    bool found = false;
    for (double z : p.fprime_zeros) {
        if (z > p.beta1 && z < p.beta2) {
            p.alpha1 = z;
            found = true;
        }
    }
    if (!found) {
        shape_error_ = "F' has no zero in (beta1, beta2)";
        return;
    }
    if (is_corner(p.alpha1)) {
        // Snap to the exact corner location.
        for (double c : corners_) {
            if (std::abs(c - p.alpha1) <= 1e-9 * c) p.alpha1 = c;
        }
        p.alpha1_is_corner = true;
    } else {
        const double fa = f(p.alpha1);
        const double fl = f(p.alpha1 * (1.0 - 1e-9));
        const double fr = f(p.alpha1 * (1.0 + 1e-9));
        if (std::abs(fa) > 1e-6 * std::max({1.0, std::abs(fl), std::abs(fr)}) &&
            (fl > 0.0) != (fr > 0.0))
            p.alpha1_is_corner = true;
    }
    points_ = std::move(p);
}

// ---------------------------------------------------------------------------
// Builtins

namespace builtin {

namespace {
std::string fmt_params(const std::string& family, std::initializer_list<double> params) {
    std::string out = family + ":";
    bool first = true;
    for (double p : params) {
        if (!first) out += ",";
        char buf[32];
        out.append(buf, std::to_chars(buf, buf + sizeof(buf), p).ptr);
        first = false;
    }
    return out;
}

std::vector<OddTerm> quintic(double a, double b) {
    return {OddTerm::power(a, 1.0), OddTerm::power(b, 3.0), OddTerm::power(1.0, 5.0)};
}
}  // namespace

SystemSpec glo(double a, double b, double c) {
    SystemSpec s;
    s.name = fmt_params("glo", {a, b, c});
    s.domain_d = quintic_domain(a, std::max(std::abs(b), std::abs(c)));
    s.c = 0.0;
    s.F_terms = quintic(a, b);
    if (c != 0.0) s.g0_terms.push_back(OddTerm::power(c, 1.0));
    s.g0_terms.push_back(OddTerm::power(1.0, 3.0));
    return s;
}

SystemSpec filippov(double a, double b, double c) {
    SystemSpec s;
    s.name = fmt_params("filippov", {a, b, c});
    s.domain_d = quintic_domain(a, std::max(std::abs(b), std::abs(c)));
    s.c = c;
    s.F_terms = quintic(a, b);
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    return s;
}

SystemSpec rychkov(double mu1, double mu2) {
    SystemSpec s;
    s.name = fmt_params("rychkov", {mu1, mu2});
    s.domain_d = quintic_domain(mu1, mu2);
    s.c = 0.0;
    s.F_terms = quintic(mu1, mu2);
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    return s;
}

SystemSpec pls(double a1, double a2, double a3) {
    SystemSpec s;
    s.name = fmt_params("pls", {a1, a2, a3});
    s.domain_d = 40.0;
    s.c = 0.0;
    s.F_terms = {OddTerm::power(a1, 2.0 / 3.0), OddTerm::saturated(a2, 2.0 / 3.0, 1.0),
                 OddTerm::saturated(a3, 2.0 / 3.0, 2.0)};
    s.g0_terms = {OddTerm::power(1.0, 1.0 / 3.0)};
    return s;
}

SystemSpec hamiltonian_test() {
    SystemSpec s;
    s.name = "hamiltonian-test";
    s.domain_d = 10.0;
    s.c = 0.0;
    s.g0_terms = {OddTerm::power(1.0, 1.0)};
    return s;
}

}  // namespace builtin

}  // namespace liencycle

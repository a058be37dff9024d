#include "liencycle/hypotheses.hpp"

#include "liencycle/error.hpp"
#include "liencycle/format.hpp"
#include "liencycle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace liencycle {

namespace {

constexpr double kDerivativeTol = 1e-9;
constexpr double kFprimeTol = 1e-10;
constexpr double kLipschitzCap = 1e12;

/// n points strictly inside (lo, hi).
std::vector<double> interior_grid(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * (i + 1.0) / (n + 1.0);
    return v;
}

/// n points on [lo, hi] including both ends.
std::vector<double> closed_grid(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1.0);
    v.back() = hi;
    return v;
}

MonotonicityResult check_nondecreasing(const std::function<double(double)>& derivative, double lo,
                                       double hi, int n, const char* what) {
    MonotonicityResult r;
    r.lo = lo;
    r.hi = hi;
    r.samples = n;
    const auto grid = closed_grid(lo, hi, n);
    std::vector<double> dv(grid.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        dv[i] = derivative(grid[i]);
        if (std::isfinite(dv[i])) scale = std::max(scale, std::abs(dv[i]));
    }
    const double tol = kDerivativeTol * std::max(1.0, scale);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(dv[i] >= -tol)) {
            r.holds = false;
            r.witness = Witness{grid[i], dv[i], std::string("derivative of ") + what + " is negative"};
            return r;
        }
    }
    r.holds = true;
    return r;
}

/// First sample x in `grid` where pred(value(x)) fails.
std::optional<Witness> first_violation(const std::vector<double>& grid,
                                       const std::function<double(double)>& value,
                                       const std::function<bool(double)>& ok,
                                       const std::string& reason) {
    for (double x : grid) {
        const double v = value(x);
        if (!ok(v)) return Witness{x, v, reason};
    }
    return std::nullopt;
}

Sign sign_of(double v, double tol) {
    if (v > tol) return Sign::Positive;
    if (v < -tol) return Sign::Negative;
    return Sign::Zero;
}

HypothesisResult check_h1(const System& sys, const HypothesesOptions& opts) {
    HypothesisResult r;
    const double d = sys.domain();
    const auto grid = interior_grid(-d, d, opts.lipschitz_samples);
    double worst = 0.0, worst_x = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double slope =
            std::abs(sys.F(grid[i + 1]) - sys.F(grid[i])) / (grid[i + 1] - grid[i]);
        if (!(slope <= worst)) {
            worst = slope;
            worst_x = grid[i];
        }
    }
    r.holds = std::isfinite(worst) && worst < kLipschitzCap;
    if (!r.holds) r.witness = Witness{worst_x, worst, "sampled slope of F exceeds the Lipschitz cap"};
    r.note = "sampled Lipschitz estimate " + format_double(worst) + " on " +
             std::to_string(opts.lipschitz_samples) + " points; F odd by construction";
    if (r.holds && sys.F_non_lipschitz_at_origin()) {
        r.marginal = true;
        r.note += "; F has a term |x|^p with p < 1, so F is not Lipschitz at x = 0";
    }
    return r;
}

HypothesisResult check_h2(const System& sys, const HypothesesOptions& opts) {
    HypothesisResult r;
    if (!sys.has_characteristic_points()) {
        r.holds = false;
        r.witness = Witness{0.0, 0.0, "ShapeMismatch: " + sys.shape_error()};
        return r;
    }
    const auto& p = sys.characteristic_points();
    const double d = sys.domain();
    const int n = opts.sign_samples;
    auto F = [&](double x) { return sys.F(x); };
    auto f = [&](double x) { return sys.f(x); };

    if (auto w = first_violation(interior_grid(0.0, p.beta1, n), F, [](double v) { return v > 0.0; },
                                 "F must be > 0 on (0, beta1)")) {
        r.witness = w;
        return r;
    }
    if (auto w = first_violation(interior_grid(p.beta1, p.beta2, n), F,
                                 [](double v) { return v < 0.0; }, "F must be < 0 on (beta1, beta2)")) {
        r.witness = w;
        return r;
    }
    if (auto w = first_violation(interior_grid(p.beta2, d, n), F, [](double v) { return v > 0.0; },
                                 "F must be > 0 on (beta2, d)")) {
        r.witness = w;
        return r;
    }
    if (auto w = first_violation(interior_grid(p.beta1, p.alpha1, n), f,
                                 [](double v) { return v <= kFprimeTol; },
                                 "F' must be <= 0 on (beta1, alpha1)")) {
        r.witness = w;
        return r;
    }
    for (double c : sys.corners()) {
        if ((c > p.beta1 && c < p.alpha1) || (c > p.alpha1 && c < d)) {
            r.witness = Witness{c, 0.0, "F is not C^1 on (beta1, alpha1) U (alpha1, d)"};
            return r;
        }
    }
    r.holds = true;
    if (p.alpha1_is_corner) r.note = "F' changes sign by a jump at alpha1";
    return r;
}

HypothesisResult check_h3(const System& sys) {
    HypothesisResult r;
    // Oddness of g0, x g0(x) > 0 and c >= 0 are enforced when the System is built.
    r.holds = sys.step() >= 0.0;
    r.note = "g0 odd by construction; x g0(x) > 0 sampled at load; c = " + format_double(sys.step());
    if (sys.g0_non_lipschitz_at_origin()) {
        r.marginal = true;
        r.note += "; g0 has a term |x|^p with p < 1, so g0 is not Lipschitz at x = 0";
    }
    return r;
}

double integral_gF(const System& sys, double lo, double hi) {
    std::vector<double> cuts{lo, hi};
    for (double c : sys.corners())
        if (c > lo && c < hi) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += gauss_legendre_composite(cuts[i], cuts[i + 1], 200,
                                          [&](double x) { return sys.g(x) * sys.F(x); });
    }
    return total;
}

}  // namespace

const char* to_string(H4Branch b) {
    switch (b) {
    case H4Branch::FMonotone: return "f_monotone";
    case H4Branch::WeightedMonotone: return "weighted_monotone";
    case H4Branch::Neither: return "neither";
    }
    return "?";
}

const char* to_string(ThmABranch b) {
    switch (b) {
    case ThmABranch::FMonotone: return "f_monotone";
    case ThmABranch::FOverGMonotone: return "f_over_g_monotone";
    case ThmABranch::Neither: return "neither";
    }
    return "?";
}

const char* to_string(Sign s) {
    switch (s) {
    case Sign::Negative: return "negative";
    case Sign::Zero: return "zero";
    case Sign::Positive: return "positive";
    }
    return "?";
}

double f_over_g_derivative(const System& sys, double x) {
    const double g = sys.g(x);
    return (sys.f_prime(x) * g - sys.f(x) * sys.g0_prime(x)) / (g * g);
}

double weighted_derivative(const System& sys, double alpha1, double x) {
    const double g = sys.g(x);
    const double f = sys.f(x);
    return f * f / g + (sys.F(x) - sys.F(alpha1)) * f_over_g_derivative(sys, x);
}

TheoremAReport check_theoremA_d(const System& sys, const HypothesesOptions& opts) {
    TheoremAReport r;
    if (!sys.has_characteristic_points()) {
        r.witness = Witness{0.0, 0.0, "ShapeMismatch: " + sys.shape_error()};
        return r;
    }
    const double alpha1 = sys.characteristic_points().alpha1;
    const double d = sys.domain();
    r.f_check = check_nondecreasing([&](double x) { return sys.f_prime(x); }, alpha1, d,
                                    opts.monotone_samples, "f");
    r.f_over_g_check = check_nondecreasing([&](double x) { return f_over_g_derivative(sys, x); },
                                           alpha1, d, opts.monotone_samples, "f/g");
    if (r.f_over_g_check.holds) r.branch = ThmABranch::FOverGMonotone;
    else if (r.f_check.holds) r.branch = ThmABranch::FMonotone;
    r.holds = r.branch != ThmABranch::Neither;
    if (!r.holds) r.witness = r.f_check.witness;
    return r;
}

Theorem2Report check_theorem2(const System& sys, const HypothesesOptions& opts) {
    Theorem2Report r;
    const double d = sys.domain();
    r.integral_upper = opts.integral_upper > 0.0 ? opts.integral_upper : d;
    if (!sys.has_characteristic_points()) return r;
    const auto& p = sys.characteristic_points();
    r.applicable = check_h1(sys, opts).holds && check_h2(sys, opts).holds && check_h3(sys).holds;

    r.beta_ratio_ok = p.beta2 >= 2.0 * p.beta1;

    const auto fg = check_nondecreasing([&](double x) { return f_over_g_derivative(sys, x); },
                                        p.alpha1, d, opts.monotone_samples, "f/g");
    r.fg_monotone = fg.holds;
    r.fg_witness = fg.witness;

    const double margin = 1e-12 * sys.F_scale();
    auto xi_works = [&](double xi, std::optional<Witness>* witness) {
        for (double x : interior_grid(0.0, xi, opts.sign_samples)) {
            const double v = sys.F(x) + sys.F(x + xi);
            if (!(v < -margin)) {
                if (witness) *witness = Witness{x, v, "F(x) + F(x + xi) must be < 0 on (0, xi)"};
                return false;
            }
        }
        return true;
    };
    if (xi_works(p.beta1, &r.xi_witness)) {
        r.xi = p.beta1;
    } else {
        for (double xi : closed_grid(p.beta1, p.beta2, opts.xi_candidates)) {
            if (xi_works(xi, nullptr)) {
                r.xi = xi;
                break;
            }
        }
    }
    r.xi_ok = r.xi.has_value();

    r.integral_gF = integral_gF(sys, p.beta1, r.integral_upper);
    const double scale = sys.F_scale() * std::abs(sys.g(r.integral_upper)) * r.integral_upper;
    r.integral_sign = sign_of(r.integral_gF, 1e-12 * std::max(1.0, scale));
    return r;
}

HypothesesReport check_hypotheses(const System& sys, const HypothesesOptions& opts) {
    HypothesesReport rep;
    rep.h1 = check_h1(sys, opts);
    rep.h2 = check_h2(sys, opts);
    rep.h3 = check_h3(sys);
    rep.sampling = "sampled (" + std::to_string(opts.monotone_samples) +
                   ", uniform grid on [alpha1, d]) with closed-form derivatives";

    if (sys.has_characteristic_points()) {
        const auto& p = sys.characteristic_points();
        rep.points = p;
        const double d = sys.domain();
        rep.h4_f = check_nondecreasing([&](double x) { return sys.f_prime(x); }, p.alpha1, d,
                                       opts.monotone_samples, "f");
        rep.h4_weighted = check_nondecreasing(
            [&](double x) { return weighted_derivative(sys, p.alpha1, x); }, p.alpha1, d,
            opts.monotone_samples, "(F - F(alpha1)) f / g");
        if (rep.h4_weighted.holds) rep.h4_branch = H4Branch::WeightedMonotone;
        else if (rep.h4_f.holds) rep.h4_branch = H4Branch::FMonotone;
        rep.h4.holds = rep.h4_branch != H4Branch::Neither;
        if (!rep.h4.holds) rep.h4.witness = rep.h4_weighted.witness;
        rep.h4.note = rep.sampling;
    } else {
        rep.h4.witness = Witness{0.0, 0.0, "alpha1 undefined: " + sys.shape_error()};
    }
    rep.thmA_d = check_theoremA_d(sys, opts);
    rep.thm2 = check_theorem2(sys, opts);
    return rep;
}

}  // namespace liencycle

#pragma once

// Sampling-based checkers for (H1)-(H4), the comparison condition (d) of the
// smooth-case theorem, and the extra conditions for exactly two cycles.
// Failures are certified by a concrete witness; successes hold at grid
// resolution only.

#include "liencycle/model.hpp"

#include <optional>
#include <string>

namespace liencycle {

struct Witness {
    double x = 0.0;
    double value = 0.0;
    std::string reason;
};

struct HypothesisResult {
    bool holds = false;
    /// Holds, but with a caveat recorded in `note` (e.g. non-Lipschitz at 0).
    bool marginal = false;
    std::optional<Witness> witness;
    std::string note;
};

/// Nondecreasing check of a function on [lo, hi] from its closed-form derivative.
struct MonotonicityResult {
    bool holds = false;
    std::optional<Witness> witness;
    int samples = 0;
    double lo = 0.0;
    double hi = 0.0;
};

enum class H4Branch { FMonotone, WeightedMonotone, Neither };
enum class ThmABranch { FMonotone, FOverGMonotone, Neither };
enum class Sign { Negative, Zero, Positive };

[[nodiscard]] const char* to_string(H4Branch b);
[[nodiscard]] const char* to_string(ThmABranch b);
[[nodiscard]] const char* to_string(Sign s);

struct TheoremAReport {
    bool holds = false;
    ThmABranch branch = ThmABranch::Neither;
    std::optional<Witness> witness;
    MonotonicityResult f_check;
    MonotonicityResult f_over_g_check;
};

struct Theorem2Report {
    bool applicable = false;  ///< H1-H3 hold and the characteristic points exist
    bool fg_monotone = false;
    std::optional<Witness> fg_witness;
    bool beta_ratio_ok = false;
    std::optional<double> xi;
    bool xi_ok = false;
    std::optional<Witness> xi_witness;  ///< failure of the xi = beta1 candidate
    double integral_upper = 0.0;
    double integral_gF = 0.0;
    Sign integral_sign = Sign::Zero;
    /// All conditions hold: exactly two cycles when integral_sign >= 0,
    /// at least one otherwise.
    [[nodiscard]] bool holds() const { return applicable && fg_monotone && beta_ratio_ok && xi_ok; }
};

struct HypothesesReport {
    HypothesisResult h1, h2, h3, h4;
    H4Branch h4_branch = H4Branch::Neither;
    MonotonicityResult h4_f;
    MonotonicityResult h4_weighted;
    TheoremAReport thmA_d;
    Theorem2Report thm2;
    std::optional<CharacteristicPoints> points;
    std::string sampling;  ///< how the monotonicity checks were sampled

    [[nodiscard]] bool all_hold() const { return h1.holds && h2.holds && h3.holds && h4.holds; }
};

struct HypothesesOptions {
    /// Upper limit of the g F integral; <= 0 selects domain_d.
    double integral_upper = 0.0;
    int monotone_samples = 5000;
    int lipschitz_samples = 10000;
    int sign_samples = 2000;
    int xi_candidates = 64;
};

[[nodiscard]] HypothesesReport check_hypotheses(const System& sys, const HypothesesOptions& opts = {});

/// Requires characteristic points; returns a failed report otherwise.
[[nodiscard]] TheoremAReport check_theoremA_d(const System& sys, const HypothesesOptions& opts = {});

[[nodiscard]] Theorem2Report check_theorem2(const System& sys, const HypothesesOptions& opts = {});

/// d/dx of f/g and of (F - F(alpha1)) f / g for x > 0, in closed form.
[[nodiscard]] double f_over_g_derivative(const System& sys, double x);
[[nodiscard]] double weighted_derivative(const System& sys, double alpha1, double x);

}  // namespace liencycle

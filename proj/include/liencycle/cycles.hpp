#pragma once

// Symmetric half-return map on the positive y-axis and the limit-cycle
// machinery built on it.

#include "liencycle/flow.hpp"
#include "liencycle/model.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace liencycle {

enum class ReturnOutcome { Returned, FellIntoOrigin, Escaped };
enum class Stability { Stable, Unstable, SemistableCandidate, Marginal };
enum class OriginType { Sink, Source, Marginal };

[[nodiscard]] const char* to_string(ReturnOutcome o);
[[nodiscard]] const char* to_string(Stability s);
[[nodiscard]] const char* to_string(OriginType o);

/// (0, y0) -> (0, -y1): one half-turn of the flow.
struct HalfReturnRecord {
    double y0 = 0.0;
    double y1 = 0.0;  ///< magnitude of the arrival ordinate; 0 when FellIntoOrigin
    double displacement = 0.0;
    double half_period = 0.0;
    double max_x = 0.0;
    ReturnOutcome outcome = ReturnOutcome::Returned;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

struct DisplacementProfile {
    std::vector<HalfReturnRecord> records;  ///< ordered by y0
    std::vector<Bracket> sign_changes;
    std::vector<double> tangencies;  ///< grid y0 with a near-zero extremum and no sign change
};

struct LimitCycle {
    double y0_star = 0.0;
    double amplitude = 0.0;
    double period = 0.0;
    double div_integral = 0.0;
    Stability stability = Stability::Marginal;
    bool intersects_alpha1 = false;
    /// |displacement| at y0_star (the achieved minimum for semistable candidates).
    double residual = 0.0;
    /// Centered finite-difference slope of the displacement at y0_star.
    double displacement_slope = 0.0;
};

struct CycleOptions {
    IntegrationOptions integration{};
    int n_grid = 200;
    /// <= 0 selects 1e-3 * y_scale.
    double y_min = 0.0;
    /// <= 0 selects the integration y_cap.
    double y_max = 0.0;
    /// Maximum duration of one half-turn.
    double t_max = 1e4;
    /// Relative width at which root bisection stops.
    double root_rel_tol = 1e-10;
    unsigned workers = 1;

    [[nodiscard]] CycleOptions tightened(double factor) const;
};

[[nodiscard]] HalfReturnRecord half_return(const LienardField& sys, double y0,
                                           const CycleOptions& opts = {});

[[nodiscard]] DisplacementProfile scan_displacement(const LienardField& sys, double y_min,
                                                    double y_max, int n_grid,
                                                    const CycleOptions& opts = {});

/// All symmetric limit cycles in the scan range, ordered by y0_star.
[[nodiscard]] std::vector<LimitCycle> find_cycles(const LienardField& sys,
                                                  const CycleOptions& opts = {});
/// Same, also returning the profile that was scanned.
[[nodiscard]] std::vector<LimitCycle> find_cycles(const LienardField& sys, const CycleOptions& opts,
                                                  DisplacementProfile& profile);

/// Simple cycles count 1, semistable candidates count 2.
[[nodiscard]] int cycle_multiplicity(const std::vector<LimitCycle>& cycles);

/// One full period starting at (0, y0): two crossings.
[[nodiscard]] Trajectory full_cycle(const LienardField& sys, double y0, const CycleOptions& opts = {});

/// Closed-orbit integral of -F'(x(t)) dt. Throws NonClosed when the
/// trajectory end misses its start by more than 1e-6 * y0.
[[nodiscard]] double divergence_integral(const LienardField& sys, const Trajectory& cycle_traj);

[[nodiscard]] OriginType origin_stability(const LienardField& sys, const CycleOptions& opts = {});

/// The system in the coordinates u = sgn(x) sqrt(2 G(x)):
///   u' = y - F(h^{-1}(u)),  y' = -u.
class NormalizedSystem final : public LienardField {
public:
    explicit NormalizedSystem(std::shared_ptr<const System> original);

    [[nodiscard]] double h(double x) const;
    [[nodiscard]] double h_inverse(double u) const;

    double F(double u) const override;
    double f(double u) const override;
    double g0(double u) const override { return u; }
    double G(double u) const override { return 0.5 * u * u; }
    double step() const override { return 0.0; }
    double domain() const override { return domain_; }
    const std::vector<double>& corners() const override { return corners_; }
    bool f_singular_at_origin() const override { return original_->f_singular_at_origin(); }
    double origin_frequency() const override { return 1.0; }
    double y_scale() const override { return original_->y_scale(); }
    const std::string& name() const override { return name_; }
    const CharacteristicPoints* points() const override { return points_ ? &*points_ : nullptr; }

private:
    std::shared_ptr<const System> original_;
    std::optional<CharacteristicPoints> points_;
    double domain_;
    std::vector<double> corners_;
    std::string name_;
};

[[nodiscard]] std::unique_ptr<NormalizedSystem> normalize_system(std::shared_ptr<const System> sys);

/// CSV `y0,y1,displacement,max_x,outcome`.
void write_profile_csv(std::ostream& os, const DisplacementProfile& profile);

}  // namespace liencycle

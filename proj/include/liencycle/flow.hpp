#pragma once

// Event-driven integration of x' = y - F(x), y' = -g(x) across the
// discontinuity line x = 0.

#include "liencycle/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace liencycle {

enum class Direction { LeftToRight, RightToLeft };
enum class Terminal { TimeOut, ReturnedToSection, EnteredOriginDisk, LeftDomain };

[[nodiscard]] const char* to_string(Direction d);
[[nodiscard]] const char* to_string(Terminal t);

struct CrossingEvent {
    double t = 0.0;
    double y = 0.0;
    Direction direction = Direction::LeftToRight;
};

struct Sample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    int event = -1;  ///< index into Trajectory::events when this sample is a crossing
};

/// Cubic Hermite interpolant over one accepted step. Both ends use the
/// vector field of the same half-plane.
struct HermitePiece {
    double t0 = 0.0, t1 = 0.0;
    double x0 = 0.0, y0 = 0.0, dx0 = 0.0, dy0 = 0.0;
    double x1 = 0.0, y1 = 0.0, dx1 = 0.0, dy1 = 0.0;
    int side = 1;

    [[nodiscard]] double x_at(double t) const;
    [[nodiscard]] double y_at(double t) const;
    [[nodiscard]] double max_abs_x() const;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<HermitePiece> pieces;
    std::vector<CrossingEvent> events;
    Terminal terminal = Terminal::TimeOut;

    [[nodiscard]] const Sample& back() const { return samples.back(); }
    /// max |x| along the dense solution.
    [[nodiscard]] double max_abs_x() const;
};

struct IntegrationOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = 0.1;
    std::size_t max_steps = 20'000'000;
    /// Stop with ReturnedToSection after this many crossings (0: never).
    int stop_after_events = 0;
    /// Bound on |y|; <= 0 selects LienardField::y_cap().
    double y_cap = 0.0;
    /// Stop with EnteredOriginDisk once the state lies in a node wedge
    /// (see in_node_wedge); checked every 64 accepted steps.
    bool detect_trapping = false;

    /// Same options with both step tolerances divided by `factor`.
    [[nodiscard]] IntegrationOptions tightened(double factor) const;
};

/// Adaptive Dormand–Prince 5(4) integration with crossing events located on
/// the dense output, polished with exact sub-steps, and snapped to x = 0.
/// Throws StepUnderflow when the step size collapses away from the origin.
[[nodiscard]] Trajectory integrate(const LienardField& sys, double x0, double y0, double t_max,
                                   const IntegrationOptions& opts = {});

/// Filippov crossing indicator at a point (0, y) of the discontinuity line.
[[nodiscard]] constexpr double crossing_indicator(double y) noexcept { return y * y; }

/// max over steps of |dE - integral(-g F dt)| / (1 + |E|).
[[nodiscard]] double energy_residual(const LienardField& sys, const Trajectory& traj);

/// Threshold below which a crossing is treated as an origin approach.
[[nodiscard]] double slide_epsilon(const LienardField& sys);
/// True when (x, y), mirrored to x > 0, satisfies m x <= y <= F(x) with
/// m (F(u) - m u) > g(u) sampled on (1e-12 x, x]. That wedge is positively
/// invariant and its orbits tend to the origin without crossing x = 0
/// (degenerate or strong nodes, where the origin disk is reached too slowly).
[[nodiscard]] bool in_node_wedge(const LienardField& sys, double x, double y);

/// Radius of the terminal disk around the origin in (x, y / omega) coordinates.
[[nodiscard]] double origin_disk_radius(const LienardField& sys);

/// CSV with header `t,x,y,event`, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace liencycle

#include "liencycle/flow.hpp"

#include "liencycle/error.hpp"
#include "liencycle/format.hpp"
#include "liencycle/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

namespace liencycle {

namespace {

struct State {
    double x = 0.0;
    double y = 0.0;
};

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
public:
    Stepper(const LienardField& sys, const IntegrationOptions& opts) : sys_(sys), opts_(opts) {}

    [[nodiscard]] State rhs(const State& z, int side) const {
        return {z.y - sys_.F(z.x), -sys_.g_side(z.x, side)};
    }

    /// One step of size h from z with k1 = rhs(z). Returns the 5th-order
    /// solution; fills k7 = rhs(result) and the scaled error norm.
    State step(const State& z, const State& k1, double h, int side, State& k7, double& err) const {
        const State k2 = rhs({z.x + h * a21 * k1.x, z.y + h * a21 * k1.y}, side);
        const State k3 = rhs({z.x + h * (a31 * k1.x + a32 * k2.x),
                              z.y + h * (a31 * k1.y + a32 * k2.y)}, side);
        const State k4 = rhs({z.x + h * (a41 * k1.x + a42 * k2.x + a43 * k3.x),
                              z.y + h * (a41 * k1.y + a42 * k2.y + a43 * k3.y)}, side);
        const State k5 = rhs({z.x + h * (a51 * k1.x + a52 * k2.x + a53 * k3.x + a54 * k4.x),
                              z.y + h * (a51 * k1.y + a52 * k2.y + a53 * k3.y + a54 * k4.y)}, side);
        const State k6 = rhs({z.x + h * (a61 * k1.x + a62 * k2.x + a63 * k3.x + a64 * k4.x + a65 * k5.x),
                              z.y + h * (a61 * k1.y + a62 * k2.y + a63 * k3.y + a64 * k4.y + a65 * k5.y)},
                             side);
        const State out{z.x + h * (b1 * k1.x + b3 * k3.x + b4 * k4.x + b5 * k5.x + b6 * k6.x),
                        z.y + h * (b1 * k1.y + b3 * k3.y + b4 * k4.y + b5 * k5.y + b6 * k6.y)};
        k7 = rhs(out, side);
        const double ex = h * (e1 * k1.x + e3 * k3.x + e4 * k4.x + e5 * k5.x + e6 * k6.x + e7 * k7.x);
        const double ey = h * (e1 * k1.y + e3 * k3.y + e4 * k4.y + e5 * k5.y + e6 * k6.y + e7 * k7.y);
        const double sx = opts_.atol + opts_.rtol * std::max(std::abs(z.x), std::abs(out.x));
        const double sy = opts_.atol + opts_.rtol * std::max(std::abs(z.y), std::abs(out.y));
        err = std::sqrt(0.5 * ((ex / sx) * (ex / sx) + (ey / sy) * (ey / sy)));
        return out;
    }

    [[nodiscard]] double initial_step(const State& z, const State& f0, int side) const {
        const double sx = opts_.atol + opts_.rtol * std::abs(z.x);
        const double sy = opts_.atol + opts_.rtol * std::abs(z.y);
        auto norm = [&](double a, double b) {
            return std::sqrt(0.5 * ((a / sx) * (a / sx) + (b / sy) * (b / sy)));
        };
        const double d0 = norm(z.x, z.y);
        const double d1 = norm(f0.x, f0.y);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, opts_.h_max);
        const State f1 = rhs({z.x + h0 * f0.x, z.y + h0 * f0.y}, side);
        const double d2 = norm(f1.x - f0.x, f1.y - f0.y) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, opts_.h_max});
    }

private:
    const LienardField& sys_;
    const IntegrationOptions& opts_;
};

HermitePiece make_piece(double t0, const State& z0, const State& d0, double t1, const State& z1,
                        const State& d1, int side) {
    return HermitePiece{t0, t1, z0.x, z0.y, d0.x, d0.y, z1.x, z1.y, d1.x, d1.y, side};
}

double hermite(double s, double h, double p0, double m0, double p1, double m1) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 +
           (s3 - s2) * h * m1;
}

}  // namespace

const char* to_string(Direction d) {
    return d == Direction::LeftToRight ? "L2R" : "R2L";
}

const char* to_string(Terminal t) {
    switch (t) {
    case Terminal::TimeOut: return "TimeOut";
    case Terminal::ReturnedToSection: return "ReturnedToSection";
    case Terminal::EnteredOriginDisk: return "EnteredOriginDisk";
    case Terminal::LeftDomain: return "LeftDomain";
    }
    return "?";
}

double HermitePiece::x_at(double t) const {
    const double h = t1 - t0;
    return hermite(h > 0 ? (t - t0) / h : 0.0, h, x0, dx0, x1, dx1);
}

double HermitePiece::y_at(double t) const {
    const double h = t1 - t0;
    return hermite(h > 0 ? (t - t0) / h : 0.0, h, y0, dy0, y1, dy1);
}

double HermitePiece::max_abs_x() const {
    double best = std::max(std::abs(x0), std::abs(x1));
    const double h = t1 - t0;
    // d/ds of the cubic: A s^2 + B s + C
    const double A = 6 * x0 + 3 * h * dx0 - 6 * x1 + 3 * h * dx1;
    const double B = -6 * x0 - 4 * h * dx0 + 6 * x1 - 2 * h * dx1;
    const double C = h * dx0;
    auto consider = [&](double s) {
        if (s > 0.0 && s < 1.0) best = std::max(best, std::abs(hermite(s, h, x0, dx0, x1, dx1)));
    };
    if (std::abs(A) < 1e-300) {
        if (B != 0.0) consider(-C / B);
    } else {
        const double disc = B * B - 4 * A * C;
        if (disc >= 0.0) {
            const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
            if (q != 0.0) consider(C / q);
            consider(q / A);
        }
    }
    return best;
}

double Trajectory::max_abs_x() const {
    double m = 0.0;
    for (const auto& p : pieces) m = std::max(m, p.max_abs_x());
    for (const auto& s : samples) m = std::max(m, std::abs(s.x));
    return m;
}

IntegrationOptions IntegrationOptions::tightened(double factor) const {
    IntegrationOptions o = *this;
    o.rtol /= factor;
    o.atol /= factor;
    return o;
}

bool in_node_wedge(const LienardField& sys, double x, double y) {
    const int s = x > 0.0 ? 1 : -1;
    const double X = s * x, Y = s * y;
    if (!(X > 0.0) || !(Y > 0.0) || X > 0.1 * sys.domain()) return false;
    const double FX = sys.F(X);
    if (!(Y <= FX)) return false;
    constexpr int kSamples = 64;
    constexpr double kDepth = 1e-12;
    double m = Y / X;
    for (int i = 0; i <= kSamples; ++i) {
        const double u = X * std::pow(kDepth, static_cast<double>(i) / kSamples);
        const double slope = sys.F(u) / u;
        if (!(slope > 0.0)) return false;
        m = std::min(m, 0.5 * slope);
    }
    for (int i = 0; i <= kSamples; ++i) {
        const double u = X * std::pow(kDepth, static_cast<double>(i) / kSamples);
        if (!(m * (sys.F(u) - m * u) > sys.g_side(u, 1))) return false;
    }
    return true;
}

double slide_epsilon(const LienardField& sys) { return 1e-9 * sys.y_scale(); }

double origin_disk_radius(const LienardField& sys) { return 1e-7 * sys.domain(); }

Trajectory integrate(const LienardField& sys, double x0, double y0, double t_max,
                     const IntegrationOptions& opts) {
    Trajectory traj;
    traj.samples.push_back({0.0, x0, y0, -1});
    const double d = sys.domain();
    const double y_cap = opts.y_cap > 0.0 ? opts.y_cap : sys.y_cap();
    const double eps_slide = slide_epsilon(sys);
    const double eps0 = origin_disk_radius(sys);
    const double omega = sys.origin_frequency();

    auto in_origin_disk = [&](const State& z) { return std::hypot(z.x, z.y / omega) < eps0; };
    auto trapped = [&](const State& z) { return opts.detect_trapping && in_node_wedge(sys, z.x, z.y); };

    State z{x0, y0};
    if (std::abs(x0) > d || std::abs(y0) > y_cap) {
        traj.terminal = Terminal::LeftDomain;
        return traj;
    }
    if (in_origin_disk(z)) {
        traj.terminal = Terminal::EnteredOriginDisk;
        return traj;
    }
    int side = x0 != 0.0 ? (x0 > 0.0 ? 1 : -1) : (y0 > 0.0 ? 1 : -1);

    Stepper stepper(sys, opts);
    double t = 0.0;
    State k1 = stepper.rhs(z, side);
    double h = stepper.initial_step(z, k1, side);

    for (std::size_t n = 0; n < opts.max_steps; ++n) {
        if (t >= t_max) {
            traj.terminal = Terminal::TimeOut;
            return traj;
        }
        h = std::min({h, opts.h_max, t_max - t});
        const double h_min = 1e-14 * std::max(1.0, std::abs(t));
        if (h < h_min && t_max - t > h_min) throw StepUnderflow(t, z.x, z.y);

        State k7;
        double err = 0.0;
        const State zn = stepper.step(z, k1, h, side, k7, err);
        if (!(err <= 1.0)) {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            continue;
        }
        const double grow = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));

        const bool crossed = side * zn.x < 0.0 || (zn.x == 0.0 && z.x != 0.0);
        if (!crossed) {
            traj.pieces.push_back(make_piece(t, z, k1, t + h, zn, k7, side));
            t += h;
            z = zn;
            k1 = k7;
            traj.samples.push_back({t, z.x, z.y, -1});
            if (std::abs(z.x) > d || std::abs(z.y) > y_cap) {
                traj.terminal = Terminal::LeftDomain;
                return traj;
            }
            if (in_origin_disk(z) || (n % 64 == 0 && trapped(z))) {
                traj.terminal = Terminal::EnteredOriginDisk;
                return traj;
            }
            h *= grow;
            continue;
        }

        // Locate the crossing on the dense output, then polish with exact sub-steps.
        const HermitePiece trial = make_piece(t, z, k1, t + h, zn, k7, side);
        double lo = 0.0, hi = h;
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (side * trial.x_at(t + mid) > 0.0) lo = mid;
            else hi = mid;
            if (hi - lo <= 1e-13 * std::max(std::abs(t), h)) break;
        }
        double tau = 0.5 * (lo + hi);
        State ze, ke;
        double dummy = 0.0;
        for (int i = 0; i < 6; ++i) {
            ze = stepper.step(z, k1, tau, side, ke, dummy);
            if (ze.x == 0.0 || ke.x == 0.0) break;
            const double next = std::clamp(tau - ze.x / ke.x, 0.5 * tau, std::min(h, 2.0 * tau));
            if (next == tau) break;
            tau = next;
        }
        ze = stepper.step(z, k1, tau, side, ke, dummy);
        ze.x = 0.0;
        ke = stepper.rhs(ze, side);

        traj.pieces.push_back(make_piece(t, z, k1, t + tau, ze, ke, side));
        t += tau;
        z = ze;

        const bool direction_ok = side > 0 ? z.y < 0.0 : z.y > 0.0;
        if (std::abs(z.y) <= eps_slide || !direction_ok) {
            traj.samples.push_back({t, z.x, z.y, -1});
            traj.terminal = Terminal::EnteredOriginDisk;
            return traj;
        }
        const Direction dir = side > 0 ? Direction::RightToLeft : Direction::LeftToRight;
        traj.events.push_back({t, z.y, dir});
        traj.samples.push_back({t, z.x, z.y, static_cast<int>(traj.events.size()) - 1});

        side = -side;
        k1 = stepper.rhs(z, side);
        if (opts.stop_after_events > 0 &&
            static_cast<int>(traj.events.size()) >= opts.stop_after_events) {
            traj.terminal = Terminal::ReturnedToSection;
            return traj;
        }
    }
    throw NumericError("integration exceeded max_steps = " + std::to_string(opts.max_steps));
}

double energy_residual(const LienardField& sys, const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& p : traj.pieces) {
        const double e0 = sys.energy(p.x0, p.y0);
        const double e1 = sys.energy(p.x1, p.y1);
        const double integral = gauss_legendre(p.t0, p.t1, [&](double t) {
            const double x = p.x_at(t);
            return -sys.g_side(x, p.side) * sys.F(x);
        });
        worst = std::max(worst, std::abs(e1 - e0 - integral) / (1.0 + std::abs(e0)));
    }
    return worst;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,y,event\n";
    for (const auto& s : traj.samples) {
        os << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.y) << ',';
        if (s.event >= 0) os << to_string(traj.events[s.event].direction);
        os << '\n';
    }
}

}  // namespace liencycle

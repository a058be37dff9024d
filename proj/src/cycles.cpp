#include "liencycle/cycles.hpp"

#include "liencycle/error.hpp"
#include "liencycle/format.hpp"
#include "liencycle/parallel.hpp"
#include "liencycle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace liencycle {

namespace {

constexpr double kTolDivPerPeriod = 1e-6;
constexpr double kTolSemi = 1e-7;
constexpr double kSlopeStep = 1e-5;
constexpr double kGolden = 0.6180339887498949;

/// Displacement used for sign decisions: an orbit that falls into the origin
/// lost all its amplitude, an escaping one grew without bound.
double signed_displacement(const HalfReturnRecord& r) {
    switch (r.outcome) {
    case ReturnOutcome::Returned: return r.displacement;
    case ReturnOutcome::FellIntoOrigin: return -r.y0;
    case ReturnOutcome::Escaped: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

bool usable(const HalfReturnRecord& r) { return r.outcome != ReturnOutcome::Escaped; }

double noise_level(const CycleOptions& opts, double y) {
    return 100.0 * (opts.integration.rtol * y + opts.integration.atol);
}

std::vector<double> geometric_points(double lo, double hi, int n) {
    std::vector<double> v(n);
    const double r = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) v[i] = lo * std::exp(r * i);
    v.front() = lo;
    v.back() = hi;
    return v;
}

double bisect_root(const LienardField& sys, Bracket b, const CycleOptions& opts) {
    if (b.lo == b.hi) return b.lo;
    double dlo = signed_displacement(half_return(sys, b.lo, opts));
    while (b.hi - b.lo > opts.root_rel_tol * b.hi) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (mid <= b.lo || mid >= b.hi) break;
        const double dm = signed_displacement(half_return(sys, mid, opts));
        if (dm == 0.0) return mid;
        if ((dm > 0.0) == (dlo > 0.0)) {
            b.lo = mid;
            dlo = dm;
        } else {
            b.hi = mid;
        }
    }
    return 0.5 * (b.lo + b.hi);
}

struct Extremum {
    double y = 0.0;
    double value = 0.0;
    double left = 0.0;   ///< point left of y keeping the original sign
    double right = 0.0;  ///< point right of y keeping the original sign
};

/// Re-examines a grid extremum of the displacement at 4x resolution, then
/// refines it by golden-section search. `sense` is +1 for a maximum.
Extremum refine_extremum(const LienardField& sys, double lo, double hi, int sense,
                         const CycleOptions& opts) {
    auto value = [&](double y) { return sense * signed_displacement(half_return(sys, y, opts)); };
    const auto sub = geometric_points(lo, hi, 9);
    std::vector<double> vals(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) vals[i] = value(sub[i]);
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(vals.begin() + 1, vals.end() - 1) - vals.begin());

    double a = sub[best - 1], b = sub[best + 1];
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = value(x1), f2 = value(x2);
    while (b - a > 1e-7 * b) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = value(x2);
        }
    }
    Extremum e;
    if (f1 > f2) {
        e.y = x1;
        e.value = sense * f1;
    } else {
        e.y = x2;
        e.value = sense * f2;
    }
    if (vals[best] > sense * e.value) {
        e.y = sub[best];
        e.value = sense * vals[best];
    }
    e.left = sub.front();
    e.right = sub.back();
    for (std::size_t i = 0; i < sub.size(); ++i) {
        if (sub[i] < e.y && vals[i] < 0.0) e.left = sub[i];
        if (sub[i] > e.y && vals[i] < 0.0 && e.right == sub.back()) e.right = sub[i];
    }
    return e;
}

/// The time-reversed flow, reflected through y -> -y, is again a Liénard
/// system with F replaced by -F. Repelling cycles of the original system are
/// attracting here, so they can be traced forward without error blow-up.
class ReversedDamping final : public LienardField {
public:
    explicit ReversedDamping(const LienardField& base) : base_(base) {}
    double F(double x) const override { return -base_.F(x); }
    double f(double x) const override { return -base_.f(x); }
    double g0(double x) const override { return base_.g0(x); }
    double G(double x) const override { return base_.G(x); }
    double step() const override { return base_.step(); }
    double domain() const override { return base_.domain(); }
    const std::vector<double>& corners() const override { return base_.corners(); }
    bool f_singular_at_origin() const override { return base_.f_singular_at_origin(); }
    double origin_frequency() const override { return base_.origin_frequency(); }
    double y_scale() const override { return base_.y_scale(); }
    const std::string& name() const override { return base_.name(); }

private:
    const LienardField& base_;
};

bool closes(const Trajectory& traj, double y0) {
    if (traj.terminal != Terminal::ReturnedToSection || traj.events.size() < 2) return false;
    return std::abs(traj.events[1].y - y0) <= 1e-6 * y0;
}

LimitCycle build_cycle(const LienardField& sys, double y0, bool semistable, const CycleOptions& opts) {
    LimitCycle c;
    c.y0_star = y0;
    const Trajectory forward = full_cycle(sys, y0, opts);
    if (closes(forward, y0)) {
        c.amplitude = forward.max_abs_x();
        c.period = forward.events[1].t;
        c.div_integral = divergence_integral(sys, forward);
    } else {
        const ReversedDamping reversed(sys);
        const Trajectory backward = full_cycle(reversed, y0, opts);
        if (!closes(backward, y0))
            throw NonClosed("cycle at y0 = " + format_double(y0) +
                            " closes neither forward nor backward in time");
        c.amplitude = backward.max_abs_x();
        c.period = backward.events[1].t;
        c.div_integral = -divergence_integral(reversed, backward);
    }
    c.residual = std::abs(signed_displacement(half_return(sys, y0, opts)));
    const double dy = kSlopeStep * y0;
    c.displacement_slope = (signed_displacement(half_return(sys, y0 + dy, opts)) -
                            signed_displacement(half_return(sys, y0 - dy, opts))) / (2.0 * dy);
    if (const auto* pts = sys.points()) c.intersects_alpha1 = c.amplitude > pts->alpha1;

    if (semistable) {
        c.stability = Stability::SemistableCandidate;
    } else {
        const double tol_div = kTolDivPerPeriod * c.period;
        if (c.div_integral < -tol_div) c.stability = Stability::Stable;
        else if (c.div_integral > tol_div) c.stability = Stability::Unstable;
        else c.stability = Stability::Marginal;
    }
    return c;
}

}  // namespace

const char* to_string(ReturnOutcome o) {
    switch (o) {
    case ReturnOutcome::Returned: return "Returned";
    case ReturnOutcome::FellIntoOrigin: return "FellIntoOrigin";
    case ReturnOutcome::Escaped: return "Escaped";
    }
    return "?";
}

const char* to_string(Stability s) {
    switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::SemistableCandidate: return "SemistableCandidate";
    case Stability::Marginal: return "Marginal";
    }
    return "?";
}

const char* to_string(OriginType o) {
    switch (o) {
    case OriginType::Sink: return "Sink";
    case OriginType::Source: return "Source";
    case OriginType::Marginal: return "Marginal";
    }
    return "?";
}

CycleOptions CycleOptions::tightened(double factor) const {
    CycleOptions o = *this;
    o.integration = integration.tightened(factor);
    return o;
}

HalfReturnRecord half_return(const LienardField& sys, double y0, const CycleOptions& opts) {
    if (!(y0 > 0.0)) throw ConfigError("y0", "half_return needs y0 > 0");
    IntegrationOptions io = opts.integration;
    io.stop_after_events = 1;
    io.detect_trapping = true;
    HalfReturnRecord r;
    r.y0 = y0;
    const Trajectory traj = integrate(sys, 0.0, y0, opts.t_max, io);
    r.max_x = traj.max_abs_x();
    switch (traj.terminal) {
    case Terminal::ReturnedToSection:
        r.outcome = ReturnOutcome::Returned;
        r.y1 = -traj.events.front().y;
        r.displacement = r.y1 - r.y0;
        r.half_period = traj.events.front().t;
        break;
    case Terminal::EnteredOriginDisk:
        r.outcome = ReturnOutcome::FellIntoOrigin;
        r.y1 = 0.0;
        r.displacement = -y0;
        r.half_period = traj.back().t;
        break;
    case Terminal::LeftDomain:
    case Terminal::TimeOut:
        r.outcome = ReturnOutcome::Escaped;
        r.y1 = std::numeric_limits<double>::quiet_NaN();
        r.displacement = std::numeric_limits<double>::quiet_NaN();
        r.half_period = traj.back().t;
        break;
    }
    return r;
}

DisplacementProfile scan_displacement(const LienardField& sys, double y_min, double y_max,
                                      int n_grid, const CycleOptions& opts) {
    if (!(y_min > 0.0) || !(y_max > y_min)) throw ConfigError("y_range", "need 0 < y_min < y_max");
    if (n_grid < 16) throw ConfigError("n_grid", "need at least 16 grid points");

    DisplacementProfile prof;
    const auto grid = geometric_points(y_min, y_max, n_grid);
    prof.records.resize(grid.size());
    parallel_for(grid.size(), opts.workers, [&](std::size_t i) {
        try {
            prof.records[i] = half_return(sys, grid[i], opts);
        } catch (const NumericError&) {
            HalfReturnRecord r;
            r.y0 = grid[i];
            r.outcome = ReturnOutcome::Escaped;
            r.y1 = r.displacement = std::numeric_limits<double>::quiet_NaN();
            prof.records[i] = r;
        }
    });

    const auto& rec = prof.records;
    for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
        if (!usable(rec[i]) || !usable(rec[i + 1])) continue;
        const double a = signed_displacement(rec[i]);
        const double b = signed_displacement(rec[i + 1]);
        if (a == 0.0) {
            prof.sign_changes.push_back({rec[i].y0, rec[i].y0});
        } else if (b != 0.0 && (a > 0.0) != (b > 0.0)) {
            prof.sign_changes.push_back({rec[i].y0, rec[i + 1].y0});
        }
    }
    for (std::size_t i = 1; i + 1 < rec.size(); ++i) {
        if (!usable(rec[i - 1]) || !usable(rec[i]) || !usable(rec[i + 1])) continue;
        if (rec[i].outcome != ReturnOutcome::Returned) continue;
        const double l = signed_displacement(rec[i - 1]);
        const double m = signed_displacement(rec[i]);
        const double r = signed_displacement(rec[i + 1]);
        const double noise = noise_level(opts, rec[i].y0);
        const bool near_zero_max = m < 0.0 && l < 0.0 && r < 0.0 && m - std::max(l, r) > noise;
        const bool near_zero_min = m > 0.0 && l > 0.0 && r > 0.0 && std::min(l, r) - m > noise;
        if (near_zero_max || near_zero_min) prof.tangencies.push_back(rec[i].y0);
    }
    return prof;
}

std::vector<LimitCycle> find_cycles(const LienardField& sys, const CycleOptions& opts) {
    DisplacementProfile prof;
    return find_cycles(sys, opts, prof);
}

std::vector<LimitCycle> find_cycles(const LienardField& sys, const CycleOptions& opts,
                                    DisplacementProfile& profile) {
    const double y_min = opts.y_min > 0.0 ? opts.y_min : 1e-3 * sys.y_scale();
    const double y_max = opts.y_max > 0.0
                             ? opts.y_max
                             : (opts.integration.y_cap > 0.0 ? opts.integration.y_cap : sys.y_cap());
    profile = scan_displacement(sys, y_min, y_max, opts.n_grid, opts);

    std::vector<Bracket> brackets = profile.sign_changes;
    std::vector<double> semistable;

    // Tangency candidates: an extremum that crosses zero between grid points
    // hides two simple roots; one that only touches zero is a semistable candidate.
    for (double yt : profile.tangencies) {
        const auto it = std::find_if(profile.records.begin(), profile.records.end(),
                                     [yt](const HalfReturnRecord& r) { return r.y0 == yt; });
        const std::size_t i = static_cast<std::size_t>(it - profile.records.begin());
        const double m = signed_displacement(profile.records[i]);
        const int sense = m < 0.0 ? 1 : -1;
        const Extremum e =
            refine_extremum(sys, profile.records[i - 1].y0, profile.records[i + 1].y0, sense, opts);
        if ((e.value > 0.0) == (m > 0.0) && e.value != 0.0) {
            if (std::abs(e.value) < kTolSemi * e.y) semistable.push_back(e.y);
        } else {
            brackets.push_back({e.left, e.y});
            brackets.push_back({e.y, e.right});
        }
    }
    std::sort(brackets.begin(), brackets.end(),
              [](const Bracket& a, const Bracket& b) { return a.lo < b.lo; });

    std::vector<double> roots(brackets.size());
    parallel_for(brackets.size(), opts.workers,
                 [&](std::size_t i) { roots[i] = bisect_root(sys, brackets[i], opts); });

    struct Item {
        double y;
        bool semi;
    };
    std::vector<Item> items;
    for (double r : roots) items.push_back({r, false});
    for (double s : semistable) items.push_back({s, true});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.y < b.y; });

    std::vector<LimitCycle> cycles(items.size());
    parallel_for(items.size(), opts.workers, [&](std::size_t i) {
        cycles[i] = build_cycle(sys, items[i].y, items[i].semi, opts);
    });
    return cycles;
}

int cycle_multiplicity(const std::vector<LimitCycle>& cycles) {
    int n = 0;
    for (const auto& c : cycles) n += c.stability == Stability::SemistableCandidate ? 2 : 1;
    return n;
}

Trajectory full_cycle(const LienardField& sys, double y0, const CycleOptions& opts) {
    IntegrationOptions io = opts.integration;
    io.stop_after_events = 2;
    return integrate(sys, 0.0, y0, 2.0 * opts.t_max, io);
}

double divergence_integral(const LienardField& sys, const Trajectory& traj) {
    if (traj.samples.empty()) throw NonClosed("empty trajectory");
    const Sample& s0 = traj.samples.front();
    const Sample& s1 = traj.samples.back();
    const double scale = std::max(std::abs(s0.y), std::abs(s0.x));
    const double miss = std::hypot(s1.x - s0.x, s1.y - s0.y);
    if (traj.pieces.empty() || miss > 1e-6 * scale)
        throw NonClosed("trajectory end misses its start by " + format_double(miss));

    const auto& corners = sys.corners();
    const bool singular = sys.f_singular_at_origin();
    auto integrand = [&](double x) { return -sys.f(x); };

    double total = 0.0;
    std::vector<double> cuts;
    for (const auto& p : traj.pieces) {
        cuts.assign({p.t0, p.t1});
        if (!corners.empty()) {
            // Split where |x(t)| passes a corner of F so each panel is smooth.
            const double h = p.t1 - p.t0;
            const double A = 6 * p.x0 + 3 * h * p.dx0 - 6 * p.x1 + 3 * h * p.dx1;
            const double B = -6 * p.x0 - 4 * h * p.dx0 + 6 * p.x1 - 2 * h * p.dx1;
            const double C = h * p.dx0;
            std::vector<double> nodes{p.t0, p.t1};
            const double disc = B * B - 4 * A * C;
            if (A != 0.0 && disc >= 0.0) {
                for (double sgn_root : {-1.0, 1.0}) {
                    const double s = (-B + sgn_root * std::sqrt(disc)) / (2 * A);
                    if (s > 0.0 && s < 1.0) nodes.push_back(p.t0 + s * h);
                }
            }
            std::sort(nodes.begin(), nodes.end());
            for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
                for (double cv : corners) {
                    double lo = nodes[k], hi = nodes[k + 1];
                    double flo = std::abs(p.x_at(lo)) - cv;
                    const double fhi = std::abs(p.x_at(hi)) - cv;
                    if ((flo > 0.0) == (fhi > 0.0) || flo == 0.0 || fhi == 0.0) continue;
                    for (int it = 0; it < 80; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (mid <= lo || mid >= hi) break;
                        const double fm = std::abs(p.x_at(mid)) - cv;
                        if ((fm > 0.0) == (flo > 0.0)) {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    cuts.push_back(0.5 * (lo + hi));
                }
            }
            std::sort(cuts.begin(), cuts.end());
        }
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k], b = cuts[k + 1];
            if (b <= a) continue;
            auto fn = [&](double t) { return integrand(p.x_at(t)); };
            const bool sing_a = singular && k == 0 && p.x0 == 0.0;
            const bool sing_b = singular && k + 2 == cuts.size() && p.x1 == 0.0;
            if (sing_a) total += gauss_legendre_endpoint(a, b, true, fn);
            else if (sing_b) total += gauss_legendre_endpoint(a, b, false, fn);
            else total += gauss_legendre(a, b, fn);
        }
    }
    return total;
}

OriginType origin_stability(const LienardField& sys, const CycleOptions& opts) {
    int negative = 0, positive = 0;
    for (double fraction : {1e-4, 1e-3}) {
        const double y0 = fraction * sys.y_scale();
        CycleOptions probe = opts;
        probe.integration.rtol = std::min(opts.integration.rtol, 1e-12);
        probe.integration.atol = 1e-14 * y0;
        const double tol = 1e-9 * y0;
        const double d = signed_displacement(half_return(sys, y0, probe));
        if (d < -tol) ++negative;
        else if (d > tol) ++positive;
    }
    if (negative == 2) return OriginType::Sink;
    if (positive == 2) return OriginType::Source;
    return OriginType::Marginal;
}

// ---------------------------------------------------------------------------
// NormalizedSystem

NormalizedSystem::NormalizedSystem(std::shared_ptr<const System> original)
    : original_(std::move(original)) {
    domain_ = h(original_->domain());
    for (double c : original_->corners()) corners_.push_back(h(c));
    name_ = original_->name() + " (normalized)";
    if (const auto* p = original_->points()) {
        CharacteristicPoints q = *p;
        q.beta1 = h(p->beta1);
        q.alpha1 = h(p->alpha1);
        q.beta2 = h(p->beta2);
        for (auto& z : q.fprime_zeros) z = h(z);
        points_ = q;
    }
}

double NormalizedSystem::h(double x) const {
    return sgn(x) * std::sqrt(2.0 * original_->G(x));
}

double NormalizedSystem::h_inverse(double u) const {
    const double target = std::abs(u);
    if (target == 0.0) return 0.0;
    double lo = 0.0, hi = original_->domain();
    while (h(hi) < target) hi *= 2.0;
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double hx = h(x);
        const double r = hx - target;
        if (r == 0.0) break;
        if (r > 0.0) hi = x;
        else lo = x;
        // Newton on h with h' = g / h, safeguarded by the bracket.
        double next = x - r * hx / original_->g(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) {
            x = next;
            break;
        }
        x = next;
    }
    return u < 0.0 ? -x : x;
}

double NormalizedSystem::F(double u) const { return original_->F(h_inverse(u)); }

double NormalizedSystem::f(double u) const {
    if (u == 0.0) {
        const double x = 1e-12 * original_->domain();
        return original_->f(x) * h(x) / original_->g(x);
    }
    const double x = h_inverse(u);
    return original_->f(x) * u / original_->g(x);
}

std::unique_ptr<NormalizedSystem> normalize_system(std::shared_ptr<const System> sys) {
    return std::make_unique<NormalizedSystem>(std::move(sys));
}

void write_profile_csv(std::ostream& os, const DisplacementProfile& profile) {
    os << "y0,y1,displacement,max_x,outcome\n";
    for (const auto& r : profile.records) {
        os << format_double(r.y0) << ',' << format_double(r.y1) << ','
           << format_double(r.displacement) << ',' << format_double(r.max_x) << ','
           << to_string(r.outcome) << '\n';
    }
}

}  // namespace liencycle

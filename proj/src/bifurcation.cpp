#include "liencycle/bifurcation.hpp"

#include "liencycle/error.hpp"
#include "liencycle/format.hpp"
#include "liencycle/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace liencycle {

namespace {

struct CountResult {
    int count = 0;
    bool semistable = false;
};

CountResult count_cycles(Family family, double a, double b, double c, const CycleOptions& opts) {
    const System sys(family_spec(family, a, b, c));
    const auto cycles = find_cycles(sys, opts);
    CountResult r;
    r.count = cycle_multiplicity(cycles);
    r.semistable = std::any_of(cycles.begin(), cycles.end(), [](const LimitCycle& cy) {
        return cy.stability == Stability::SemistableCandidate;
    });
    return r;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1.0);
    v.back() = hi;
    return v;
}

}  // namespace

const char* to_string(Family f) {
    switch (f) {
    case Family::GLO: return "glo";
    case Family::Filippov: return "filippov";
    case Family::Rychkov: return "rychkov";
    }
    return "?";
}

const char* to_string(RegionLabel l) {
    switch (l) {
    case RegionLabel::I: return "I";
    case RegionLabel::II: return "II";
    case RegionLabel::III: return "III";
    case RegionLabel::H1: return "H1";
    case RegionLabel::H2: return "H2";
    case RegionLabel::DL_near: return "DL_near";
    case RegionLabel::Unclassified: return "Unclassified";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "glo") return Family::GLO;
    if (s == "filippov") return Family::Filippov;
    if (s == "rychkov") return Family::Rychkov;
    throw ConfigError("family", "unknown family '" + s + "' (expected glo, filippov or rychkov)");
}

SystemSpec family_spec(Family family, double a, double b, double c) {
    switch (family) {
    case Family::GLO:
        if (c < 0.0) throw ConfigError("c", "the glo family needs c >= 0 (single equilibrium)");
        return builtin::glo(a, b, c);
    case Family::Filippov: return builtin::filippov(a, b, c);
    case Family::Rychkov: return builtin::rychkov(a, b);
    }
    throw ConfigError("family", "unknown family");
}

RegionCell classify_point(Family family, double a, double b, double c,
                          const BifurcationOptions& opts) {
    RegionCell cell;
    cell.a = a;
    cell.b = b;
    cell.c = c;
    try {
        const System sys(family_spec(family, a, b, c));
        cell.origin = origin_stability(sys, opts.cycles);
        const auto cycles = find_cycles(sys, opts.cycles);
        cell.cycle_count = cycle_multiplicity(cycles);
        const bool semistable = std::any_of(cycles.begin(), cycles.end(), [](const LimitCycle& cy) {
            return cy.stability == Stability::SemistableCandidate;
        });
        if (a < 0.0) {
            cell.label = RegionLabel::I;
        } else if (a == 0.0) {
            cell.label = b >= 0.0 ? RegionLabel::H1 : RegionLabel::H2;
        } else if (semistable) {
            cell.label = RegionLabel::DL_near;
        } else if (cell.cycle_count == 0) {
            cell.label = RegionLabel::II;
        } else if (cell.cycle_count == 2) {
            cell.label = RegionLabel::III;
        } else {
            cell.label = RegionLabel::Unclassified;
            cell.reason = "a > 0 with " + std::to_string(cell.cycle_count) + " cycle(s)";
        }
    } catch (const Error& e) {
        cell.label = RegionLabel::Unclassified;
        cell.reason = e.what();
    }
    return cell;
}

RegionMap region_map(Family family, double c, double a_lo, double a_hi, double b_lo, double b_hi,
                     int na, int nb, const BifurcationOptions& opts) {
    if (na < 2 || nb < 2) throw ConfigError("grid", "na and nb must be >= 2");
    if (!(a_lo < a_hi) || !(b_lo < b_hi)) throw ConfigError("range", "ranges must have lo < hi");
    RegionMap map;
    map.a_values = linspace(a_lo, a_hi, na);
    if (a_lo < 0.0 && a_hi > 0.0 &&
        std::find(map.a_values.begin(), map.a_values.end(), 0.0) == map.a_values.end()) {
        map.a_values.insert(std::upper_bound(map.a_values.begin(), map.a_values.end(), 0.0), 0.0);
    }
    map.b_values = linspace(b_lo, b_hi, nb);
    const std::size_t nbs = map.b_values.size();

    for (double a : map.a_values) {
        std::vector<RegionCell> column(nbs);
        parallel_for(nbs, opts.workers, [&](std::size_t j) {
            column[j] = classify_point(family, a, map.b_values[j], c, opts);
        });

        const std::size_t before = map.violations.size();
        const std::string where = "a = " + format_double(a);
        bool seen_ii = false;
        for (const auto& cell : column) {
            if (cell.label == RegionLabel::Unclassified) {
                map.violations.push_back(where + ", b = " + format_double(cell.b) +
                                         ": unclassified (" + cell.reason + ")");
            }
            if (a > 0.0) {
                if (cell.label == RegionLabel::II) seen_ii = true;
                if (seen_ii && cell.label == RegionLabel::III) {
                    map.violations.push_back(where + ", b = " + format_double(cell.b) +
                                             ": III above II in the column");
                }
                if (cell.b <= -2.5 * std::sqrt(a) && cell.label != RegionLabel::III) {
                    map.violations.push_back(where + ", b = " + format_double(cell.b) +
                                             ": expected III for b <= -5 sqrt(a) / 2, got " +
                                             to_string(cell.label));
                }
            } else if (a < 0.0 && cell.label != RegionLabel::I) {
                map.violations.push_back(where + ", b = " + format_double(cell.b) +
                                         ": expected I for a < 0");
            }
        }
        map.cells.insert(map.cells.end(), column.begin(), column.end());
        if (opts.abort_on_violation && map.violations.size() > before) {
            map.aborted = true;
            break;
        }
    }
    return map;
}

DlTrace trace_dl(Family family, double c, const std::vector<double>& a_values,
                 const BifurcationOptions& opts) {
    for (double a : a_values)
        if (!(a > 0.0)) throw ConfigError("a", "trace_dl needs every a > 0");
    const CycleOptions tight = opts.cycles.tightened(opts.tighten);

    DlTrace trace;
    trace.points.resize(a_values.size());
    parallel_for(a_values.size(), opts.workers, [&](std::size_t i) {
        const double a = a_values[i];
        const double root = std::sqrt(a);
        DlCurvePoint p;
        p.a = a;
        p.c = c;
        p.lower_bound = -2.5 * root;
        p.upper_bound = -2.0 * root;

        const CountResult low = count_cycles(family, a, p.lower_bound, c, tight);
        const CountResult high = count_cycles(family, a, p.upper_bound, c, tight);
        if (low.count != 2 || high.count == 2) throw BracketInvalid(a, low.count, high.count);

        double lo = p.lower_bound, hi = p.upper_bound;
        const double target = 1e-4 * root;
        while (hi - lo > target) {
            const double mid = 0.5 * (lo + hi);
            const CountResult r = count_cycles(family, a, mid, c, tight);
            if (r.semistable) {
                p.stopped_on_semistable = true;
                lo = hi = mid;
                break;
            }
            (r.count == 2 ? lo : hi) = mid;
        }
        p.phi = 0.5 * (lo + hi);
        p.bracket_width = hi - lo;
        p.bounds_ok = p.lower_bound < p.phi && p.phi < p.upper_bound;
        trace.points[i] = p;
    });

    std::vector<const DlCurvePoint*> sorted;
    for (const auto& p : trace.points) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const DlCurvePoint* l, const DlCurvePoint* r) { return l->a < r->a; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->a > sorted[i - 1]->a && !(sorted[i]->phi < sorted[i - 1]->phi))
            trace.phi_decreasing = false;
    return trace;
}

void write_regions_csv(std::ostream& os, const RegionMap& map) {
    os << "a,b,c,label,cycle_count,origin\n";
    for (const auto& cell : map.cells) {
        os << format_double(cell.a) << ',' << format_double(cell.b) << ',' << format_double(cell.c)
           << ',' << to_string(cell.label) << ',' << cell.cycle_count << ','
           << to_string(cell.origin) << '\n';
    }
}

void write_dl_csv(std::ostream& os, const DlTrace& trace) {
    os << "a,c,phi,lower,upper,bounds_ok,bracket_width\n";
    for (const auto& p : trace.points) {
        os << format_double(p.a) << ',' << format_double(p.c) << ',' << format_double(p.phi) << ','
           << format_double(p.lower_bound) << ',' << format_double(p.upper_bound) << ','
           << (p.bounds_ok ? "true" : "false") << ',' << format_double(p.bracket_width) << '\n';
    }
}

}  // namespace liencycle

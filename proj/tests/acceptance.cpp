// Acceptance suite: one PASS/FAIL line per criterion, with timing.

#include "cli.hpp"

#include "liencycle/bifurcation.hpp"
#include "liencycle/cycles.hpp"
#include "liencycle/flow.hpp"
#include "liencycle/format.hpp"
#include "liencycle/hypotheses.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace liencycle;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Report {
    bool ok = true;
    std::vector<std::string> notes;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back("FAILED: " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

/// Trajectories collected for the energy identity check of criterion 7(ii).
struct Collected {
    std::vector<std::pair<std::shared_ptr<const System>, Trajectory>> trajectories;
    std::vector<LimitCycle> simple_cycles;
    void add_cycles(const std::shared_ptr<const System>& sys, const std::vector<LimitCycle>& cycles) {
        for (const auto& c : cycles) {
            trajectories.emplace_back(sys, full_cycle(*sys, c.y0_star));
            if (c.stability == Stability::Stable || c.stability == Stability::Unstable)
                simple_cycles.push_back(c);
        }
    }
};

int failures = 0;

void criterion(const std::string& id, const std::string& title, double limit_s,
               const std::function<void(Report&)>& body) {
    Report r;
    const auto t0 = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    r.require(elapsed < limit_s, "time " + format_double(elapsed) + " s over the " +
                                     format_double(limit_s) + " s budget");
    if (!r.ok) ++failures;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", elapsed);
    std::cout << (r.ok ? "[PASS] " : "[FAIL] ") << id << " " << title << " (" << buf << " s, budget "
              << limit_s << " s)\n";
    for (const auto& n : r.notes) std::cout << "       " << n << "\n";
    std::cout.flush();
}

json run_cli(const std::vector<std::string>& args, int& code) {
    std::ostringstream out, err;
    code = cli::run(args, out, err);
    return json::parse(out.str());
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

int main() {
    Collected col;

    criterion("C1", "no-cycle regime a >= 0, b >= -2 sqrt(a)", 30.0, [&](Report& r) {
        for (auto [a, b] : {std::pair{1.0, -2.0}, {1.0, 0.0}, {0.0, 1.0}, {4.0, -4.0}}) {
            const std::string sys = "glo:" + fmt(a) + "," + fmt(b) + ",1";
            int code = 0;
            const auto doc = run_cli({"cycles", "--system", sys, "--y-max", "10", "--no-cache"}, code);
            const int n = doc["cycle_count"].get<int>();
            r.note(sys + ": " + std::to_string(n) + " cycles");
            r.require(code == 0 && n == 0, sys + " should have no cycle");
        }
    });

    criterion("C2", "unique stable cycle for a < 0 or a = 0 > b", 30.0, [&](Report& r) {
        for (auto [a, b] : {std::pair{-1.0, 0.0}, {-0.5, 1.0}, {0.0, -1.0}}) {
            const auto sys = std::make_shared<const System>(builtin::glo(a, b, 1.0));
            const auto cycles = find_cycles(*sys);
            col.add_cycles(sys, cycles);
            r.note(sys->name() + ": " + std::to_string(cycles.size()) + " cycle(s)" +
                   (cycles.empty() ? "" : ", div " + fmt(cycles[0].div_integral)));
            r.require(cycles.size() == 1, sys->name() + " should have exactly one cycle");
            if (cycles.size() == 1) r.require(cycles[0].div_integral < 0.0, sys->name() + " div_integral < 0");
        }
    });

    std::vector<std::pair<std::shared_ptr<const System>, std::vector<LimitCycle>>> two_cycle_runs;
    criterion("C3", "two-cycle regime: inner Unstable, outer Stable, amplitudes > alpha1", 60.0, [&](Report& r) {
        for (auto [a, b] : {std::pair{1.0, -2.6}, {1.0, -3.0}, {4.0, -6.0}}) {
            const auto sys = std::make_shared<const System>(builtin::glo(a, b, 1.0));
            const auto cycles = find_cycles(*sys);
            col.add_cycles(sys, cycles);
            two_cycle_runs.emplace_back(sys, cycles);
            const double alpha1 = sys->characteristic_points().alpha1;
            std::string line = sys->name() + ": alpha1 " + fmt(alpha1);
            for (const auto& c : cycles)
                line += "; amp " + fmt(c.amplitude) + " " + to_string(c.stability);
            r.note(line);
            r.require(cycles.size() == 2, sys->name() + " should have exactly two cycles");
            if (cycles.size() != 2) continue;
            r.require(cycles[0].stability == Stability::Unstable && cycles[1].stability == Stability::Stable,
                      sys->name() + " inner Unstable / outer Stable");
            for (const auto& c : cycles)
                r.require(c.amplitude > alpha1, sys->name() + " cycle amplitude " + fmt(c.amplitude) +
                                                    " > alpha1 " + fmt(alpha1));
        }
    });

    criterion("C4", "double-limit-cycle curve inside (-5 sqrt(a)/2, -2 sqrt(a)), decreasing", 300.0,
              [&](Report& r) {
                  BifurcationOptions opts;
                  opts.workers = 4;
                  const auto trace = trace_dl(Family::GLO, 1.0, {0.5, 1.0, 2.0}, opts);
                  for (const auto& p : trace.points) {
                      r.note("a " + fmt(p.a) + ": phi " + format_double(p.phi) + " in (" + fmt(p.lower_bound) +
                             ", " + fmt(p.upper_bound) + "), width " + fmt(p.bracket_width));
                      r.require(p.bounds_ok && p.lower_bound < p.phi && p.phi < p.upper_bound,
                                "phi inside the bounds at a = " + fmt(p.a));
                      r.require(p.bracket_width <= 1e-4 * std::sqrt(p.a), "bracket width at a = " + fmt(p.a));
                  }
                  r.require(trace.phi_decreasing, "phi decreasing in a");
              });

    criterion("C5", "Filippov system: two cycles with transversal crossings", 60.0, [&](Report& r) {
        const auto sys = std::make_shared<const System>(builtin::filippov(1.0, -2.6, 1.0));
        const auto cycles = find_cycles(*sys);
        col.add_cycles(sys, cycles);
        r.require(cycles.size() == 2, "two cycles (found " + std::to_string(cycles.size()) + ")");
        std::size_t events = 0, bad = 0;
        double min_abs_y = INFINITY;
        std::vector<Trajectory> trajs;
        for (const auto& c : cycles) trajs.push_back(full_cycle(*sys, c.y0_star));
        // Orbits starting outside the inner cycle stay away from the origin focus.
        const double inner = cycles.empty() ? 0.0 : cycles.front().y0_star;
        for (double y0 : {1.0, 2.0, 3.0, 5.0}) {
            if (y0 <= inner) continue;
            trajs.push_back(integrate(*sys, 0.0, y0, 30.0));
            col.trajectories.emplace_back(sys, trajs.back());
        }
        for (const auto& t : trajs)
            for (const auto& e : t.events) {
                ++events;
                min_abs_y = std::min(min_abs_y, std::abs(e.y));
                if (!(std::abs(e.y) > 1e-3 && crossing_indicator(e.y) > 0.0)) ++bad;
            }
        r.require(bad == 0, std::to_string(bad) + " crossings with |y| <= 1e-3");
        r.note(std::to_string(events) + " crossings, min |y| " + fmt(min_abs_y));
    });

    criterion("C6", "hypothesis separation", 10.0, [&](Report& r) {
        int code = 0;
        auto doc = run_cli({"check", "--system", "pls:1,1,-1.8"}, code);
        for (const char* h : {"h1", "h2", "h3", "h4"})
            r.require(doc[h]["holds"] == true, std::string("pls ") + h + " holds");
        r.require(doc["h1"]["marginal"] == true, "pls H1 flagged marginal");
        r.require(doc["thmA_d"]["holds"] == false, "pls thmA_d fails");
        r.require(code == 0, "pls check exits 0");
        r.note("pls: thmA_d witness x = " + doc["thmA_d"]["witness"]["x"].dump() + ", f' = " +
               doc["thmA_d"]["witness"]["value"].dump());
        doc = run_cli({"check", "--system", "glo:1,-3,1"}, code);
        r.require(doc["all_hold"] == true && code == 0, "glo(1,-3,1) H1-H4 hold");
        r.require(doc["h4_branch"] == "weighted_monotone", "glo(1,-3,1) weighted_monotone branch");
    });

    criterion("C7", "oracle and property suite", 600.0, [&](Report& r) {
        // (i) Hamiltonian displacement
        {
            const auto ham = std::make_shared<const System>(builtin::hamiltonian_test());
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                const double y0 = 0.1 + 0.3 * i;
                worst = std::max(worst, std::abs(half_return(*ham, y0).displacement));
                IntegrationOptions io;
                io.stop_after_events = 1;
                col.trajectories.emplace_back(ham, integrate(*ham, 0.0, y0, 100.0, io));
            }
            r.note("(i) max |displacement| " + fmt(worst));
            r.require(worst < 1e-8, "(i) Hamiltonian displacement within 1e-8");
        }
        // (iv) normalization, also contributing cycles to (ii) and (iii)
        {
            const auto sys = std::make_shared<const System>(builtin::glo(1.0, -2.6, 0.0));
            const auto a = find_cycles(*sys);
            const auto b = find_cycles(*normalize_system(sys));
            col.add_cycles(sys, a);
            double worst = a.size() == b.size() && !a.empty() ? 0.0 : INFINITY;
            for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
                worst = std::max(worst, std::abs(a[i].y0_star - b[i].y0_star));
            r.note("(iv) " + std::to_string(a.size()) + " cycles, max ordinate difference " + fmt(worst));
            r.require(worst < 1e-6, "(iv) normalized section ordinates within 1e-6");
        }
        // (ii) energy identity
        {
            double worst = 0.0;
            for (const auto& [sys, traj] : col.trajectories) worst = std::max(worst, energy_residual(*sys, traj));
            r.note("(ii) " + std::to_string(col.trajectories.size()) + " trajectories, max energy residual " +
                   fmt(worst));
            r.require(worst < 1e-6, "(ii) energy residual below 1e-6");
        }
        // (iii) divergence sign vs displacement slope sign
        {
            int mismatches = 0;
            for (const auto& c : col.simple_cycles)
                if ((c.div_integral > 0.0) != (c.displacement_slope > 0.0)) ++mismatches;
            r.note("(iii) " + std::to_string(col.simple_cycles.size()) + " simple cycles, " +
                   std::to_string(mismatches) + " sign mismatches");
            r.require(mismatches == 0, "(iii) divergence sign matches the displacement slope");
        }
        // (v) randomized family
        {
            std::mt19937_64 rng(20241016);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            int over = 0, missing = 0, coupled = 0;
            for (int i = 0; i < 50; ++i) {
                const double a = 4.0 * (1.0 - u01(rng));  // (0, 4]
                const double root = std::sqrt(a);
                const double b = -2.0 * root * (1.0 + 0.5 * u01(rng)) - 1e-9;  // b < -2 sqrt(a)
                const double c = 2.0 * u01(rng);
                const System sys(builtin::glo(a, b, c));
                const auto rep = check_hypotheses(sys);
                const int count = cycle_multiplicity(find_cycles(sys));
                if (rep.all_hold() && count > 2) ++over;
                const bool two_expected = b <= -2.5 * root && rep.thm2.holds() &&
                                          rep.thm2.integral_sign != Sign::Negative;
                if (two_expected) {
                    ++coupled;
                    if (count != 2) ++missing;
                }
            }
            r.note("(v) 50 draws: " + std::to_string(over) + " over the bound, " + std::to_string(coupled) +
                   " draws in the two-cycle regime, " + std::to_string(missing) + " without two cycles");
            r.require(over == 0, "(v) count <= 2 whenever H1-H4 hold");
            r.require(missing == 0, "(v) exactly two cycles in the two-cycle regime");
        }
    });

    criterion("C8", "amplitude ordering and a cycle inside (-beta2, beta2)", 60.0, [&](Report& r) {
        r.require(two_cycle_runs.size() == 3, "criterion 3 runs available");
        for (const auto& [sys, cycles] : two_cycle_runs) {
            if (cycles.size() != 2) {
                r.require(false, sys->name() + " has two cycles");
                continue;
            }
            const double beta2 = sys->characteristic_points().beta2;
            const double inner = cycles[0].amplitude, outer = cycles[1].amplitude;
            r.note(sys->name() + ": inner " + fmt(inner) + ", outer " + fmt(outer) + ", beta2 " + fmt(beta2));
            r.require(inner * (1.0 + 1e-6) < outer, sys->name() + " inner amplitude < outer amplitude");
            r.require(std::min(inner, outer) * (1.0 + 1e-6) < beta2, sys->name() + " a cycle inside (-beta2, beta2)");
        }
    });

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << "\n";
    return failures == 0 ? 0 : 1;
}

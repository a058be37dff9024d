#pragma once

// Parameter-plane classification of the quintic families and tracing of the
// double-limit-cycle curve b = phi(a, c).

#include "liencycle/cycles.hpp"

#include <string>
#include <vector>

namespace liencycle {

enum class Family { GLO, Filippov, Rychkov };
enum class RegionLabel { I, II, III, H1, H2, DL_near, Unclassified };

[[nodiscard]] const char* to_string(Family f);
[[nodiscard]] const char* to_string(RegionLabel l);
/// Accepts "glo", "filippov", "rychkov"; throws ConfigError otherwise.
[[nodiscard]] Family parse_family(const std::string& s);

/// Builtin spec of the family member; Rychkov ignores c.
[[nodiscard]] SystemSpec family_spec(Family family, double a, double b, double c);

struct RegionCell {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    int cycle_count = 0;  ///< semistable candidates count 2
    RegionLabel label = RegionLabel::Unclassified;
    OriginType origin = OriginType::Marginal;
    std::string reason;  ///< set when Unclassified
};

struct BifurcationOptions {
    CycleOptions cycles{};
    unsigned workers = 1;
    /// Tolerance reduction used by trace_dl near the transition.
    double tighten = 100.0;
    /// Stop region_map after the first column with a violation.
    bool abort_on_violation = false;
};

[[nodiscard]] RegionCell classify_point(Family family, double a, double b, double c,
                                        const BifurcationOptions& opts = {});

struct RegionMap {
    std::vector<double> a_values;
    std::vector<double> b_values;
    /// Column-major: all b for a_values[0], then a_values[1], ...
    std::vector<RegionCell> cells;
    std::vector<std::string> violations;
    bool aborted = false;
};

/// a = 0 is inserted as an extra column when the a-range straddles it.
[[nodiscard]] RegionMap region_map(Family family, double c, double a_lo, double a_hi, double b_lo,
                                   double b_hi, int na, int nb, const BifurcationOptions& opts = {});

struct DlCurvePoint {
    double a = 0.0;
    double c = 0.0;
    double phi = 0.0;
    double bracket_width = 0.0;
    double lower_bound = 0.0;  ///< -5 sqrt(a) / 2
    double upper_bound = 0.0;  ///< -2 sqrt(a)
    bool bounds_ok = false;
    /// The bisection hit a semistable candidate and stopped there.
    bool stopped_on_semistable = false;
};

struct DlTrace {
    std::vector<DlCurvePoint> points;  ///< in the order of the requested a values
    /// phi strictly decreasing along increasing a.
    bool phi_decreasing = true;
};

/// Throws ConfigError for a <= 0, BracketInvalid when the count predicate is
/// not (2 at the lower bound, not 2 at the upper bound).
[[nodiscard]] DlTrace trace_dl(Family family, double c, const std::vector<double>& a_values,
                               const BifurcationOptions& opts = {});

void write_regions_csv(std::ostream& os, const RegionMap& map);
void write_dl_csv(std::ostream& os, const DlTrace& trace);

}  // namespace liencycle

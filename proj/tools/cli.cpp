#include "cli.hpp"

#include "svg.hpp"

#include "liencycle/bifurcation.hpp"
#include "liencycle/cycles.hpp"
#include "liencycle/error.hpp"
#include "liencycle/flow.hpp"
#include "liencycle/format.hpp"
#include "liencycle/hypotheses.hpp"
#include "liencycle/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace liencycle::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kCacheVersion = "liencycle-cache-1";

// ---------------------------------------------------------------- parsing

std::vector<double> parse_numbers(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(field, "'" + item + "' is not a finite number");
        }
    }
    return out;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& field) {
    const auto v = parse_numbers(text, field);
    if (v.size() != 2) throw ConfigError(field, "expected two comma-separated numbers");
    return {v[0], v[1]};
}

double json_number(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const auto num = parse_numbers(s.substr(0, slash), field);
            const auto den = parse_numbers(s.substr(slash + 1), field);
            if (num.size() == 1 && den.size() == 1 && den[0] != 0.0) return num[0] / den[0];
        }
        const auto v = parse_numbers(s, field);
        if (v.size() == 1) return v[0];
    }
    throw ConfigError(field, "expected a number or a fraction string like \"2/3\"");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError(where + key, "unknown key");
    }
}

OddTerm parse_term(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where, "term must be an object");
    reject_unknown(j, {"kind", "coef", "exponent", "saturation"}, where + ".");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ConfigError(where + ".kind", "missing term kind");
    const auto kind = j["kind"].get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key)) throw ConfigError(where + "." + key, "missing");
        return json_number(j[key], where + "." + key);
    };
    if (kind == "power") return OddTerm::power(num("coef"), num("exponent"));
    if (kind == "saturated") return OddTerm::saturated(num("coef"), num("exponent"), num("saturation"));
    if (kind == "sign_step") return OddTerm::sign_step(num("coef"));
    throw ConfigError(where + ".kind", "unknown kind '" + kind + "' (power, saturated, sign_step)");
}

json term_json(const OddTerm& t) {
    json j;
    switch (t.kind) {
    case TermKind::PowerOdd:
        j["kind"] = "power";
        j["coef"] = t.coef;
        j["exponent"] = t.exponent;
        break;
    case TermKind::SaturatedPowerOdd:
        j["kind"] = "saturated";
        j["coef"] = t.coef;
        j["exponent"] = t.exponent;
        j["saturation"] = t.saturation;
        break;
    case TermKind::SignStep:
        j["kind"] = "sign_step";
        j["coef"] = t.coef;
        break;
    }
    return j;
}

json spec_json(const SystemSpec& s) {
    json j;
    j["name"] = s.name;
    j["domain_d"] = s.domain_d;
    j["c"] = s.c;
    j["F_terms"] = json::array();
    for (const auto& t : s.F_terms) j["F_terms"].push_back(term_json(t));
    j["g0_terms"] = json::array();
    for (const auto& t : s.g0_terms) j["g0_terms"].push_back(term_json(t));
    return j;
}

/// Numeric options that may come from a config file's "options" block.
struct NumericOptions {
    std::optional<double> rtol, atol, h_max, y_min, y_max, t_max, integral_upper;
    std::optional<int> n_grid;
};

struct LoadedConfig {
    SystemSpec spec;
    NumericOptions options;
};

LoadedConfig load_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config", "top level must be an object");
    reject_unknown(j, {"name", "domain_d", "c", "F_terms", "g0_terms", "options"}, "");
    LoadedConfig cfg;
    cfg.spec.name = j.value("name", std::string("config"));
    if (!j.contains("domain_d")) throw ConfigError("domain_d", "missing");
    cfg.spec.domain_d = json_number(j["domain_d"], "domain_d");
    cfg.spec.c = j.contains("c") ? json_number(j["c"], "c") : 0.0;
    for (const char* key : {"F_terms", "g0_terms"}) {
        if (!j.contains(key)) {
            if (std::string(key) == "g0_terms") throw ConfigError(key, "missing");
            continue;
        }
        if (!j[key].is_array()) throw ConfigError(key, "must be an array");
        auto& terms = std::string(key) == "F_terms" ? cfg.spec.F_terms : cfg.spec.g0_terms;
        for (std::size_t i = 0; i < j[key].size(); ++i)
            terms.push_back(parse_term(j[key][i], std::string(key) + "[" + std::to_string(i) + "]"));
    }
    if (j.contains("options")) {
        const auto& o = j["options"];
        if (!o.is_object()) throw ConfigError("options", "must be an object");
        reject_unknown(o, {"rtol", "atol", "h_max", "y_min", "y_max", "t_max", "integral_upper", "n_grid"},
                       "options.");
        auto get = [&](const char* key, std::optional<double>& dst) {
            if (o.contains(key)) dst = json_number(o[key], std::string("options.") + key);
        };
        get("rtol", cfg.options.rtol);
        get("atol", cfg.options.atol);
        get("h_max", cfg.options.h_max);
        get("y_min", cfg.options.y_min);
        get("y_max", cfg.options.y_max);
        get("t_max", cfg.options.t_max);
        get("integral_upper", cfg.options.integral_upper);
        if (o.contains("n_grid")) {
            if (!o["n_grid"].is_number_integer()) throw ConfigError("options.n_grid", "must be an integer");
            cfg.options.n_grid = o["n_grid"].get<int>();
        }
    }
    return cfg;
}

// ------------------------------------------------------------------ cache

class Cache {
public:
    Cache(std::string dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled && !dir_.empty()) {}

    /// Stored files for `key`, or nothing on a miss.
    std::optional<std::map<std::string, std::string>> get(const std::string& key) const {
        if (!enabled_) return std::nullopt;
        std::ifstream in(path(key), std::ios::binary);
        if (!in) return std::nullopt;
        try {
            const json j = json::parse(in);
            if (j.at("key").get<std::string>() != key) return std::nullopt;
            return j.at("files").get<std::map<std::string, std::string>>();
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    void put(const std::string& key, const std::map<std::string, std::string>& files) const {
        if (!enabled_) return;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) return;
        json j;
        j["key"] = key;
        j["files"] = files;
        const fs::path final_path = path(key);
        const fs::path tmp = final_path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) return;
            out << j.dump();
        }
        fs::rename(tmp, final_path, ec);
    }

    [[nodiscard]] fs::path path(const std::string& key) const {
        std::ostringstream name;
        name << std::hex << std::setw(16) << std::setfill('0') << fnv1a(key) << ".json";
        return fs::path(dir_) / name.str();
    }

private:
    std::string dir_;
    bool enabled_;
};

std::string default_cache_dir() {
    if (const char* env = std::getenv("LIENCYCLE_CACHE"); env && *env) return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
        return (fs::path(xdg) / "liencycle").string();
    if (const char* home = std::getenv("HOME"); home && *home)
        return (fs::path(home) / ".cache" / "liencycle").string();
    return {};
}

// ----------------------------------------------------------------- output

void emit(const std::string& path, std::ostream& out, const std::string& content) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("output", "cannot open '" + path + "' for writing");
    f << content;
}

json witness_json(const std::optional<Witness>& w) {
    if (!w) return nullptr;
    return json{{"x", w->x}, {"value", w->value}, {"reason", w->reason}};
}

json points_json(const CharacteristicPoints& p) {
    json j;
    j["beta1"] = p.beta1;
    j["alpha1"] = p.alpha1;
    j["beta2"] = p.beta2;
    j["fprime_zeros"] = p.fprime_zeros;
    j["alpha1_is_corner"] = p.alpha1_is_corner;
    j["method"] = p.method == CharacteristicPoints::Method::ClosedForm ? "closed_form" : "numeric";
    return j;
}

json hypothesis_json(const HypothesisResult& h) {
    return json{{"holds", h.holds}, {"marginal", h.marginal}, {"note", h.note},
                {"witness", witness_json(h.witness)}};
}

json monotone_json(const MonotonicityResult& m) {
    return json{{"holds", m.holds}, {"samples", m.samples}, {"lo", m.lo}, {"hi", m.hi},
                {"witness", witness_json(m.witness)}};
}

json cycle_json(const LimitCycle& c) {
    json j;
    j["y0_star"] = c.y0_star;
    j["amplitude"] = c.amplitude;
    j["period"] = c.period;
    j["div_integral"] = c.div_integral;
    j["stability"] = to_string(c.stability);
    j["intersects_alpha1"] = c.intersects_alpha1;
    j["residual"] = c.residual;
    j["displacement_slope"] = c.displacement_slope;
    return j;
}

std::vector<std::pair<double, double>> orbit_points(const Trajectory& traj) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(traj.samples.size());
    for (const auto& s : traj.samples) pts.emplace_back(s.x, s.y);
    return pts;
}

void draw_phase_frame(svg::Plot& plot, const System& sys, double x_range) {
    std::vector<std::pair<double, double>> nullcline;
    for (int i = 0; i <= 400; ++i) {
        const double x = -x_range + 2.0 * x_range * i / 400.0;
        nullcline.emplace_back(x, sys.F(x));
    }
    plot.vline(0.0, "#888888", "4,3");
    plot.polyline(nullcline, "#2a9d8f", 1.5, "6,3");
    plot.legend("y = F(x)", "#2a9d8f");
    plot.legend("section x = 0", "#888888");
}

struct Bounds {
    double x = 0.0, y = 0.0;
    void add(const Trajectory& t) {
        for (const auto& s : t.samples) {
            x = std::max(x, std::abs(s.x));
            y = std::max(y, std::abs(s.y));
        }
    }
};

// --------------------------------------------------------------- commands

struct Common {
    std::string system;
    std::string config;
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = 0.1;
    std::string cache_dir;
    bool no_cache = false;
    unsigned workers = default_workers();
    CLI::Option* rtol_opt = nullptr;
    CLI::Option* atol_opt = nullptr;
    CLI::Option* h_max_opt = nullptr;
};

struct ScanFlags {
    int n_grid = 200;
    double y_min = 0.0;
    double y_max = 0.0;
    double t_max = 1e4;
    CLI::Option* n_grid_opt = nullptr;
    CLI::Option* y_min_opt = nullptr;
    CLI::Option* y_max_opt = nullptr;
    CLI::Option* t_max_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c, bool system_flags) {
    if (system_flags) {
        auto* s = cmd->add_option("--system", c.system,
                                  "builtin system: glo:a,b,c | filippov:a,b,c | rychkov:a,b | "
                                  "pls:a1,a2,a3 | hamiltonian-test");
        auto* f = cmd->add_option("--config", c.config, "JSON system description");
        s->excludes(f);
    }
    c.rtol_opt = cmd->add_option("--rtol", c.rtol, "relative step tolerance")->capture_default_str();
    c.atol_opt = cmd->add_option("--atol", c.atol, "absolute step tolerance")->capture_default_str();
    c.h_max_opt = cmd->add_option("--h-max", c.h_max, "maximum step size")->capture_default_str();
    cmd->add_option("--cache-dir", c.cache_dir, "cache directory (default $LIENCYCLE_CACHE or ~/.cache/liencycle)");
    cmd->add_flag("--no-cache", c.no_cache, "disable the result cache");
    cmd->add_option("--workers", c.workers, "worker threads")->capture_default_str();
}

void add_scan(CLI::App* cmd, ScanFlags& s) {
    s.n_grid_opt = cmd->add_option("--n-grid", s.n_grid, "displacement scan points")->capture_default_str();
    s.y_min_opt = cmd->add_option("--y-min", s.y_min, "scan start (default 1e-3 * y_scale)");
    s.y_max_opt = cmd->add_option("--y-max", s.y_max, "scan end (default y_cap)");
    s.t_max_opt = cmd->add_option("--t-max", s.t_max, "maximum half-turn duration")->capture_default_str();
}

struct Resolved {
    SystemSpec spec;
    NumericOptions file_options;
};

Resolved resolve_system(const Common& c) {
    Resolved r;
    if (!c.config.empty()) {
        std::ifstream in(c.config, std::ios::binary);
        if (!in) throw ConfigError("config", "cannot read '" + c.config + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        auto cfg = load_config_text(ss.str());
        r.spec = std::move(cfg.spec);
        r.file_options = cfg.options;
    } else if (!c.system.empty()) {
        r.spec = parse_system(c.system);
    } else {
        throw ConfigError("system", "one of --system or --config is required");
    }
    return r;
}

template <typename T>
T pick(CLI::Option* flag, T flag_value, const std::optional<T>& file_value) {
    if ((flag && flag->count() > 0) || !file_value) return flag_value;
    return *file_value;
}

IntegrationOptions integration_options(const Common& c, const NumericOptions& file) {
    IntegrationOptions io;
    io.rtol = pick(c.rtol_opt, c.rtol, file.rtol);
    io.atol = pick(c.atol_opt, c.atol, file.atol);
    io.h_max = pick(c.h_max_opt, c.h_max, file.h_max);
    if (!(io.rtol > 0.0)) throw ConfigError("rtol", "must be > 0");
    if (!(io.atol > 0.0)) throw ConfigError("atol", "must be > 0");
    if (!(io.h_max > 0.0)) throw ConfigError("h-max", "must be > 0");
    return io;
}

CycleOptions cycle_options(const Common& c, const ScanFlags& s, const NumericOptions& file) {
    CycleOptions o;
    o.integration = integration_options(c, file);
    o.n_grid = pick(s.n_grid_opt, s.n_grid, file.n_grid);
    o.y_min = pick(s.y_min_opt, s.y_min, file.y_min);
    o.y_max = pick(s.y_max_opt, s.y_max, file.y_max);
    o.t_max = pick(s.t_max_opt, s.t_max, file.t_max);
    o.workers = c.workers;
    if (o.n_grid < 2) throw ConfigError("n-grid", "must be >= 2");
    if (!(o.t_max > 0.0)) throw ConfigError("t-max", "must be > 0");
    if (o.y_min > 0.0 && o.y_max > 0.0 && !(o.y_min < o.y_max))
        throw ConfigError("y-min", "must be below y-max");
    return o;
}

std::string options_key(const CycleOptions& o) {
    return "rtol=" + format_double(o.integration.rtol) + ";atol=" + format_double(o.integration.atol) +
           ";h_max=" + format_double(o.integration.h_max) + ";n_grid=" + std::to_string(o.n_grid) +
           ";y_min=" + format_double(o.y_min) + ";y_max=" + format_double(o.y_max) +
           ";t_max=" + format_double(o.t_max);
}

Cache make_cache(const Common& c) {
    return Cache(c.cache_dir.empty() ? default_cache_dir() : c.cache_dir, !c.no_cache);
}

struct SimulateFlags {
    double x0 = 0.0;
    double y0 = 1.0;
    double t_max = 50.0;
    int turns = 0;
    std::string out, svg, json_out;
    CLI::Option* t_max_opt = nullptr;
};

int cmd_simulate(const Common& c, const SimulateFlags& f, std::ostream& out, std::ostream& err) {
    const auto r = resolve_system(c);
    const System sys(r.spec);
    if (std::abs(f.x0) > sys.domain()) throw ConfigError("x0", "initial point outside (-d, d)");
    if (f.turns < 0) throw ConfigError("turns", "must be >= 0");
    IntegrationOptions io = integration_options(c, r.file_options);
    io.stop_after_events = 2 * f.turns;
    double t_max = f.t_max;
    if (f.turns > 0 && f.t_max_opt->count() == 0) t_max = 1e4;
    if (!(t_max > 0.0)) throw ConfigError("t-max", "must be > 0");

    const Trajectory traj = integrate(sys, f.x0, f.y0, t_max, io);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    emit(f.out, out, csv.str());

    const auto& last = traj.back();
    json doc;
    doc["system"] = sys.name();
    doc["start"] = {f.x0, f.y0};
    doc["final"] = {{"t", last.t}, {"x", last.x}, {"y", last.y}};
    doc["terminal"] = to_string(traj.terminal);
    doc["events"] = json::array();
    for (const auto& e : traj.events)
        doc["events"].push_back({{"t", e.t}, {"y", e.y}, {"direction", to_string(e.direction)}});
    doc["energy_residual"] = energy_residual(sys, traj);
    if (!f.json_out.empty()) emit(f.json_out, out, doc.dump(2) + "\n");
    err << "simulate: " << traj.samples.size() << " samples, " << traj.events.size()
        << " crossings, terminal " << to_string(traj.terminal) << "\n";

    if (!f.svg.empty()) {
        Bounds b;
        b.add(traj);
        const double xr = std::max(1e-3, 1.1 * b.x), yr = std::max(1e-3, 1.1 * b.y);
        svg::Plot plot(-xr, xr, -yr, yr);
        draw_phase_frame(plot, sys, xr);
        plot.polyline(orbit_points(traj), "#1d3557", 1.2);
        plot.legend("orbit", "#1d3557");
        plot.axes("x", "y", sys.name());
        std::ostringstream os;
        plot.write(os);
        emit(f.svg, out, os.str());
    }
    return kOk;
}

struct CyclesFlags {
    ScanFlags scan;
    std::string out, profile;
};

int cmd_cycles(const Common& c, const CyclesFlags& f, std::ostream& out, std::ostream& err) {
    const auto r = resolve_system(c);
    const auto sys = std::make_shared<const System>(r.spec);
    const CycleOptions opts = cycle_options(c, f.scan, r.file_options);
    const Cache cache = make_cache(c);
    const std::string key = std::string(kCacheVersion) + "|cycles|" + canonical_spec(r.spec) + "|" +
                            options_key(opts);

    std::map<std::string, std::string> files;
    if (auto hit = cache.get(key)) {
        files = std::move(*hit);
        err << "cycles: cache hit " << cache.path(key).string() << "\n";
    } else {
        DisplacementProfile profile;
        const auto cycles = find_cycles(*sys, opts, profile);
        const OriginType origin = origin_stability(*sys, opts);
        json doc;
        doc["system"] = sys->name();
        doc["domain_d"] = sys->domain();
        doc["y_scale"] = sys->y_scale();
        doc["origin"] = to_string(origin);
        doc["cycle_count"] = cycle_multiplicity(cycles);
        doc["cycles"] = json::array();
        for (const auto& cy : cycles) doc["cycles"].push_back(cycle_json(cy));
        doc["characteristic_points"] =
            sys->has_characteristic_points() ? points_json(sys->characteristic_points()) : json(nullptr);
        doc["scan"] = {{"n_grid", opts.n_grid},
                       {"y_min", profile.records.empty() ? 0.0 : profile.records.front().y0},
                       {"y_max", profile.records.empty() ? 0.0 : profile.records.back().y0},
                       {"sign_changes", profile.sign_changes.size()},
                       {"tangency_candidates", profile.tangencies.size()}};
        doc["options"] = {{"rtol", opts.integration.rtol},
                          {"atol", opts.integration.atol},
                          {"h_max", opts.integration.h_max},
                          {"t_max", opts.t_max}};
        std::ostringstream csv;
        write_profile_csv(csv, profile);
        files["document"] = doc.dump(2) + "\n";
        files["profile"] = csv.str();
        cache.put(key, files);
    }
    emit(f.out, out, files["document"]);
    if (!f.profile.empty()) emit(f.profile, out, files["profile"]);
    return kOk;
}

struct CheckFlags {
    double integral_upper = 0.0;
    CLI::Option* integral_upper_opt = nullptr;
    std::string out;
};

void print_check_table(std::ostream& os, const HypothesesReport& rep) {
    auto yes = [](bool b) { return b ? "yes" : "no"; };
    os << std::left << std::setw(12) << "condition" << std::setw(8) << "holds" << "detail\n";
    const std::pair<const char*, const HypothesisResult*> rows[] = {
        {"H1", &rep.h1}, {"H2", &rep.h2}, {"H3", &rep.h3}, {"H4", &rep.h4}};
    for (const auto& [name, h] : rows) {
        std::string detail = h->marginal ? "marginal: " + h->note : "";
        if (h->witness)
            detail = "x = " + format_double(h->witness->x) + ": " + h->witness->reason;
        os << std::setw(12) << name << std::setw(8) << yes(h->holds) << detail << "\n";
    }
    os << std::setw(12) << "H4 branch" << std::setw(8) << "" << to_string(rep.h4_branch) << "\n";
    os << std::setw(12) << "ThmA(d)" << std::setw(8) << yes(rep.thmA_d.holds)
       << (rep.thmA_d.witness ? "x = " + format_double(rep.thmA_d.witness->x) + ": " +
                                    rep.thmA_d.witness->reason
                              : std::string(to_string(rep.thmA_d.branch)))
       << "\n";
    const auto& t = rep.thm2;
    os << std::setw(12) << "Thm2" << std::setw(8) << yes(t.holds()) << "f/g monotone " << yes(t.fg_monotone)
       << ", beta2 >= 2 beta1 " << yes(t.beta_ratio_ok) << ", xi "
       << (t.xi ? format_double(*t.xi) : std::string("none")) << ", int gF " << format_double(t.integral_gF)
       << " (" << to_string(t.integral_sign) << ")\n";
}

int cmd_check(const Common& c, const CheckFlags& f, std::ostream& out, std::ostream& err) {
    const auto r = resolve_system(c);
    const System sys(r.spec);
    HypothesesOptions ho;
    ho.integral_upper = pick(f.integral_upper_opt, f.integral_upper, r.file_options.integral_upper);
    const auto rep = check_hypotheses(sys, ho);

    json doc;
    doc["system"] = sys.name();
    doc["domain_d"] = sys.domain();
    doc["all_hold"] = rep.all_hold();
    doc["h1"] = hypothesis_json(rep.h1);
    doc["h2"] = hypothesis_json(rep.h2);
    doc["h3"] = hypothesis_json(rep.h3);
    doc["h4"] = hypothesis_json(rep.h4);
    doc["h4_branch"] = to_string(rep.h4_branch);
    doc["h4_checks"] = {{"f_monotone", monotone_json(rep.h4_f)},
                        {"weighted_monotone", monotone_json(rep.h4_weighted)}};
    doc["thmA_d"] = {{"holds", rep.thmA_d.holds},
                     {"branch", to_string(rep.thmA_d.branch)},
                     {"witness", witness_json(rep.thmA_d.witness)},
                     {"f_check", monotone_json(rep.thmA_d.f_check)},
                     {"f_over_g_check", monotone_json(rep.thmA_d.f_over_g_check)}};
    const auto& t = rep.thm2;
    doc["thm2"] = {{"applicable", t.applicable},
                   {"holds", t.holds()},
                   {"fg_monotone", t.fg_monotone},
                   {"fg_witness", witness_json(t.fg_witness)},
                   {"beta_ratio_ok", t.beta_ratio_ok},
                   {"xi", t.xi ? json(*t.xi) : json(nullptr)},
                   {"xi_ok", t.xi_ok},
                   {"xi_witness", witness_json(t.xi_witness)},
                   {"integral_upper", t.integral_upper},
                   {"integral_gF", t.integral_gF},
                   {"integral_sign", to_string(t.integral_sign)}};
    doc["points"] = rep.points ? points_json(*rep.points) : json(nullptr);
    doc["sampling"] = rep.sampling;
    emit(f.out, out, doc.dump(2) + "\n");
    print_check_table(err, rep);
    return rep.all_hold() ? kOk : kHypothesesFail;
}

BifurcationOptions bifurcation_options(const Common& c, const ScanFlags& s) {
    BifurcationOptions bo;
    bo.cycles = cycle_options(c, s, {});
    bo.cycles.workers = 1;
    bo.workers = std::max(1u, c.workers);
    return bo;
}

struct RegionsFlags {
    std::string family = "glo";
    double c = 1.0;
    std::string a_range = "-0.5,2";
    std::string b_range = "-4,0";
    std::string grid = "20,40";
    bool abort_on_violation = false;
    ScanFlags scan;
    std::string out, svg;
};

void draw_regions_svg(std::ostream& os, const RegionMap& map, Family family, double c) {
    const auto& av = map.a_values;
    const auto& bv = map.b_values;
    const double da = av.size() > 1 ? (av.back() - av.front()) / (av.size() - 1.0) : 1.0;
    const double db = bv.size() > 1 ? (bv.back() - bv.front()) / (bv.size() - 1.0) : 1.0;
    svg::Plot plot(av.front() - 0.5 * da, av.back() + 0.5 * da, bv.front() - 0.5 * db,
                   bv.back() + 0.5 * db);
    const std::map<RegionLabel, std::string> colors = {
        {RegionLabel::I, "#a8dadc"},  {RegionLabel::II, "#f1faee"},      {RegionLabel::III, "#e9c46a"},
        {RegionLabel::H1, "#457b9d"}, {RegionLabel::H2, "#1d3557"},      {RegionLabel::DL_near, "#e76f51"},
        {RegionLabel::Unclassified, "#6c757d"}};
    for (const auto& cell : map.cells) {
        const double w = cell.a == 0.0 ? 0.25 * da : 0.5 * da;
        plot.rect(cell.a - w, cell.b - 0.5 * db, cell.a + w, cell.b + 0.5 * db, colors.at(cell.label));
    }
    // DL estimate: midpoint between the top III cell and the bottom II cell of each a > 0 column.
    std::vector<std::pair<double, double>> dl;
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (!(av[i] > 0.0)) continue;
        const auto begin = map.cells.begin() + static_cast<std::ptrdiff_t>(i * bv.size());
        std::optional<double> last_iii, first_ii;
        for (auto it = begin; it != begin + static_cast<std::ptrdiff_t>(bv.size()); ++it) {
            if (it->label == RegionLabel::III) last_iii = it->b;
            if (it->label == RegionLabel::II && !first_ii) first_ii = it->b;
        }
        if (last_iii && first_ii) dl.emplace_back(av[i], 0.5 * (*last_iii + *first_ii));
    }
    plot.polyline(dl, "#d62828", 2.0);
    std::vector<std::pair<double, double>> lower, upper;
    for (int k = 0; k <= 100; ++k) {
        const double a = std::max(0.0, av.front()) + (av.back() - std::max(0.0, av.front())) * k / 100.0;
        lower.emplace_back(a, -2.5 * std::sqrt(a));
        upper.emplace_back(a, -2.0 * std::sqrt(a));
    }
    plot.polyline(lower, "#000000", 1.0, "5,3");
    plot.polyline(upper, "#000000", 1.0, "2,2");
    for (const auto& [label, color] : colors) plot.legend(to_string(label), color);
    plot.legend("DL", "#d62828");
    plot.axes("a", "b", std::string(to_string(family)) + ", c = " + format_double(c));
    plot.write(os);
}

int cmd_regions(const Common& c, const RegionsFlags& f, std::ostream& out, std::ostream& err) {
    const Family family = parse_family(f.family);
    const auto [a_lo, a_hi] = parse_pair(f.a_range, "a-range");
    const auto [b_lo, b_hi] = parse_pair(f.b_range, "b-range");
    const auto grid = parse_numbers(f.grid, "grid");
    if (grid.size() != 2 || grid[0] != std::floor(grid[0]) || grid[1] != std::floor(grid[1]))
        throw ConfigError("grid", "expected two integers na,nb");
    const int na = static_cast<int>(grid[0]), nb = static_cast<int>(grid[1]);
    if (na < 2 || nb < 2) throw ConfigError("grid", "na and nb must be >= 2");
    if (!(a_lo < a_hi)) throw ConfigError("a-range", "must have lo < hi");
    if (!(b_lo < b_hi)) throw ConfigError("b-range", "must have lo < hi");
    if (family == Family::GLO && f.c < 0.0) throw ConfigError("c", "the glo family needs c >= 0");
    BifurcationOptions bo = bifurcation_options(c, f.scan);
    bo.abort_on_violation = f.abort_on_violation;

    const Cache cache = make_cache(c);
    const std::string key = std::string(kCacheVersion) + "|regions|" + to_string(family) + "|c=" +
                            format_double(f.c) + "|a=" + format_double(a_lo) + "," + format_double(a_hi) +
                            "|b=" + format_double(b_lo) + "," + format_double(b_hi) + "|grid=" +
                            std::to_string(na) + "," + std::to_string(nb) + "|abort=" +
                            (f.abort_on_violation ? "1" : "0") + "|" + options_key(bo.cycles);
    std::map<std::string, std::string> files;
    if (auto hit = cache.get(key)) {
        files = std::move(*hit);
        err << "regions: cache hit " << cache.path(key).string() << "\n";
    } else {
        const RegionMap map = region_map(family, f.c, a_lo, a_hi, b_lo, b_hi, na, nb, bo);
        std::ostringstream csv, viol, plot;
        write_regions_csv(csv, map);
        for (const auto& v : map.violations) viol << v << "\n";
        if (map.aborted) viol << "scan aborted after the first violating column\n";
        draw_regions_svg(plot, map, family, f.c);
        files["csv"] = csv.str();
        files["violations"] = viol.str();
        files["svg"] = plot.str();
        cache.put(key, files);
    }
    emit(f.out, out, files["csv"]);
    if (!f.svg.empty()) emit(f.svg, out, files["svg"]);
    if (!files["violations"].empty()) {
        err << "regions: invariant violations\n" << files["violations"];
        return kInvariantViolation;
    }
    return kOk;
}

struct TraceFlags {
    std::string family = "glo";
    double c = 1.0;
    std::string a_values = "0.5,1,2";
    ScanFlags scan;
    std::string out;
};

int cmd_trace_dl(const Common& c, const TraceFlags& f, std::ostream& out, std::ostream& err) {
    const Family family = parse_family(f.family);
    const auto a_values = parse_numbers(f.a_values, "a");
    if (a_values.empty()) throw ConfigError("a", "at least one value is required");
    for (double a : a_values)
        if (!(a > 0.0)) throw ConfigError("a", "every a must be > 0");
    if (family == Family::GLO && f.c < 0.0) throw ConfigError("c", "the glo family needs c >= 0");
    const BifurcationOptions bo = bifurcation_options(c, f.scan);

    const Cache cache = make_cache(c);
    std::string key = std::string(kCacheVersion) + "|trace-dl|" + to_string(family) + "|c=" +
                      format_double(f.c) + "|a=";
    for (double a : a_values) key += format_double(a) + ",";
    key += "|tighten=" + format_double(bo.tighten) + "|" + options_key(bo.cycles);

    std::map<std::string, std::string> files;
    if (auto hit = cache.get(key)) {
        files = std::move(*hit);
        err << "trace-dl: cache hit " << cache.path(key).string() << "\n";
    } else {
        const DlTrace trace = trace_dl(family, f.c, a_values, bo);
        std::ostringstream csv, viol;
        write_dl_csv(csv, trace);
        for (const auto& p : trace.points)
            if (!p.bounds_ok)
                viol << "a = " << format_double(p.a) << ": phi = " << format_double(p.phi)
                     << " outside (" << format_double(p.lower_bound) << ", "
                     << format_double(p.upper_bound) << ")\n";
        if (!trace.phi_decreasing) viol << "phi is not decreasing in a\n";
        files["csv"] = csv.str();
        files["violations"] = viol.str();
        cache.put(key, files);
    }
    emit(f.out, out, files["csv"]);
    if (!files["violations"].empty()) {
        err << "trace-dl: invariant violations\n" << files["violations"];
        return kInvariantViolation;
    }
    return kOk;
}

struct PortraitFlags {
    int orbits = 6;
    ScanFlags scan;
    std::string out;
};

int cmd_portrait(const Common& c, const PortraitFlags& f, std::ostream& out, std::ostream& err) {
    const auto r = resolve_system(c);
    const System sys(r.spec);
    const CycleOptions opts = cycle_options(c, f.scan, r.file_options);
    if (f.orbits < 0) throw ConfigError("orbits", "must be >= 0");
    const auto cycles = find_cycles(sys, opts);

    std::vector<Trajectory> cycle_trajs;
    Bounds b;
    for (const auto& cy : cycles) {
        cycle_trajs.push_back(full_cycle(sys, cy.y0_star, opts));
        b.add(cycle_trajs.back());
    }
    double y_top = cycles.empty() ? 3.0 * sys.y_scale() : 1.3 * cycles.back().y0_star;
    y_top = std::min(y_top, sys.y_cap());
    std::vector<Trajectory> orbits;
    IntegrationOptions io = opts.integration;
    io.stop_after_events = 6;
    for (int i = 0; i < f.orbits; ++i) {
        const double y0 = y_top * (i + 1.0) / f.orbits;
        orbits.push_back(integrate(sys, 0.0, y0, 200.0, io));
        b.add(orbits.back());
    }
    const double xr = std::max(1e-3, 1.1 * b.x), yr = std::max(1e-3, 1.1 * b.y);
    svg::Plot plot(-xr, xr, -yr, yr);
    draw_phase_frame(plot, sys, xr);
    for (const auto& t : orbits) plot.polyline(orbit_points(t), "#a0a0a0", 0.8);
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        const bool stable = cycles[i].stability == Stability::Stable;
        plot.polyline(orbit_points(cycle_trajs[i]), stable ? "#1d3557" : "#e63946", 2.0,
                      stable ? "" : "6,3");
    }
    plot.legend("stable cycle", "#1d3557");
    plot.legend("unstable cycle", "#e63946");
    plot.legend("orbits", "#a0a0a0");
    plot.axes("x", "y", sys.name());
    std::ostringstream os;
    plot.write(os);
    emit(f.out, out, os.str());
    err << "portrait: " << cycles.size() << " cycle(s)\n";
    return kOk;
}

}  // namespace

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string canonical_spec(const SystemSpec& spec) { return spec_json(spec).dump(); }

SystemSpec parse_config(const std::string& json_text) { return load_config_text(json_text).spec; }

SystemSpec parse_system(const std::string& text) {
    if (text == "hamiltonian-test") return builtin::hamiltonian_test();
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("system", "expected family:params or hamiltonian-test, got '" + text + "'");
    const std::string family = text.substr(0, colon);
    const auto p = parse_numbers(text.substr(colon + 1), "system");
    auto need = [&](std::size_t n) {
        if (p.size() != n)
            throw ConfigError("system", family + " takes " + std::to_string(n) + " parameters, got " +
                                            std::to_string(p.size()));
    };
    if (family == "glo") {
        need(3);
        if (p[2] < 0.0) throw ConfigError("system", "the glo family needs c >= 0 (single equilibrium)");
        return builtin::glo(p[0], p[1], p[2]);
    }
    if (family == "filippov") {
        need(3);
        return builtin::filippov(p[0], p[1], p[2]);
    }
    if (family == "rychkov") {
        need(2);
        return builtin::rychkov(p[0], p[1]);
    }
    if (family == "pls") {
        need(3);
        return builtin::pls(p[0], p[1], p[2]);
    }
    throw ConfigError("system", "unknown family '" + family + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Limit cycles of symmetric Lienard systems with a possibly discontinuous restoring force",
                 "liencycle"};
    app.require_subcommand(1);

    Common common;
    SimulateFlags sim;
    CyclesFlags cyc;
    CheckFlags chk;
    RegionsFlags reg;
    TraceFlags trc;
    PortraitFlags por;

    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and write t,x,y,event CSV");
    add_common(simulate, common, true);
    simulate->add_option("--x0", sim.x0, "initial x")->capture_default_str();
    simulate->add_option("--y0", sim.y0, "initial y")->capture_default_str();
    sim.t_max_opt = simulate->add_option("--t-max", sim.t_max, "final time")->capture_default_str();
    simulate->add_option("--turns", sim.turns, "stop after this many full turns (2 crossings each)");
    simulate->add_option("--out", sim.out, "CSV path (default stdout)");
    simulate->add_option("--svg", sim.svg, "phase portrait SVG path");
    simulate->add_option("--json", sim.json_out, "summary document path");

    auto* cycles = app.add_subcommand("cycles", "find symmetric limit cycles");
    add_common(cycles, common, true);
    add_scan(cycles, cyc.scan);
    cycles->add_option("--out", cyc.out, "report path (default stdout)");
    cycles->add_option("--profile", cyc.profile, "displacement CSV path");

    auto* check = app.add_subcommand("check", "check the hypotheses; exit 0 iff H1-H4 hold");
    add_common(check, common, true);
    chk.integral_upper_opt =
        check->add_option("--integral-upper", chk.integral_upper, "upper limit of the g F integral (default d)");
    check->add_option("--out", chk.out, "report path (default stdout)");

    auto* regions = app.add_subcommand("regions", "classify a grid of the (a, b) plane");
    add_common(regions, common, false);
    add_scan(regions, reg.scan);
    regions->add_option("--family", reg.family, "glo | filippov | rychkov")->capture_default_str();
    regions->add_option("--c", reg.c, "sign-step or linear coefficient")->capture_default_str();
    regions->add_option("--a-range", reg.a_range, "lo,hi")->capture_default_str();
    regions->add_option("--b-range", reg.b_range, "lo,hi")->capture_default_str();
    regions->add_option("--grid", reg.grid, "na,nb")->capture_default_str();
    regions->add_flag("--abort-on-violation", reg.abort_on_violation, "stop after the first bad column");
    regions->add_option("--out", reg.out, "CSV path (default stdout)");
    regions->add_option("--svg", reg.svg, "region map SVG path");

    auto* trace = app.add_subcommand("trace-dl", "locate the double-limit-cycle curve b = phi(a, c)");
    add_common(trace, common, false);
    add_scan(trace, trc.scan);
    trace->add_option("--family", trc.family, "glo | filippov | rychkov")->capture_default_str();
    trace->add_option("--c", trc.c, "sign-step or linear coefficient")->capture_default_str();
    trace->add_option("--a", trc.a_values, "comma-separated a > 0")->capture_default_str();
    trace->add_option("--out", trc.out, "CSV path (default stdout)");

    auto* portrait = app.add_subcommand("portrait", "SVG phase portrait with cycles and sample orbits");
    add_common(portrait, common, true);
    add_scan(portrait, por.scan);
    portrait->add_option("--orbits", por.orbits, "number of sample orbits")->capture_default_str();
    portrait->add_option("--out", por.out, "SVG path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (*simulate) return cmd_simulate(common, sim, out, err);
        if (*cycles) return cmd_cycles(common, cyc, out, err);
        if (*check) return cmd_check(common, chk, out, err);
        if (*regions) return cmd_regions(common, reg, out, err);
        if (*trace) return cmd_trace_dl(common, trc, out, err);
        if (*portrait) return cmd_portrait(common, por, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    }
    return kConfigError;
}

}  // namespace liencycle::cli

#ifndef ENTFORCE_CONFIG_HPP
#define ENTFORCE_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "entforce/couplings.hpp"
#include "entforce/pulse.hpp"

// Experiment configuration: an INI-style document with nested sections and
// explicit units baked into the key names (r_um, tau_f_inv_gamma0, z0_nm)
// so a value can never be interpreted in the wrong unit silently.

namespace entforce {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Sweep axis vocabulary: r (um), tau_f (1/gamma0), theta (rad), n (photons),
// mean_n (photons), z0 (nm). Grid values are given in the axis unit.
struct SweepSpec {
    std::string axis;
    std::vector<double> grid;
};

struct OutputSpec {
    std::string path;            // empty selects stdout
    std::string format = "csv";  // csv | json
};

struct ToleranceSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
};

struct ExperimentConfig {
    std::string scenario = "fig2";
    DipolePairConfig atom;  // Rb D1 defaults, vacuum environment
    PulseSpec pulse;        // Fock n=1, tau_f gamma0 = 0.63, eta = 1/sqrt2
    SweepSpec sweep;
    OutputSpec output;
    ToleranceSpec tolerances;
    std::set<std::string> provided;  // "section.key" entries seen in the document

    bool was_provided(const std::string& section_key) const {
        return provided.count(section_key) > 0;
    }
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "fig2", "fig3a", "fig3b", "fig4", "fig5a", "fig5b",
        "vdw-sweep", "graphene-sweep", "custom"};
    return names;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Strips a recognized unit suffix so "tau_f" still matches
// "tau_f_inv_gamma0" and a wrong-unit key like "r_nm" maps onto "r_um".
inline std::string strip_unit_suffix(const std::string& key) {
    static const std::vector<std::string> suffixes = {
        "_inv_gamma0", "_rad_s", "_per_s", "_rad", "_um", "_nm",
        "_Cm", "_eV", "_K", "_s", "_J", "_N"};
    for (const std::string& suf : suffixes)
        if (key.size() > suf.size() &&
            key.compare(key.size() - suf.size(), suf.size(), suf) == 0)
            return key.substr(0, key.size() - suf.size());
    return key;
}

struct SectionSchema {
    std::string name;
    std::vector<std::string> keys;
};

inline const std::vector<SectionSchema>& config_schema() {
    static const std::vector<SectionSchema> schema = {
        {"run", {"scenario"}},
        {"atom", {"omega0_rad_s", "d0_Cm", "r_um", "theta_rad", "polarization"}},
        {"graphene",
         {"enabled", "fermi_energy_eV", "relaxation_time_s", "temperature_K",
          "substrate_epsilon", "z0_nm"}},
        {"pulse",
         {"kind", "photon_count", "mean_photon_number", "tau_f_inv_gamma0",
          "carrier_rad_s", "t1_inv_gamma0", "t2_inv_gamma0", "eta1", "eta2"}},
        {"sweep", {"axis", "grid", "grid_min", "grid_max", "grid_points"}},
        {"output", {"path", "format"}},
        {"tolerances", {"rel_tol", "abs_tol"}}};
    return schema;
}

inline std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

inline const SectionSchema& section_schema(const std::string& name) {
    for (const SectionSchema& s : config_schema())
        if (s.name == name) return s;
    std::vector<std::string> names;
    for (const SectionSchema& s : config_schema()) names.push_back(s.name);
    throw ConfigError("unknown section [" + name + "]; valid sections: " +
                      join(names, ", "));
}

// Unknown keys first test for a unit problem (same stem, different or
// missing suffix), then fall back to a closest-match suggestion.
[[noreturn]] inline void fail_unknown_key(const std::string& key,
                                          const SectionSchema& section) {
    const std::string stem = strip_unit_suffix(key);
    for (const std::string& cand : section.keys)
        if (cand != key && strip_unit_suffix(cand) == stem)
            throw ConfigError("key '" + key + "' in [" + section.name +
                              "] does not carry the expected unit; use '" + cand + "'");

    std::size_t best = std::string::npos;
    std::string suggestion;
    for (const std::string& cand : section.keys) {
        const std::size_t d = std::min(levenshtein(key, cand),
                                       levenshtein(key, strip_unit_suffix(cand)));
        if (d < best) {
            best = d;
            suggestion = cand;
        }
    }
    std::string msg = "unknown key '" + key + "' in [" + section.name + "]";
    if (best <= std::max<std::size_t>(2, key.size() / 2))
        msg += "; did you mean '" + suggestion + "'?";
    msg += " valid keys: " + join(section.keys, ", ");
    throw ConfigError(msg);
}

inline double parse_double(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
        throw ConfigError("value for '" + key + "' is not a finite number: '" + v + "'");
    return x;
}

inline int parse_int(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || x < -1000000000L || x > 1000000000L)
        throw ConfigError("value for '" + key + "' is not an integer: '" + v + "'");
    return static_cast<int>(x);
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("value for '" + key + "' is not a boolean: '" + v + "'");
}

inline std::string parse_choice(const std::string& value, const std::string& key,
                                const std::vector<std::string>& choices) {
    const std::string v = trim(value);
    for (const std::string& c : choices)
        if (v == c) return v;
    throw ConfigError("value for '" + key + "' must be one of {" + join(choices, ", ") +
                      "}, got '" + v + "'");
}

inline std::vector<double> parse_grid_list(const std::string& value, const std::string& key) {
    std::vector<double> grid;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        grid.push_back(parse_double(item, key));
    if (grid.empty())
        throw ConfigError("value for '" + key + "' must be a comma-separated list");
    return grid;
}

// Raw values collected during the line scan; unit conversions that depend
// on other keys (pulse lengths scale with 1/gamma0 of the final atom) are
// applied afterwards.
struct RawConfig {
    double tau_f_gamma0 = 0.63;
    double t1_gamma0 = 0.0;
    double t2_gamma0 = 0.0;
    bool graphene_enabled = false;
    GrapheneModel graphene{};
    bool have_grid_list = false;
    bool have_grid_range = false;
    double grid_min = 0.0, grid_max = 0.0;
    int grid_points = 0;
};

inline void apply_key(ExperimentConfig& cfg, RawConfig& raw, const std::string& section,
                      const std::string& key, const std::string& value) {
    const SectionSchema& schema = section_schema(section);
    if (std::find(schema.keys.begin(), schema.keys.end(), key) == schema.keys.end())
        fail_unknown_key(key, schema);

    if (section == "run") {
        cfg.scenario = parse_choice(value, key, scenario_names());
    } else if (section == "atom") {
        if (key == "omega0_rad_s") {
            cfg.atom.omega0 = parse_double(value, key);
            if (!(cfg.atom.omega0 > 0.0))
                throw ConfigError("'omega0_rad_s' must be positive");
        } else if (key == "d0_Cm") {
            cfg.atom.d0 = parse_double(value, key);
            if (!(cfg.atom.d0 > 0.0)) throw ConfigError("'d0_Cm' must be positive");
        } else if (key == "r_um") {
            const double r = parse_double(value, key);
            if (!(r > 0.0)) throw ConfigError("'r_um' must be positive");
            cfg.atom.geometry.r = r * 1e-6;
        } else if (key == "theta_rad") {
            cfg.atom.theta = parse_double(value, key);
            if (!(cfg.atom.theta >= 0.0) || !(cfg.atom.theta <= M_PI / 2.0 + 1e-12))
                throw ConfigError("'theta_rad' must lie in [0, pi/2]");
        } else {  // polarization
            const std::string v =
                parse_choice(value, key, {"par", "perp", "parallel", "perpendicular"});
            cfg.atom.theta = (v == "par" || v == "parallel") ? 0.0 : M_PI / 2.0;
        }
    } else if (section == "graphene") {
        if (key == "enabled") {
            raw.graphene_enabled = parse_bool(value, key);
        } else if (key == "fermi_energy_eV") {
            raw.graphene.fermi_energy = parse_double(value, key);
            if (!(raw.graphene.fermi_energy > 0.0))
                throw ConfigError("'fermi_energy_eV' must be positive");
        } else if (key == "relaxation_time_s") {
            raw.graphene.relaxation_time = parse_double(value, key);
            if (!(raw.graphene.relaxation_time > 0.0))
                throw ConfigError("'relaxation_time_s' must be positive");
        } else if (key == "temperature_K") {
            raw.graphene.temperature = parse_double(value, key);
            if (raw.graphene.temperature < 0.0)
                throw ConfigError("'temperature_K' must be nonnegative");
        } else if (key == "substrate_epsilon") {
            const double eps = parse_double(value, key);
            if (!(eps >= 1.0)) throw ConfigError("'substrate_epsilon' must be >= 1");
            raw.graphene.substrate_permittivity = cplx{eps, 0.0};
        } else {  // z0_nm
            const double z0 = parse_double(value, key);
            if (!(z0 > 0.0)) throw ConfigError("'z0_nm' must be positive");
            cfg.atom.geometry.z0 = z0 * 1e-9;
        }
    } else if (section == "pulse") {
        if (key == "kind") {
            const std::string v = parse_choice(value, key, {"fock", "coherent"});
            cfg.pulse.kind = (v == "fock") ? PulseKind::fock : PulseKind::coherent;
        } else if (key == "photon_count") {
            cfg.pulse.photon_count = parse_int(value, key);
            if (cfg.pulse.photon_count < 1)
                throw ConfigError("'photon_count' must be >= 1");
        } else if (key == "mean_photon_number") {
            cfg.pulse.mean_photon_number = parse_double(value, key);
            if (!(cfg.pulse.mean_photon_number > 0.0))
                throw ConfigError("'mean_photon_number' must be positive");
        } else if (key == "tau_f_inv_gamma0") {
            raw.tau_f_gamma0 = parse_double(value, key);
            if (!(raw.tau_f_gamma0 > 0.0))
                throw ConfigError("'tau_f_inv_gamma0' must be positive");
        } else if (key == "carrier_rad_s") {
            cfg.pulse.carrier = parse_double(value, key);
            if (cfg.pulse.carrier < 0.0)
                throw ConfigError("'carrier_rad_s' must be nonnegative");
        } else if (key == "t1_inv_gamma0") {
            raw.t1_gamma0 = parse_double(value, key);
        } else if (key == "t2_inv_gamma0") {
            raw.t2_gamma0 = parse_double(value, key);
        } else if (key == "eta1") {
            cfg.pulse.eta1 = parse_double(value, key);
        } else {  // eta2
            cfg.pulse.eta2 = parse_double(value, key);
        }
    } else if (section == "sweep") {
        if (key == "axis") {
            cfg.sweep.axis =
                parse_choice(value, key, {"r", "tau_f", "theta", "n", "mean_n", "z0"});
        } else if (key == "grid") {
            cfg.sweep.grid = parse_grid_list(value, key);
            raw.have_grid_list = true;
        } else if (key == "grid_min") {
            raw.grid_min = parse_double(value, key);
            raw.have_grid_range = true;
        } else if (key == "grid_max") {
            raw.grid_max = parse_double(value, key);
            raw.have_grid_range = true;
        } else {  // grid_points
            raw.grid_points = parse_int(value, key);
            raw.have_grid_range = true;
        }
    } else if (section == "output") {
        if (key == "path")
            cfg.output.path = trim(value);
        else  // format
            cfg.output.format = parse_choice(value, key, {"csv", "json"});
    } else {  // tolerances
        if (key == "rel_tol") {
            cfg.tolerances.rel_tol = parse_double(value, key);
            if (!(cfg.tolerances.rel_tol > 0.0) || cfg.tolerances.rel_tol >= 1.0)
                throw ConfigError("'rel_tol' must lie in (0, 1)");
        } else {  // abs_tol
            cfg.tolerances.abs_tol = parse_double(value, key);
            if (!(cfg.tolerances.abs_tol > 0.0))
                throw ConfigError("'abs_tol' must be positive");
        }
    }
    cfg.provided.insert(section + "." + key);
}

// Axes a scenario accepts from the [sweep] section. fig3a/fig3b/fig4 run
// fixed grids; fig5b accepts both its distance scan and the subplot's
// polarization-angle scan.
inline std::vector<std::string> allowed_axes(const std::string& scenario) {
    if (scenario == "fig2" || scenario == "fig5a" || scenario == "vdw-sweep")
        return {"r"};
    if (scenario == "fig5b") return {"r", "theta"};
    if (scenario == "graphene-sweep") return {"z0"};
    if (scenario == "custom") return {"tau_f"};
    if (scenario == "fig4") return {"n", "mean_n"};
    return {};
}

inline void finalize_sweep(ExperimentConfig& cfg, const RawConfig& raw) {
    if (raw.have_grid_list && raw.have_grid_range)
        throw ConfigError("give either 'grid' or 'grid_min/grid_max/grid_points', not both");
    if (raw.have_grid_range) {
        if (raw.grid_points < 2)
            throw ConfigError("'grid_points' must be >= 2");
        if (!(raw.grid_max > raw.grid_min))
            throw ConfigError("'grid_max' must exceed 'grid_min'");
        for (int i = 0; i < raw.grid_points; ++i)
            cfg.sweep.grid.push_back(raw.grid_min + (raw.grid_max - raw.grid_min) * i /
                                                        (raw.grid_points - 1));
    }
    const bool has_axis = !cfg.sweep.axis.empty();
    const bool has_grid = !cfg.sweep.grid.empty();
    if (has_axis != has_grid)
        throw ConfigError("[sweep] needs both 'axis' and a grid, or neither");
    if (!has_axis) return;

    const std::vector<std::string> allowed = allowed_axes(cfg.scenario);
    if (std::find(allowed.begin(), allowed.end(), cfg.sweep.axis) == allowed.end()) {
        std::string msg = "sweep axis '" + cfg.sweep.axis + "' is not valid for scenario '" +
                          cfg.scenario + "'";
        msg += allowed.empty() ? " (this scenario runs a fixed grid)"
                               : "; expected " + join(allowed, " or ");
        throw ConfigError(msg);
    }
    for (std::size_t i = 1; i < cfg.sweep.grid.size(); ++i)
        if (!(cfg.sweep.grid[i] > cfg.sweep.grid[i - 1]))
            throw ConfigError("sweep grid must be strictly increasing");
    const std::string& axis = cfg.sweep.axis;
    for (double v : cfg.sweep.grid) {
        if ((axis == "r" || axis == "tau_f" || axis == "z0" || axis == "mean_n") && !(v > 0.0))
            throw ConfigError("sweep grid for axis '" + axis + "' must be positive");
        if (axis == "theta" && (v < 0.0 || v > M_PI / 2.0 + 1e-12))
            throw ConfigError("sweep grid for axis 'theta' must lie in [0, pi/2]");
        if (axis == "n" && (v < 1.0 || std::abs(v - std::round(v)) > 1e-9))
            throw ConfigError("sweep grid for axis 'n' must hold integers >= 1");
    }
}

} // namespace detail

// Parses the INI-style document. Empty text yields the full default
// configuration (Rb D1 pair at r = 1.2 um, perpendicular polarization,
// Fock n=1 pulse with tau_f gamma0 = 0.63, eta1 = eta2 = 1/sqrt2, vacuum).
// scenario_override, when non-empty, replaces the document's scenario before
// cross-field validation runs.
inline ExperimentConfig parse_config(const std::string& text,
                                     const std::string& scenario_override = "") {
    ExperimentConfig cfg;
    cfg.atom.omega0 = 2.0 * M_PI * 3.77e14;
    cfg.atom.d0 = 2.54e-29;
    cfg.atom.theta = M_PI / 2.0;
    cfg.atom.geometry.r = 1.2e-6;
    cfg.atom.geometry.z0 = 10e-9;
    cfg.pulse.kind = PulseKind::fock;
    cfg.pulse.photon_count = 1;
    cfg.pulse.eta1 = std::sqrt(0.5);
    cfg.pulse.eta2 = std::sqrt(0.5);

    detail::RawConfig raw;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip inline comments introduced by whitespace + '#' or ';'
        for (std::size_t i = 0; i < line.size(); ++i)
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.resize(i);
                break;
            }
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        try {
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("malformed section header '" + t + "'");
                section = detail::trim(t.substr(1, t.size() - 2));
                detail::section_schema(section);
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected 'key = value', got '" + t + "'");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError("missing key before '='");
            if (value.empty()) throw ConfigError("empty value for '" + key + "'");
            if (section.empty())
                throw ConfigError("key '" + key + "' appears before any [section]");
            detail::apply_key(cfg, raw, section, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }

    if (!scenario_override.empty()) {
        bool known = false;
        for (const std::string& name : scenario_names())
            if (name == scenario_override) known = true;
        if (!known)
            throw ConfigError("unknown scenario '" + scenario_override + "'; valid: " +
                              detail::join(scenario_names(), ", "));
        cfg.scenario = scenario_override;
    }

    if (raw.graphene_enabled) cfg.atom.graphene = raw.graphene;

    const double gamma0 = spontaneous_decay_rate(cfg.atom.omega0, cfg.atom.d0);
    cfg.pulse.tau_f = raw.tau_f_gamma0 / gamma0;
    cfg.pulse.t1 = raw.t1_gamma0 / gamma0;
    cfg.pulse.t2 = raw.t2_gamma0 / gamma0;
    try {
        validate_pulse(cfg.pulse);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid pulse: ") + e.what());
    }
    detail::finalize_sweep(cfg, raw);
    return cfg;
}

} // namespace entforce

#endif

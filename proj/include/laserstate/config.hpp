// Run configuration: a JSON document naming one scenario, its laser and
// scenario parameters, tolerances, a seed and an optional sweep of
// overrides. Parsing problems (syntax, missing or unknown keys, wrong types)
// raise ConfigError; out-of-range values are caught later by validate().

#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include "laserstate/scenarios.hpp"

namespace laserstate::config {

inline constexpr int schema_version = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

enum class Scenario { phase_locking, atom_interference, squeezing, tmss_entanglement, teleportation, identities };

struct ScenarioInfo {
    Scenario kind;
    const char* name;
    const char* tag;
    const char* claim;
};

/// Stable order used by `list`.
inline const std::vector<ScenarioInfo>& scenario_table() {
    static const std::vector<ScenarioInfo> t{
        {Scenario::phase_locking, "phase_locking", "[relative-phase]",
         "two independent lasers acquire a random relative phase that later measurements reproduce"},
        {Scenario::atom_interference, "atom_interference", "[atom-pulses]",
         "two pi/2 pulses from one laser excite the atom with certainty; independent lasers give 1/2"},
        {Scenario::squeezing, "squeezing", "[squeezed-light]",
         "phase-averaged squeezed light is not squeezed; a homodyne referenced to the beam recovers it"},
        {Scenario::tmss_entanglement, "tmss_entanglement", "[entanglement]",
         "phase-averaged two-mode squeezing is separable; reference light from the beam restores entanglement"},
        {Scenario::teleportation, "teleportation", "[teleportation]",
         "teleportation fidelity does not depend on the laser phase when the input shares the reference"},
        {Scenario::identities, "identities", "[phase-ensemble]",
         "phase-averaged coherent states equal the Poisson number mixture; spatial and temporal splitting agree"},
    };
    return t;
}

inline const ScenarioInfo& scenario_info(Scenario s) {
    for (const auto& i : scenario_table())
        if (i.kind == s) return i;
    throw ConfigError("unknown scenario");
}

using ScenarioConfig = std::variant<scenarios::PhaseLockingConfig, scenarios::AtomInterferenceConfig,
                                    scenarios::SqueezingConfig, scenarios::TmssEntanglementConfig,
                                    scenarios::TeleportationConfig, scenarios::IdentitiesConfig>;

struct RunVariant {
    std::string label;  // empty for an unswept run
    ScenarioConfig config;
};

struct RunConfig {
    Scenario scenario = Scenario::identities;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> threads;
    std::vector<RunVariant> variants;
};

// --- Field binding ----------------------------------------------------------------

namespace detail {

/// Named setters for one JSON object; unknown keys are rejected.
class Fields {
public:
    explicit Fields(std::string section) : section_(std::move(section)) {}

    Fields& real(const std::string& key, double& target) {
        setters_[key] = [key, &target](const Fields& self, const json& v) {
            if (!v.is_number()) self.fail(key, "a number");
            target = v.get<double>();
        };
        return *this;
    }

    Fields& count(const std::string& key, std::size_t& target) {
        setters_[key] = [key, &target](const Fields& self, const json& v) { target = self.as_count(key, v); };
        return *this;
    }

    Fields& reals(const std::string& key, std::vector<double>& target) {
        setters_[key] = [key, &target](const Fields& self, const json& v) {
            target.clear();
            for (const auto& e : as_list(v)) {
                if (!e.is_number()) self.fail(key, "a number or a list of numbers");
                target.push_back(e.get<double>());
            }
        };
        return *this;
    }

    Fields& counts(const std::string& key, std::vector<std::size_t>& target) {
        setters_[key] = [key, &target](const Fields& self, const json& v) {
            target.clear();
            for (const auto& e : as_list(v)) target.push_back(self.as_count(key, e));
        };
        return *this;
    }

    template <class E>
    Fields& choices(const std::string& key, std::vector<E>& target, std::vector<std::pair<std::string, E>> names) {
        setters_[key] = [key, &target, names](const Fields& self, const json& v) {
            target.clear();
            for (const auto& e : as_list(v)) {
                if (!e.is_string()) self.fail(key, "a string or a list of strings");
                auto it = std::find_if(names.begin(), names.end(), [&](const auto& p) { return p.first == e.get<std::string>(); });
                if (it == names.end()) {
                    std::string allowed;
                    for (const auto& p : names) allowed += (allowed.empty() ? "" : ", ") + p.first;
                    throw ConfigError("key '" + self.path(key) + "': unknown value '" + e.get<std::string>() + "' (allowed: " +
                                      allowed + ")");
                }
                target.push_back(it->second);
            }
        };
        return *this;
    }

    Fields& object(const std::string& key, std::function<void(const json&)> apply) {
        setters_[key] = [key, apply](const Fields& self, const json& v) {
            if (!v.is_object()) self.fail(key, "an object");
            apply(v);
        };
        return *this;
    }

    void apply(const json& obj) const {
        if (!obj.is_object()) throw ConfigError("key '" + section_ + "' must be an object");
        for (const auto& [k, v] : obj.items()) {
            auto it = setters_.find(k);
            if (it == setters_.end()) throw ConfigError("unknown key '" + path(k) + "'");
            it->second(*this, v);
        }
    }

private:
    std::string path(const std::string& key) const { return section_.empty() ? key : section_ + "." + key; }

    [[noreturn]] void fail(const std::string& key, const char* what) const {
        throw ConfigError("key '" + path(key) + "' must be " + what);
    }

    std::size_t as_count(const std::string& key, const json& v) const {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            fail(key, "a non-negative integer");
        return v.get<std::size_t>();
    }

    static std::vector<json> as_list(const json& v) {
        if (v.is_array()) return std::vector<json>(v.begin(), v.end());
        return {v};
    }

    std::string section_;
    std::map<std::string, std::function<void(const Fields&, const json&)>> setters_;
};

inline Fields laser_fields(const std::string& section, laser::LaserParams& p) {
    Fields f(section);
    f.real("alpha_mag", p.alpha_mag)
        .real("kappa", p.kappa)
        .real("T", p.T)
        .real("D", p.D)
        .count("n_packets", p.n_packets)
        .real("z0_over_c", p.z0_over_c)
        .real("omega0", p.omega0)
        .real("cavity_roundtrip", p.cavity_roundtrip);
    return f;
}

struct Sections {
    Fields params{"params"};
    Fields tolerances{"tolerances"};
};

inline void bind(scenarios::PhaseLockingConfig& c, Sections& s) {
    s.params.count("n_runs", c.n_runs)
        .count("n_repeats", c.n_repeats)
        .count("grid_size", c.grid_size)
        .count("histogram_bins", c.histogram_bins)
        .real("diffusion_D", c.diffusion_D)
        .count("decay_lags", c.decay_lags)
        .count("decay_runs", c.decay_runs)
        .count("batches", c.batches)
        .object("laser_b", [&c](const json& v) { laser_fields("params.laser_b", c.laser_b).apply(v); });
    s.tolerances.real("chi2_p_min", c.chi2_p_min).real("n_se", c.n_se);
}

inline void bind(scenarios::AtomInterferenceConfig& c, Sections& s) {
    s.params.count("n_samples", c.n_samples)
        .choices<scenarios::PulseSource>("second_pulse_source", c.sources,
                                         {{"same_laser", scenarios::PulseSource::same_laser},
                                          {"independent_laser", scenarios::PulseSource::independent_laser}});
    s.tolerances.real("exact", c.tolerance);
}

inline void bind(scenarios::SqueezingConfig& c, Sections& s) {
    s.params.real("r", c.r)
        .count("n_squeezed", c.n_squeezed)
        .count("cutoff", c.cutoff)
        .count("grid_size", c.grid_size)
        .count("n_angles", c.n_angles)
        .count("n_samples", c.n_samples)
        .count("phase_grid", c.phase_grid);
    s.tolerances.real("offdiag", c.offdiag_tol).real("variance", c.variance_tol).real("spread", c.spread_tol).real("n_se", c.n_se);
}

inline void bind(scenarios::TmssEntanglementConfig& c, Sections& s) {
    s.params.real("r", c.r)
        .count("cutoff", c.cutoff)
        .count("grid_size", c.grid_size)
        .reals("alpha_ref", c.alpha_ref)
        .count("n_samples", c.n_samples)
        .count("posterior_grid", c.posterior_grid)
        .real("diffusion_D", c.diffusion_D)
        .real("separation_alpha_ref", c.separation_alpha_ref)
        .counts("separations", c.separations);
    s.tolerances.real("negativity", c.negativity_tol).real("fraction_of_ideal", c.fraction_of_ideal).real("n_se", c.n_se);
}

inline void bind(scenarios::TeleportationConfig& c, Sections& s) {
    s.params.reals("r", c.r)
        .real("input_mag", c.input_mag)
        .real("input_phase", c.input_phase)
        .choices<scenarios::ReferenceMode>("reference", c.references,
                                           {{"shared", scenarios::ReferenceMode::shared},
                                            {"independent", scenarios::ReferenceMode::independent}})
        .count("grid_samples", c.grid_samples)
        .count("n_samples", c.n_samples);
    s.tolerances.real("spread", c.spread_tol).real("oracle", c.oracle_tol).real("n_se", c.n_se);
}

inline void bind(scenarios::IdentitiesConfig& c, Sections& s) {
    s.params.real("alpha", c.alpha)
        .count("cutoff", c.cutoff)
        .count("grid_size", c.grid_size)
        .counts("split_ways", c.split_ways)
        .count("split_samples", c.split_samples);
    s.tolerances.real("trace_distance", c.trace_tol).real("number_diagonal", c.diagonal_tol).real("amplitude", c.amplitude_tol);
}

inline laser::LaserParams& primary_laser(ScenarioConfig& c) {
    return std::visit(
        [](auto& cfg) -> laser::LaserParams& {
            if constexpr (std::is_same_v<std::decay_t<decltype(cfg)>, scenarios::PhaseLockingConfig>)
                return cfg.laser_a;
            else
                return cfg.laser;
        },
        c);
}

inline ScenarioConfig default_config(Scenario s) {
    switch (s) {
        case Scenario::phase_locking: return scenarios::PhaseLockingConfig{};
        case Scenario::atom_interference: return scenarios::AtomInterferenceConfig{};
        case Scenario::squeezing: return scenarios::SqueezingConfig{};
        case Scenario::tmss_entanglement: return scenarios::TmssEntanglementConfig{};
        case Scenario::teleportation: return scenarios::TeleportationConfig{};
        case Scenario::identities: return scenarios::IdentitiesConfig{};
    }
    throw ConfigError("unknown scenario");
}

/// Applies the "laser", "params" and "tolerances" sections of `doc` on top of `cfg`.
inline void apply_sections(ScenarioConfig& cfg, const json& doc) {
    if (doc.contains("laser")) laser_fields("laser", primary_laser(cfg)).apply(doc.at("laser"));
    std::visit(
        [&](auto& c) {
            Sections s;
            bind(c, s);
            if (doc.contains("params")) s.params.apply(doc.at("params"));
            if (doc.contains("tolerances")) s.tolerances.apply(doc.at("tolerances"));
        },
        cfg);
}

inline std::string require_string(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
    if (!doc.at(key).is_string()) throw ConfigError(std::string("key '") + key + "' must be a string");
    return doc.at(key).get<std::string>();
}

}  // namespace detail

inline Scenario scenario_from_name(const std::string& name) {
    for (const auto& i : scenario_table())
        if (name == i.name) return i.kind;
    throw ConfigError("key 'scenario': unknown scenario '" + name + "'");
}

/// Parses a config document. Throws ConfigError on any structural problem.
inline RunConfig parse(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> top{"schema_version", "scenario", "seed", "output_dir", "threads",
                                           "laser", "params", "tolerances", "sweep"};
    for (const auto& [k, v] : doc.items())
        if (!top.count(k)) throw ConfigError("unknown key '" + k + "'");
    if (!doc.contains("schema_version")) throw ConfigError("missing required key 'schema_version'");
    if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != schema_version)
        throw ConfigError("key 'schema_version' must be " + std::to_string(schema_version));

    RunConfig rc;
    rc.scenario = scenario_from_name(detail::require_string(doc, "scenario"));
    if (!doc.contains("seed")) throw ConfigError("missing required key 'seed'");
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("key 'seed' must be a non-negative 64-bit integer");
    rc.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("output_dir")) rc.output_dir = detail::require_string(doc, "output_dir");
    if (doc.contains("threads")) {
        if (!doc.at("threads").is_number_unsigned()) throw ConfigError("key 'threads' must be a non-negative integer");
        rc.threads = doc.at("threads").get<std::size_t>();
    }

    ScenarioConfig base = detail::default_config(rc.scenario);
    detail::apply_sections(base, doc);
    if (!doc.contains("sweep")) {
        rc.variants.push_back({"", base});
        return rc;
    }
    const json& sweep = doc.at("sweep");
    if (!sweep.is_array() || sweep.empty()) throw ConfigError("key 'sweep' must be a non-empty list of overrides");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const json& o = sweep[i];
        const std::string where = "sweep[" + std::to_string(i) + "]";
        if (!o.is_object()) throw ConfigError("key '" + where + "' must be an object");
        for (const auto& [k, v] : o.items())
            if (k != "label" && k != "laser" && k != "params" && k != "tolerances")
                throw ConfigError("unknown key '" + where + "." + k + "'");
        std::string label = "sweep" + std::to_string(i);
        if (o.contains("label")) {
            if (!o.at("label").is_string() || o.at("label").get<std::string>().empty())
                throw ConfigError("key '" + where + ".label' must be a non-empty string");
            label = o.at("label").get<std::string>();
            if (label.find_first_of("/\\") != std::string::npos)
                throw ConfigError("key '" + where + ".label' must not contain path separators");
        }
        if (!labels.insert(label).second) throw ConfigError("key '" + where + ".label': duplicate label '" + label + "'");
        ScenarioConfig v = base;
        try {
            detail::apply_sections(v, o);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
        rc.variants.push_back({label, std::move(v)});
    }
    return rc;
}

inline RunConfig parse_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse(doc);
}

inline RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

/// Range checks for every variant; throws laserstate::Error.
inline void validate(const RunConfig& rc) {
    for (const auto& v : rc.variants) {
        try {
            std::visit([](const auto& c) { c.validate(); }, v.config);
        } catch (const Error& e) {
            if (v.label.empty()) throw;
            throw DomainError(v.label + ": " + e.what());
        }
    }
}

inline scenarios::ScenarioResult run(const ScenarioConfig& cfg, const Rng& rng, std::size_t threads) {
    return std::visit(
        [&](const auto& c) -> scenarios::ScenarioResult {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, scenarios::PhaseLockingConfig>) return scenarios::phase_locking(c, rng, threads);
            else if constexpr (std::is_same_v<C, scenarios::AtomInterferenceConfig>) return scenarios::atom_interference(c, rng, threads);
            else if constexpr (std::is_same_v<C, scenarios::SqueezingConfig>) return scenarios::squeezing(c, rng, threads);
            else if constexpr (std::is_same_v<C, scenarios::TmssEntanglementConfig>) return scenarios::tmss_entanglement(c, rng, threads);
            else if constexpr (std::is_same_v<C, scenarios::TeleportationConfig>) return scenarios::teleportation(c, rng, threads);
            else return scenarios::identities(c, rng, threads);
        },
        cfg);
}

inline std::string output_stem(Scenario s, std::uint64_t seed, const std::string& label) {
    std::string stem = std::string(scenario_info(s).name) + "-" + std::to_string(seed);
    return label.empty() ? stem : stem + "-" + label;
}

}  // namespace laserstate::config

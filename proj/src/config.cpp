#include "formstab/config.hpp"

#include "formstab/errors.hpp"
#include "formstab/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace formstab {

namespace pt = boost::property_tree;

namespace {

using Schema = std::map<std::string, std::set<std::string>>;

class Reader {
public:
    Reader(const std::string& text, std::string source, const Schema& schema) : source_(std::move(source)) {
        std::istringstream in(text);
        try {
            pt::read_ini(in, tree_);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(source_ + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        for (const auto& [section, body] : tree_) {
            const auto it = schema.find(section);
            if (it == schema.end()) {
                if (body.empty()) throw ConfigError(source_ + ": key '" + section + "' outside any section");
                throw ConfigError(source_ + ": unknown section [" + section + "]");
            }
            for (const auto& [key, value] : body)
                if (!it->second.count(key)) throw ConfigError(source_ + ": [" + section + "] unknown key '" + key + "'");
        }
    }

    bool has(const std::string& section, const std::string& key) const {
        return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(section + "/" + key, '/')));
    }

    std::string raw(const std::string& section, const std::string& key) const {
        return tree_.get<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
    }

    template <class T>
    T get(const std::string& section, const std::string& key, T fallback) {
        T value = fallback;
        if (has(section, key)) {
            const std::string text = raw(section, key);
            std::istringstream in(text);
            if constexpr (std::is_same_v<T, bool>) {
                if (text == "true" || text == "1" || text == "yes" || text == "on") value = true;
                else if (text == "false" || text == "0" || text == "no" || text == "off") value = false;
                else fail(section, key, "expected a boolean, got '" + text + "'");
            } else if constexpr (std::is_same_v<T, std::string>) {
                value = text;
            } else {
                in >> value;
                if (!in || !(in >> std::ws).eof()) fail(section, key, "cannot parse '" + text + "'");
            }
        }
        std::ostringstream out;
        out.precision(17);
        out << std::boolalpha << value;
        resolved[section + "." + key] = out.str();
        return value;
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& why) const {
        throw ConfigError(source_ + ": [" + section + "] " + key + ": " + why);
    }

    std::map<std::string, std::string> resolved;

private:
    std::string source_;
    pt::ptree tree_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PerturbationPreset parse_perturbation(const std::string& s, Reader& r) {
    if (s == "none") return PerturbationPreset::none;
    if (s == "leader_lateral") return PerturbationPreset::leader_lateral;
    if (s == "all_lateral") return PerturbationPreset::all_lateral;
    r.fail("formation", "perturbation", "expected none, leader_lateral or all_lateral, got '" + s + "'");
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
    static const Schema schema{
        {"formation",
         {"n_aircraft", "delta_x_m", "delta_y_m", "delta_z_m", "perturbation", "perturbation_m",
          "perturbation_span_frac", "wake_enabled", "wing_stations", "tail_arm_m", "model"}},
        {"controller", {"type", "headway_s"}},
        {"turbulence", {"intensity_frac", "length_scale_m", "seed"}},
        {"integration", {"duration_s", "dt_s"}},
        {"output", {"stride", "transient_skip_s", "energy_window_s"}}};
    Reader r(text, source, schema);
    ScenarioConfig cfg;
    auto& sc = cfg.scenario;

    cfg.model_spec = r.get<std::string>("formation", "model", "builtin");
    const BuiltinModel ac = load_model(cfg.model_spec);

    sc.n_aircraft = r.get("formation", "n_aircraft", 1);
    if (r.has("formation", "delta_x_m") || r.has("formation", "delta_y_m") || r.has("formation", "delta_z_m")) {
        const Vec3 opt = optimal_offset(ac.params);
        sc.delta_ref = Vec3(r.get("formation", "delta_x_m", opt.x()), r.get("formation", "delta_y_m", opt.y()),
                            r.get("formation", "delta_z_m", opt.z()));
    }
    sc.perturbation = parse_perturbation(r.get<std::string>("formation", "perturbation", "none"), r);
    if (r.has("formation", "perturbation_m") && r.has("formation", "perturbation_span_frac"))
        r.fail("formation", "perturbation_m", "give either perturbation_m or perturbation_span_frac, not both");
    if (r.has("formation", "perturbation_m"))
        sc.perturbation_m = r.get("formation", "perturbation_m", 0.0);
    else
        sc.perturbation_m = r.get("formation", "perturbation_span_frac", 0.2) * ac.params.wingspan;
    sc.wake_enabled = r.get("formation", "wake_enabled", true);
    sc.wing_stations = r.get("formation", "wing_stations", 25);
    sc.tail_arm = r.get("formation", "tail_arm_m", 18.0);

    sc.controller_name = r.get<std::string>("controller", "type", "lqr");
    try {
        sc.controller = load_controller(sc.controller_name);
    } catch (const ConfigError& e) {
        r.fail("controller", "type", e.what());
    }
    sc.headway = r.get("controller", "headway_s", 0.0);

    sc.turbulence_intensity = r.get("turbulence", "intensity_frac", 0.0);
    sc.turbulence_length_scale = r.get("turbulence", "length_scale_m", 762.0);
    sc.seed = r.get<std::uint64_t>("turbulence", "seed", 1);

    sc.duration = r.get("integration", "duration_s", 10.0);
    sc.dt = r.get("integration", "dt_s", 0.01);

    cfg.output_stride = r.get("output", "stride", 10);
    cfg.transient_skip = r.get("output", "transient_skip_s", 10.0);
    cfg.energy_window = r.get("output", "energy_window_s", 30.0);
    if (cfg.output_stride < 1) r.fail("output", "stride", "must be >= 1");
    if (cfg.transient_skip < 0) r.fail("output", "transient_skip_s", "must be >= 0");
    if (cfg.energy_window <= 0) r.fail("output", "energy_window_s", "must be > 0");

    try {
        sc.validate();
    } catch (const Error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    cfg.resolved = std::move(r.resolved);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_file(path), path); }

ProblemConfig parse_problem(const std::string& text, const std::string& source) {
    static const Schema schema{
        {"problem", {"controller", "model", "kp_scale", "kd_scale", "mask", "max_evaluations", "seed"}},
        {"constraints", {"hinf_bound", "min_decay_per_s", "max_freq_rad_s"}},
        {"grid", {"omega_min_rad_s", "omega_max_rad_s", "points"}}};
    Reader r(text, source, schema);
    ProblemConfig cfg;
    auto& p = cfg.problem;

    cfg.model_spec = r.get<std::string>("problem", "model", "builtin");
    p.plant = load_model(cfg.model_spec).model;
    cfg.controller_spec = r.get<std::string>("problem", "controller", "structured");
    Controller c;
    try {
        c = load_controller(cfg.controller_spec);
    } catch (const ConfigError& e) {
        r.fail("problem", "controller", e.what());
    }
    if (!std::holds_alternative<GainSet>(c)) r.fail("problem", "controller", "tuning needs a structured gain set");
    p.initial = std::get<GainSet>(c);
    cfg.kp_scale = r.get("problem", "kp_scale", 1.0);
    cfg.kd_scale = r.get("problem", "kd_scale", 1.0);
    p.initial.K_p *= cfg.kp_scale;
    p.initial.K_d *= cfg.kd_scale;
    try {
        p.mask = TunableMask::parse(r.get<std::string>("problem", "mask", "all"));
    } catch (const ConfigError& e) {
        r.fail("problem", "mask", e.what());
    }
    p.max_evaluations = r.get("problem", "max_evaluations", 2000);
    p.seed = r.get<std::uint64_t>("problem", "seed", 1);

    p.constraints.hinf_bound = r.get("constraints", "hinf_bound", 1.0);
    p.constraints.min_decay = r.get("constraints", "min_decay_per_s", 0.08);
    p.constraints.max_freq = r.get("constraints", "max_freq_rad_s", 50.0);

    const double lo = r.get("grid", "omega_min_rad_s", 1e-3);
    const double hi = r.get("grid", "omega_max_rad_s", 1e3);
    const int n = r.get("grid", "points", 400);
    if (!(lo > 0 && hi > lo && n >= 2)) r.fail("grid", "points", "need 0 < omega_min < omega_max and points >= 2");
    p.grid = FrequencyGrid::logspace(lo, hi, n);

    try {
        p.validate();
    } catch (const Error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    cfg.resolved = std::move(r.resolved);
    return cfg;
}

ProblemConfig load_problem(const std::string& path) { return parse_problem(read_file(path), path); }

} // namespace formstab

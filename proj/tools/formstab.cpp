#include "formstab/config.hpp"
#include "formstab/errors.hpp"
#include "formstab/formsim.hpp"
#include "formstab/freqana.hpp"
#include "formstab/hinfsynth.hpp"
#include "formstab/io.hpp"
#include "formstab/parallel.hpp"
#include "formstab/turb.hpp"
#include "formstab/wake.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace formstab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitNotConverged = 3;

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fnv1a_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ResourceError("cannot read '" + p.string() + "'");
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

std::string default_out_dir() {
    const char* env = std::getenv("FORMSTAB_OUT_DIR");
    return env && *env ? env : ".";
}

// Collects everything a manifest needs; the canonical argv lets `rerun` replay the command.
class Run {
public:
    Run(std::string command, std::string out_dir) : command_(std::move(command)), out_(std::move(out_dir)) {
        fs::create_directories(out_);
        started_ = utc_now();
        argv_.push_back(command_);
    }

    void arg(const std::string& a) { argv_.push_back(a); }
    void arg(const std::string& flag, const std::string& value) {
        argv_.push_back(flag);
        argv_.push_back(value);
    }
    void config(const std::string& key, json value) { config_[key] = std::move(value); }
    void seed(const std::string& key, std::uint64_t s) { seeds_[key] = s; }

    fs::path path(const std::string& name) const { return fs::path(out_) / name; }

    std::ofstream open(const std::string& name) {
        outputs_.push_back(name);
        std::ofstream os(path(name), std::ios::binary);
        if (!os) throw ResourceError("cannot write '" + path(name).string() + "'");
        return os;
    }

    void write_json(const std::string& name, const json& j) {
        auto os = open(name);
        os << j.dump(2) << '\n';
    }

    void finish(int exit_code) {
        json m;
        m["command"] = command_;
        m["argv"] = argv_;
        m["config"] = config_;
        m["seeds"] = seeds_;
        m["version"] = FORMSTAB_VERSION;
        m["started_utc"] = started_;
        m["finished_utc"] = utc_now();
        m["exit_code"] = exit_code;
        json outs = json::array();
        for (const auto& name : outputs_) outs.push_back({{"path", name}, {"fnv1a64", fnv1a_file(path(name))}});
        m["outputs"] = outs;
        std::ofstream os(path(command_ + "_manifest.json"), std::ios::binary);
        os << m.dump(2) << '\n';
    }

private:
    std::string command_, out_, started_;
    std::vector<std::string> argv_;
    std::vector<std::string> outputs_;
    json config_ = json::object();
    json seeds_ = json::object();
};

std::string absolute_spec(const std::string& spec) {
    if (spec.rfind("file:", 0) == 0) return "file:" + fs::absolute(spec.substr(5)).string();
    return spec;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

FrequencyGrid make_grid(double lo, double hi, int n) {
    if (!(lo > 0 && hi > lo && n >= 2)) throw ConfigError("need 0 < omega-min < omega-max and points >= 2");
    return FrequencyGrid::logspace(lo, hi, n);
}

json report_json(const StringStabilityReport& r) {
    return {{"peak", r.peak},
            {"peak_omega_rad_s", r.peak_omega},
            {"verdict", std::string(verdict_name(r.verdict))},
            {"string_stable", r.string_stable()},
            {"closed_loop_stable", r.closed_loop_stable},
            {"spectral_abscissa", r.spectral_abscissa}};
}

// analyze -------------------------------------------------------------------------------

struct AnalyzeOpts {
    std::string controller = "lqr";
    std::string model = "builtin";
    double omega_min = 1e-3, omega_max = 1e3, headway = 0.0;
    int points = 400;
    std::string out;
};

int cmd_analyze(const AnalyzeOpts& o) {
    Run run("analyze", o.out);
    run.arg("--controller", absolute_spec(o.controller));
    run.arg("--model", absolute_spec(o.model));
    run.arg("--omega-min", fmt(o.omega_min));
    run.arg("--omega-max", fmt(o.omega_max));
    run.arg("--points", std::to_string(o.points));
    run.arg("--headway-s", fmt(o.headway));

    const auto model = load_model(o.model);
    const auto controller = load_controller(o.controller);
    const auto grid = make_grid(o.omega_min, o.omega_max, o.points);
    const auto r = string_stable(model.model, controller, grid, o.headway);

    json j = report_json(r);
    j["controller"] = o.controller;
    run.write_json("analyze_report.json", j);
    {
        auto os = run.open("analyze_sweep.csv");
        os << "omega_rad_s,sigma_max,T11_abs,T22_abs,T33_abs\n";
        for (std::size_t k = 0; k < r.omega.size(); ++k)
            os << fmt(r.omega[k]) << ',' << fmt(r.sigma_max[k]) << ',' << fmt(r.diagonal[k][0]) << ','
               << fmt(r.diagonal[k][1]) << ',' << fmt(r.diagonal[k][2]) << '\n';
    }
    run.config("controller", controller_to_json(controller));
    run.config("grid", {{"omega_min_rad_s", o.omega_min}, {"omega_max_rad_s", o.omega_max}, {"points", o.points}});
    run.config("headway_s", o.headway);

    std::cout << "peak sigma_max " << fmt(r.peak) << " at " << fmt(r.peak_omega) << " rad/s, loop "
              << (r.closed_loop_stable ? "stable" : "unstable") << ", verdict " << verdict_name(r.verdict) << '\n';
    const int code = r.string_stable() ? kExitOk : kExitUnstable;
    run.finish(code);
    return code;
}

// simulate ------------------------------------------------------------------------------

struct SimulateOpts {
    std::string scenario;
    std::string out;
};

void write_trace(std::ostream& os, const SimTrace& tr, int stride) {
    static const char* names[] = {"x_m", "y_m", "z_m", "vx_m_s", "vy_m_s", "vz_m_s",
                                  "phi_rad", "theta_rad", "psi_rad", "p_rad_s", "q_rad_s", "r_rad_s"};
    os << "t_s,aircraft_id";
    for (const char* n : names) os << ',' << n;
    os << ",thrust_N,aileron_rad,elevator_rad,rudder_rad,e_y_m,e_z_m,e_x_m,dT_pct\n";
    for (std::size_t k = 0; k < tr.steps(); k += static_cast<std::size_t>(stride))
        for (int i = 0; i < tr.n_aircraft(); ++i) {
            const auto& a = tr.aircraft[static_cast<std::size_t>(i)];
            os << fmt(tr.t[k]) << ',' << i;
            for (int s = 0; s < 12; ++s) os << ',' << fmt(a.x[k](s));
            for (int c = 0; c < 4; ++c) os << ',' << fmt(a.u[k](c));
            os << ',' << fmt(a.e[k].y()) << ',' << fmt(a.e[k].z()) << ',' << fmt(a.e[k].x()) << ','
               << fmt(tr.thrust_pct(i, k)) << '\n';
        }
}

json energy_json(const std::vector<EnergyStats>& e) {
    json a = json::array();
    for (const auto& s : e) a.push_back({{"mean_pct", s.mean_pct}, {"std_pct", s.std_pct}});
    return a;
}

json ratios_json(const std::vector<std::optional<double>>& r) {
    json a = json::array();
    for (const auto& v : r) a.push_back(v ? number_or_null(*v) : json(nullptr));
    return a;
}

int cmd_simulate(const SimulateOpts& o) {
    const auto cfg = load_scenario(o.scenario);
    Run run("simulate", o.out);
    run.arg(fs::absolute(o.scenario).string());
    for (const auto& [k, v] : cfg.resolved) run.config(k, v);
    run.seed("turbulence", cfg.scenario.seed);

    const auto ac = load_model(cfg.model_spec);
    json summary;
    summary["n_aircraft"] = cfg.scenario.n_aircraft;
    summary["controller"] = cfg.scenario.controller_name;
    SimTrace tr;
    try {
        tr = run_scenario(cfg.scenario, ac);
    } catch (const DivergenceError& e) {
        summary["diverged"] = true;
        summary["divergence"] = {{"aircraft", e.aircraft()}, {"time_s", e.time()}};
        run.write_json("simulate_summary.json", summary);
        std::cerr << "formstab: " << e.what() << '\n';
        run.finish(kExitUnstable);
        return kExitUnstable;
    }
    summary["diverged"] = false;
    summary["divergence"] = nullptr;
    {
        auto os = run.open("simulate_trace.csv");
        write_trace(os, tr, cfg.output_stride);
    }
    const double duration = tr.t.back() - tr.t.front();
    const double window = std::min(cfg.energy_window, duration);
    if (window > 0.0) {
        summary["energy_window_s"] = window;
        summary["energy_report"] = energy_json(energy_report(tr, window));
        const SimTrace solo = solo_baseline(cfg.scenario, ac);
        summary["energy_vs_solo"] = energy_json(energy_report(tr, solo, window));
    }
    if (tr.n_aircraft() >= 2) {
        const double skip = std::min(cfg.transient_skip, duration);
        summary["transient_skip_s"] = skip;
        summary["amplification_ratios"] = ratios_json(amplification_ratios(tr, skip));
        summary["amplification_ratios_y"] = ratios_json(amplification_ratios(tr, skip, 1));
    }
    json final_e = json::array();
    for (const auto& a : tr.aircraft) final_e.push_back({a.e.back().x(), a.e.back().y(), a.e.back().z()});
    summary["final_error_m"] = final_e;
    run.write_json("simulate_summary.json", summary);
    std::cout << "simulated " << tr.n_aircraft() << " aircraft for " << fmt(duration) << " s\n";
    run.finish(kExitOk);
    return kExitOk;
}

// synthesize ----------------------------------------------------------------------------

struct SynthesizeOpts {
    std::string problem;
    std::optional<int> max_evaluations;
    std::string out;
};

int cmd_synthesize(const SynthesizeOpts& o) {
    auto cfg = load_problem(o.problem);
    if (o.max_evaluations) {
        if (*o.max_evaluations < 0) throw ConfigError("--max-evaluations must be >= 0");
        cfg.problem.max_evaluations = *o.max_evaluations;
    }
    Run run("synthesize", o.out);
    run.arg(fs::absolute(o.problem).string());
    if (o.max_evaluations) run.arg("--max-evaluations", std::to_string(*o.max_evaluations));
    for (const auto& [k, v] : cfg.resolved) run.config(k, v);
    run.config("problem.max_evaluations", cfg.problem.max_evaluations);
    run.seed("tuner", cfg.problem.seed);

    const auto res = tune(cfg.problem);
    run.write_json("synthesize_gains.json", controller_to_json(res.gains));
    const auto& c = cfg.problem.constraints;
    json v = {{"converged", res.converged},
              {"initial_stable", res.initial_stable},
              {"evaluations", res.evaluations},
              {"objective", number_or_null(res.objective)},
              {"hinf", number_or_null(res.hinf)},
              {"decay_per_s", number_or_null(res.decay)},
              {"max_pole_freq_rad_s", number_or_null(res.max_freq)},
              {"constraints", {{"hinf_bound", c.hinf_bound}, {"min_decay_per_s", c.min_decay}, {"max_freq_rad_s", c.max_freq}}},
              {"mask", cfg.problem.mask.to_string()}};
    run.write_json("synthesize_verification.json", v);
    std::cout << (res.converged ? "converged" : "not converged") << ": |T|inf " << fmt(res.hinf) << ", decay "
              << fmt(res.decay) << " 1/s, max pole " << fmt(res.max_freq) << " rad/s after " << res.evaluations
              << " evaluations\n";
    const int code = res.converged ? kExitOk : kExitNotConverged;
    run.finish(code);
    return code;
}

// wakefield -----------------------------------------------------------------------------

struct WakefieldOpts {
    double x = -1.0;     // m behind the head; < 0 selects the optimal streamwise offset
    double half_width_y = 68.2, half_width_z = 34.1;
    int ny = 81, nz = 41;
    std::string model = "builtin";
    std::string out;
};

int cmd_wakefield(const WakefieldOpts& o) {
    if (o.ny < 2 || o.nz < 2) throw ConfigError("--ny and --nz must be >= 2");
    if (!(o.half_width_y > 0 && o.half_width_z > 0)) throw ConfigError("half widths must be positive");
    Run run("wakefield", o.out);
    run.arg("--x-m", fmt(o.x));
    run.arg("--half-width-y-m", fmt(o.half_width_y));
    run.arg("--half-width-z-m", fmt(o.half_width_z));
    run.arg("--ny", std::to_string(o.ny));
    run.arg("--nz", std::to_string(o.nz));
    run.arg("--model", absolute_spec(o.model));

    const auto ac = load_model(o.model);
    const auto hv = HorseshoeVortex::behind(ac.params, Vec3::Zero());
    const double x = o.x < 0.0 ? -optimal_offset(ac.params).x() : -o.x;
    const std::size_t n = static_cast<std::size_t>(o.ny) * static_cast<std::size_t>(o.nz);
    std::vector<double> px(n, x), py(n), pz(n), vx(n), vy(n), vz(n);
    for (int i = 0; i < o.ny; ++i)
        for (int k = 0; k < o.nz; ++k) {
            const auto idx = static_cast<std::size_t>(i * o.nz + k);
            py[idx] = -o.half_width_y + 2.0 * o.half_width_y * i / (o.ny - 1);
            pz[idx] = -o.half_width_z + 2.0 * o.half_width_z * k / (o.nz - 1);
        }
    horseshoe_velocity_batch(hv, px, py, pz, vx, vy, vz);
    auto os = run.open("wakefield.csv");
    os << "x_m,y_m,z_m,vx_m_s,vy_m_s,vz_m_s\n";
    for (std::size_t k = 0; k < n; ++k)
        os << fmt(px[k]) << ',' << fmt(py[k]) << ',' << fmt(pz[k]) << ',' << fmt(vx[k]) << ',' << fmt(vy[k]) << ','
           << fmt(vz[k]) << '\n';
    os.close();
    run.config("kernel", std::string(simd::level_name(simd::active_level())));
    run.finish(kExitOk);
    return kExitOk;
}

// lqr -----------------------------------------------------------------------------------

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError(what + ": cannot parse '" + item + "'");
        }
        if (item.find_first_not_of(" \t", pos) != std::string::npos)
            throw ConfigError(what + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    return out;
}

struct LqrOpts {
    std::string q_diag, r_diag;
    bool integral = false;
    std::string model = "builtin";
    std::string out;
};

int cmd_lqr(const LqrOpts& o) {
    Run run("lqr", o.out);
    run.arg("--q-diag", o.q_diag);
    run.arg("--r-diag", o.r_diag);
    if (o.integral) run.arg("--integral");
    run.arg("--model", absolute_spec(o.model));

    const auto ac = load_model(o.model);
    const LtiModel plant = o.integral ? augment_integral(ac.model) : ac.model;
    const auto q = parse_list(o.q_diag, "--q-diag");
    const auto r = parse_list(o.r_diag, "--r-diag");
    if (static_cast<int>(q.size()) != plant.states())
        throw ConfigError("--q-diag needs " + std::to_string(plant.states()) + " entries");
    if (static_cast<int>(r.size()) != plant.inputs())
        throw ConfigError("--r-diag needs " + std::to_string(plant.inputs()) + " entries");
    LqrWeights w{Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())).asDiagonal(),
                 Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())).asDiagonal()};
    const auto gain = lqr_synthesize(plant, w);
    run.write_json("lqr_gains.json", controller_to_json(gain));
    std::cout << "closed-loop spectral abscissa " << fmt(spectral_abscissa(plant.A - plant.B * gain.K)) << '\n';
    run.finish(kExitOk);
    return kExitOk;
}

// turbulence ----------------------------------------------------------------------------

struct TurbulenceOpts {
    double intensity = 0.02, length_scale = 762.0, speed = 230.0, spacing = 2.3, extent = 0.0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_turbulence(const TurbulenceOpts& o) {
    Run run("turbulence", o.out);
    run.arg("--intensity-frac", fmt(o.intensity));
    run.arg("--length-scale-m", fmt(o.length_scale));
    run.arg("--speed-m-s", fmt(o.speed));
    run.arg("--spacing-m", fmt(o.spacing));
    run.arg("--extent-m", fmt(o.extent));
    run.arg("--seed", std::to_string(o.seed));
    run.seed("turbulence", o.seed);

    TurbulenceSettings s;
    s.intensity = o.intensity;
    s.length_scale = o.length_scale;
    s.reference_speed = o.speed;
    s.spacing = o.spacing;
    s.extent = o.extent > 0.0 ? o.extent : 50.0 * o.length_scale;
    s.seed = o.seed;
    const auto field = generate_turbulence(s);
    auto os = run.open("turbulence.csv");
    field.write_csv(os);
    os.close();
    run.finish(kExitOk);
    return kExitOk;
}

// rerun ---------------------------------------------------------------------------------

int run_cli(std::vector<std::string> args);

int cmd_rerun(const std::string& manifest_path, const std::string& out) {
    const json m = read_json_file(manifest_path);
    if (!m.contains("argv") || !m.contains("outputs")) throw ConfigError("'" + manifest_path + "' is not a run manifest");
    auto argv = m["argv"].get<std::vector<std::string>>();
    const std::string dir = out.empty() ? fs::path(manifest_path).parent_path().string() : out;
    argv.push_back("--out");
    argv.push_back(dir.empty() ? "." : dir);
    const int code = run_cli(argv);
    int mismatches = 0;
    for (const auto& o : m["outputs"]) {
        const fs::path p = fs::path(dir.empty() ? "." : dir) / o["path"].get<std::string>();
        const std::string h = fs::exists(p) ? fnv1a_file(p) : "missing";
        if (h != o["fnv1a64"].get<std::string>()) {
            std::cerr << "formstab: " << p.string() << " differs from the manifest\n";
            ++mismatches;
        }
    }
    if (mismatches) return kExitError;
    std::cout << "reproduced " << m["outputs"].size() << " output file(s)\n";
    return code;
}

// dispatch ------------------------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Formation-flight string stability toolkit"};
    app.set_version_flag("--version", std::string(FORMSTAB_VERSION));
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("--jobs", jobs, "Worker thread cap (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

    const std::string out_default = default_out_dir();

    AnalyzeOpts ao;
    ao.out = out_default;
    auto* analyze = app.add_subcommand("analyze", "String-stability report for a controller");
    analyze->add_option("--controller", ao.controller, "lqr, lqr-int, structured or file:<gains.json>");
    analyze->add_option("--model", ao.model, "builtin or file:<model.json>");
    analyze->add_option("--omega-min", ao.omega_min, "rad/s");
    analyze->add_option("--omega-max", ao.omega_max, "rad/s");
    analyze->add_option("--points", ao.points);
    analyze->add_option("--headway-s", ao.headway)->check(CLI::NonNegativeNumber);
    analyze->add_option("--out", ao.out, "Output directory");

    SimulateOpts so;
    so.out = out_default;
    auto* simulate = app.add_subcommand("simulate", "Run a formation scenario");
    simulate->add_option("scenario", so.scenario, "Scenario file")->required();
    simulate->add_option("--out", so.out, "Output directory");

    SynthesizeOpts yo;
    yo.out = out_default;
    auto* synthesize = app.add_subcommand("synthesize", "Tune K_p and K_d against the string-stability bound");
    synthesize->add_option("problem", yo.problem, "Problem file")->required();
    synthesize->add_option("--max-evaluations", yo.max_evaluations, "Override the evaluation budget");
    synthesize->add_option("--out", yo.out, "Output directory");

    WakefieldOpts wo;
    wo.out = out_default;
    auto* wakefield = app.add_subcommand("wakefield", "Horseshoe velocity on a cross-flow plane");
    wakefield->add_option("--x-m", wo.x, "Distance behind the bound vortex (default: optimal spacing)");
    wakefield->add_option("--half-width-y-m", wo.half_width_y);
    wakefield->add_option("--half-width-z-m", wo.half_width_z);
    wakefield->add_option("--ny", wo.ny);
    wakefield->add_option("--nz", wo.nz);
    wakefield->add_option("--model", wo.model, "builtin or file:<model.json>");
    wakefield->add_option("--out", wo.out, "Output directory");

    LqrOpts lo;
    lo.out = out_default;
    auto* lqr = app.add_subcommand("lqr", "LQR design from diagonal weights");
    lqr->add_option("--q-diag", lo.q_diag, "Comma-separated state weights")->required();
    lqr->add_option("--r-diag", lo.r_diag, "Comma-separated input weights")->required();
    lqr->add_flag("--integral", lo.integral, "Augment with position integrators");
    lqr->add_option("--model", lo.model, "builtin or file:<model.json>");
    lqr->add_option("--out", lo.out, "Output directory");

    TurbulenceOpts to;
    to.out = out_default;
    auto* turbulence = app.add_subcommand("turbulence", "Generate a frozen von Karman gust field");
    turbulence->add_option("--intensity-frac", to.intensity);
    turbulence->add_option("--length-scale-m", to.length_scale);
    turbulence->add_option("--speed-m-s", to.speed);
    turbulence->add_option("--spacing-m", to.spacing);
    turbulence->add_option("--extent-m", to.extent, "Default 50 length scales");
    turbulence->add_option("--seed", to.seed);
    turbulence->add_option("--out", to.out, "Output directory");

    std::string manifest, rerun_out;
    auto* rerun = app.add_subcommand("rerun", "Replay a run manifest and check its outputs");
    rerun->add_option("manifest", manifest)->required();
    rerun->add_option("--out", rerun_out, "Output directory (default: next to the manifest)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }
    if (jobs > 0) set_max_workers(jobs);

    try {
        if (*analyze) return cmd_analyze(ao);
        if (*simulate) return cmd_simulate(so);
        if (*synthesize) return cmd_synthesize(yo);
        if (*wakefield) return cmd_wakefield(wo);
        if (*lqr) return cmd_lqr(lo);
        if (*turbulence) return cmd_turbulence(to);
        if (*rerun) return cmd_rerun(manifest, rerun_out);
    } catch (const ConfigError& e) {
        std::cerr << "formstab: configuration error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "formstab: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(std::move(args));
}

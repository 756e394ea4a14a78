#include "formstab/formsim.hpp"

#include "formstab/errors.hpp"
#include "formstab/turb.hpp"

#include <algorithm>
#include <cmath>

namespace formstab {

void FormationScenario::validate() const {
    if (n_aircraft < 1) throw ConfigError("formation needs at least one aircraft");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(duration >= dt)) throw ConfigError("duration must be at least one time step");
    if (!(headway >= 0.0)) throw ConfigError("time headway must be non-negative");
    if (!(turbulence_intensity >= 0.0)) throw ConfigError("turbulence intensity must be non-negative");
    if (wing_stations < 3 || wing_stations % 2 == 0) throw ConfigError("wing station count must be odd and >= 3");
    if (!(tail_arm > 0.0)) throw ConfigError("tail arm must be positive");
    if (perturbation == PerturbationPreset::custom && static_cast<int>(initial.size()) != n_aircraft)
        throw ConfigError("custom initial state list must have one entry per aircraft");
}

std::vector<Vec12> FormationScenario::initial_states() const {
    std::vector<Vec12> x0(static_cast<std::size_t>(n_aircraft), Vec12::Zero());
    switch (perturbation) {
    case PerturbationPreset::none: break;
    case PerturbationPreset::leader_lateral: x0[0](st::y) = perturbation_m; break;
    case PerturbationPreset::all_lateral:
        // Each follower sits perturbation_m further outboard than its optimum.
        for (int i = 1; i < n_aircraft; ++i) x0[static_cast<std::size_t>(i)](st::y) = -i * perturbation_m;
        break;
    case PerturbationPreset::custom: x0 = initial; break;
    }
    return x0;
}

void DelayLine::push(double t, const Vec3& value) {
    if (!samples_.empty() && !(t > samples_.back().first)) throw DomainError("delay line times must increase");
    samples_.emplace_back(t, value);
    // Keep one sample older than the read-back horizon.
    while (samples_.size() > 2 && samples_[1].first <= t - delay_) samples_.pop_front();
}

Vec3 DelayLine::read(double t) const {
    if (samples_.empty()) return Vec3::Zero();
    const double tq = t - delay_;
    if (tq <= samples_.front().first) return samples_.front().second;
    if (tq >= samples_.back().first) return samples_.back().second;
    auto it = std::lower_bound(samples_.begin(), samples_.end(), tq,
                               [](const std::pair<double, Vec3>& s, double v) { return s.first < v; });
    const auto& [t1, v1] = *it;
    if (t1 == tq) return v1;
    const auto& [t0, v0] = *(it - 1);
    const double a = (tq - t0) / (t1 - t0);
    return (1.0 - a) * v0 + a * v1;
}

namespace {

class Cascade {
public:
    Cascade(const FormationScenario& sc, const BuiltinModel& ac)
        : sc_(sc), model_(ac.model), params_(ac.params),
          delta_(sc.delta_ref.value_or(optimal_offset(ac.params))),
          lc_(realize(sc.controller, Realization::explicit_)),
          stations_(surface_stations({ac.params.wingspan, sc.tail_arm, ac.params.cruise_speed}, sc.wing_stations)),
          gust_(ac.model, stations_, {ac.params.wingspan, sc.tail_arm, ac.params.cruise_speed}),
          n_(sc.n_aircraft), q_(lc_.order()) {
        if (lc_.C0.rows() != model_.inputs()) throw ConfigError("controller output count does not match model inputs");
        const double tau = wake_delay(delta_.x(), params_.cruise_speed);
        delays_.assign(static_cast<std::size_t>(n_), DelayLine(tau));
        if (sc.turbulence_intensity > 0.0) {
            TurbulenceSettings ts;
            ts.length_scale = sc.turbulence_length_scale;
            ts.intensity = sc.turbulence_intensity;
            ts.reference_speed = params_.cruise_speed;
            ts.spacing = params_.cruise_speed * sc.dt;
            const double margin = 2000.0;
            ts.origin = -(n_ - 1) * std::abs(delta_.x()) - sc.tail_arm - margin;
            ts.extent = params_.cruise_speed * sc.duration + (n_ - 1) * std::abs(delta_.x()) + sc.tail_arm + 2 * margin;
            ts.seed = sc.seed;
            field_ = generate_turbulence(ts);
        }
        wake_on_ = sc.wake_enabled && !sc.solo && n_ > 1;
        const std::size_t m = stations_.size();
        sx_.resize(m);
        sy_.resize(m);
        sz_.resize(m);
        vx_.resize(m);
        vy_.resize(m);
        vz_.resize(m);
        vel_.resize(m);
    }

    int dim() const { return 12 + q_; }

    struct Outputs {
        Vec4 u;
        Vec3 e;
        double upwash = 0.0;
        Vec3 head = Vec3::Zero();
    };

    void derivative(double t, const std::vector<Eigen::VectorXd>& X, std::vector<Eigen::VectorXd>& dX,
                    std::vector<Outputs>* out) {
        for (int i = 0; i < n_; ++i) {
            const auto& Xi = X[static_cast<std::size_t>(i)];
            const auto x = Xi.head<12>();
            const Vec3 p = x.head<3>();
            const Vec3 v = x.segment<3>(3);
            Vec3 e = (i == 0 || sc_.solo) ? Vec3(-p) : Vec3(X[static_cast<std::size_t>(i - 1)].head<3>() - p);
            e -= sc_.headway * v;
            const Vec4 u = lc_.C0 * e - lc_.F0 * x + lc_.M * Xi.tail(q_);

            Vec12 w = Vec12::Zero();
            double upwash = 0.0;
            Vec3 head = Vec3::Zero();
            const bool wake_here = wake_on_ && i > 0;
            if (wake_here || field_) {
                std::fill(vel_.begin(), vel_.end(), Vec3::Zero());
                if (wake_here) {
                    const Vec3 lead = delays_[static_cast<std::size_t>(i - 1)].read(t);
                    head = Vec3(delta_.x(), delta_.y() + lead.y(), delta_.z() + lead.z());
                    const auto hs = HorseshoeVortex::behind(params_, head);
                    for (std::size_t k = 0; k < stations_.size(); ++k) {
                        sx_[k] = stations_[k].position.x();
                        sy_[k] = stations_[k].position.y() + p.y();
                        sz_[k] = stations_[k].position.z() + p.z();
                    }
                    horseshoe_velocity_batch(hs, sx_, sy_, sz_, vx_, vy_, vz_);
                    for (std::size_t k = 0; k < stations_.size(); ++k) vel_[k] = Vec3(vx_[k], vy_[k], vz_[k]);
                }
                if (field_) {
                    const double xi_abs = params_.cruise_speed * t - i * delta_.x() + p.x();
                    for (std::size_t k = 0; k < stations_.size(); ++k)
                        vel_[k] += field_->sample(xi_abs + stations_[k].position.x());
                }
                w = gust_.apply(vel_);
                upwash = gust_.wing_upwash(vel_);
            }

            auto& d = dX[static_cast<std::size_t>(i)];
            d.head<12>() = model_.A * x + model_.B * u + w;
            d.tail(q_) = lc_.Ne * e - lc_.Nx * x;
            if (out) (*out)[static_cast<std::size_t>(i)] = {u, e, upwash, head};
        }
    }

    void record_positions(double t, const std::vector<Eigen::VectorXd>& X) {
        for (int i = 0; i < n_; ++i) delays_[static_cast<std::size_t>(i)].push(t, X[static_cast<std::size_t>(i)].head<3>());
    }

private:
    const FormationScenario& sc_;
    const LtiModel& model_;
    const AircraftParams& params_;
    Vec3 delta_;
    LinearController lc_;
    std::vector<GustSample> stations_;
    GustMap gust_;
    int n_, q_;
    bool wake_on_ = false;
    std::vector<DelayLine> delays_;
    std::optional<TurbulenceField> field_;
    std::vector<double> sx_, sy_, sz_, vx_, vy_, vz_;
    std::vector<Vec3> vel_;
};

} // namespace

SimTrace run_scenario(const FormationScenario& sc, const BuiltinModel& ac) {
    sc.validate();
    ac.model.validate();
    if (ac.model.states() != 12) throw ConfigError("simulation expects the 12-state aircraft model");
    Cascade cascade(sc, ac);
    const int n = sc.n_aircraft;
    const auto x0 = sc.initial_states();
    const std::size_t N = static_cast<std::size_t>(n);

    std::vector<Eigen::VectorXd> X(N, Eigen::VectorXd::Zero(cascade.dim()));
    for (std::size_t i = 0; i < N; ++i) X[i].head<12>() = x0[i];
    std::vector<Eigen::VectorXd> k1 = X, k2 = X, k3 = X, k4 = X, tmp = X;
    std::vector<Cascade::Outputs> outs(N);

    const auto steps = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));
    SimTrace trace;
    trace.dt = sc.dt;
    trace.trimmed_thrust = ac.params.trimmed_thrust;
    trace.t.reserve(steps + 1);
    trace.aircraft.resize(N);
    for (auto& a : trace.aircraft) {
        a.x.reserve(steps + 1);
        a.u.reserve(steps + 1);
        a.e.reserve(steps + 1);
        a.upwash.reserve(steps + 1);
        a.wake_head.reserve(steps + 1);
    }

    const double h = sc.dt;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * h;
        cascade.record_positions(t, X);
        cascade.derivative(t, X, k1, &outs);
        trace.t.push_back(t);
        for (std::size_t i = 0; i < N; ++i) {
            auto& a = trace.aircraft[i];
            a.x.push_back(X[i].head<12>());
            a.u.push_back(outs[i].u);
            a.e.push_back(outs[i].e);
            a.upwash.push_back(outs[i].upwash);
            a.wake_head.push_back(outs[i].head);
        }
        if (k == steps) break;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = X[i] + 0.5 * h * k1[i];
        cascade.derivative(t + 0.5 * h, tmp, k2, nullptr);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = X[i] + 0.5 * h * k2[i];
        cascade.derivative(t + 0.5 * h, tmp, k3, nullptr);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = X[i] + h * k3[i];
        cascade.derivative(t + h, tmp, k4, nullptr);
        for (std::size_t i = 0; i < N; ++i) {
            X[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!X[i].allFinite() || X[i].cwiseAbs().maxCoeff() > 1e9)
                throw DivergenceError(static_cast<int>(i), t + h);
        }
    }
    return trace;
}

SimTrace solo_baseline(const FormationScenario& sc, const BuiltinModel& ac) {
    FormationScenario solo = sc;
    solo.solo = true;
    solo.wake_enabled = false;
    return run_scenario(solo, ac);
}

namespace {

std::vector<EnergyStats> window_stats(const SimTrace& trace, const SimTrace* baseline, double window) {
    if (trace.t.empty()) throw DomainError("empty trace");
    const double t_end = trace.t.back();
    if (!(window > 0.0) || window > t_end - trace.t.front() + 1e-9)
        throw DomainError("energy window is longer than the trace");
    if (baseline && (baseline->t.size() != trace.t.size() || baseline->n_aircraft() != trace.n_aircraft()))
        throw DomainError("baseline does not match the trace");
    const double t0 = t_end - window;
    std::vector<EnergyStats> out;
    for (int i = 0; i < trace.n_aircraft(); ++i) {
        double sum = 0.0, sq = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = 0; k < trace.t.size(); ++k) {
            if (trace.t[k] < t0 - 1e-9) continue;
            double v = trace.thrust_pct(i, k);
            if (baseline) v -= baseline->thrust_pct(i, k);
            sum += v;
            sq += v * v;
            ++cnt;
        }
        const double mean = sum / static_cast<double>(cnt);
        const double var = std::max(0.0, sq / static_cast<double>(cnt) - mean * mean);
        out.push_back({mean, std::sqrt(var)});
    }
    return out;
}

} // namespace

std::vector<EnergyStats> energy_report(const SimTrace& trace, double window) {
    return window_stats(trace, nullptr, window);
}

std::vector<EnergyStats> energy_report(const SimTrace& trace, const SimTrace& baseline, double window) {
    return window_stats(trace, &baseline, window);
}

std::vector<std::optional<double>> amplification_ratios(const SimTrace& trace, double skip, std::optional<int> axis) {
    if (axis && (*axis < 0 || *axis > 2)) throw ConfigError("axis must be 0, 1 or 2");
    const int n = trace.n_aircraft();
    std::vector<double> peak(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < trace.t.size(); ++k) {
            if (trace.t[k] < skip - 1e-9) continue;
            const Vec3& e = trace.aircraft[static_cast<std::size_t>(i)].e[k];
            const double m = axis ? std::abs(e(*axis)) : e.cwiseAbs().maxCoeff();
            peak[static_cast<std::size_t>(i)] = std::max(peak[static_cast<std::size_t>(i)], m);
        }
    std::vector<std::optional<double>> out;
    for (int i = 1; i < n; ++i) {
        const double den = peak[static_cast<std::size_t>(i - 1)];
        if (den < 1e-9) out.emplace_back(std::nullopt);
        else out.emplace_back(peak[static_cast<std::size_t>(i)] / den);
    }
    return out;
}

std::vector<double> drag_trace(const SimTrace& trace, int aircraft, const AircraftParams& params) {
    if (aircraft < 0 || aircraft >= trace.n_aircraft()) throw ConfigError("aircraft index out of range");
    const double CL = trim_lift_coefficient(params);
    std::vector<double> out;
    out.reserve(trace.t.size());
    for (double w : trace.aircraft[static_cast<std::size_t>(aircraft)].upwash)
        out.push_back(drag_coefficient(CL, params.zero_lift_drag, params.aspect_ratio(), w, params.cruise_speed));
    return out;
}

} // namespace formstab

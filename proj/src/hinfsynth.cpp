#include "formstab/hinfsynth.hpp"

#include "formstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace formstab {

namespace {
constexpr const char* kNames[6] = {"kp_x", "kp_y", "kp_z", "kd_x", "kd_y", "kd_z"};
}

int TunableMask::count() const {
    return static_cast<int>(std::count(kp.begin(), kp.end(), true) + std::count(kd.begin(), kd.end(), true));
}

TunableMask TunableMask::parse(const std::string& text) {
    TunableMask m;
    if (text == "all" || text.empty()) return m;
    m.kp = {false, false, false};
    m.kd = {false, false, false};
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        bool found = false;
        for (int k = 0; k < 6; ++k)
            if (tok == kNames[k]) {
                (k < 3 ? m.kp[static_cast<std::size_t>(k)] : m.kd[static_cast<std::size_t>(k - 3)]) = true;
                found = true;
            }
        if (!found) throw ConfigError("unknown tunable entry '" + tok + "' (expected kp_x..kd_z or all)");
    }
    if (m.count() == 0) throw ConfigError("tunable mask selects nothing");
    return m;
}

std::string TunableMask::to_string() const {
    std::string out;
    for (int k = 0; k < 6; ++k) {
        const bool on = k < 3 ? kp[static_cast<std::size_t>(k)] : kd[static_cast<std::size_t>(k - 3)];
        if (!on) continue;
        if (!out.empty()) out += ',';
        out += kNames[k];
    }
    return out;
}

void SynthesisProblem::validate() const {
    plant.validate();
    initial.validate();
    if (max_evaluations < 0) throw ConfigError("evaluation budget must be non-negative");
    if (mask.count() == 0) throw ConfigError("tunable mask selects nothing");
    grid.validate();
}

Evaluation evaluate(const SynthesisProblem& problem, const GainSet& g) {
    const StateSpace T = complementary_sensitivity(problem.plant, g);
    const auto ev = sorted_eigenvalues(T.A);
    Evaluation e;
    const double abscissa = ev.empty() ? -1.0 : ev.front().real();
    e.stable = abscissa < 0.0;
    e.decay = -abscissa;
    for (const auto& l : ev) e.max_freq = std::max({e.max_freq, std::abs(l), std::abs(l.imag())});
    if (!e.stable) {
        e.hinf = std::numeric_limits<double>::infinity();
        e.objective = kUnstablePenalty + abscissa;
        return e;
    }
    e.hinf = sv_sweep(T, problem.grid).peak;
    const auto& c = problem.constraints;
    e.objective = std::max(e.hinf - c.hinf_bound, 0.0) * kPenaltyWeight +
                  std::max(c.min_decay - e.decay, 0.0) * kPenaltyWeight +
                  std::max(e.max_freq - c.max_freq, 0.0) * kPenaltyWeight + e.hinf;
    return e;
}

double objective(const SynthesisProblem& problem, const GainSet& g) { return evaluate(problem, g).objective; }

namespace {

std::vector<double> pack(const GainSet& g, const TunableMask& m) {
    std::vector<double> th;
    for (int k = 0; k < 3; ++k)
        if (m.kp[static_cast<std::size_t>(k)]) th.push_back(g.K_p(k, k));
    for (int k = 0; k < 3; ++k)
        if (m.kd[static_cast<std::size_t>(k)]) th.push_back(g.K_d(k, k));
    return th;
}

GainSet unpack(const GainSet& base, const TunableMask& m, const std::vector<double>& th) {
    GainSet g = base;
    std::size_t j = 0;
    for (int k = 0; k < 3; ++k)
        if (m.kp[static_cast<std::size_t>(k)]) g.K_p(k, k) = th[j++];
    for (int k = 0; k < 3; ++k)
        if (m.kd[static_cast<std::size_t>(k)]) g.K_d(k, k) = th[j++];
    return g;
}

bool feasible(const Evaluation& e, const SynthesisConstraints& c) {
    return e.stable && e.hinf <= c.hinf_bound && e.decay >= c.min_decay && e.max_freq <= c.max_freq;
}

class Search {
public:
    explicit Search(const SynthesisProblem& p) : p_(p) {}

    bool exhausted() const { return evals_ >= p_.max_evaluations; }
    int evaluations() const { return evals_; }
    const std::vector<double>& best() const { return best_; }
    double best_value() const { return best_value_; }
    const std::vector<double>& history() const { return history_; }

    double eval(const std::vector<double>& th) {
        ++evals_;
        const double f = objective(p_, unpack(p_.initial, p_.mask, th));
        if (best_.empty() || f < best_value_) {
            best_value_ = f;
            best_ = th;
        }
        history_.push_back(best_value_);
        return f;
    }

private:
    const SynthesisProblem& p_;
    int evals_ = 0;
    std::vector<double> best_;
    double best_value_ = 0.0;
    std::vector<double> history_;
};

} // namespace

SynthesisResult tune(const SynthesisProblem& problem) {
    problem.validate();
    SynthesisResult result;
    const Evaluation initial = evaluate(problem, problem.initial);
    result.initial_stable = initial.stable;

    Search search(problem);
    const std::vector<double> theta0 = pack(problem.initial, problem.mask);
    const std::size_t dim = theta0.size();

    if (problem.max_evaluations > 0) {
        // Phase 1: scaled and jittered starts.
        std::mt19937_64 rng(problem.seed);
        std::uniform_real_distribution<double> jitter(-0.1, 0.1);
        const double scales[8] = {1.0, 0.5, 0.2, 2.0, 0.1, 0.35, 0.7, 1.4};
        for (double s : scales) {
            if (search.exhausted()) break;
            std::vector<double> th = theta0;
            for (auto& v : th) v *= s * (s == 1.0 ? 1.0 : std::exp(jitter(rng)));
            search.eval(th);
        }

        // Phase 2: coordinate pattern search with per-coordinate relative steps.
        std::vector<double> x = search.best();
        double fx = search.best_value();
        std::vector<double> step(dim, 0.25);
        const double min_step = 1e-5;
        while (!search.exhausted()) {
            const double sweep_start = fx;
            for (std::size_t j = 0; j < dim && !search.exhausted(); ++j) {
                bool moved = false;
                for (double dir : {+1.0, -1.0}) {
                    if (search.exhausted()) break;
                    std::vector<double> y = x;
                    y[j] = dir > 0 ? x[j] * (1.0 + step[j]) : x[j] / (1.0 + step[j]);
                    const double fy = search.eval(y);
                    if (fy < fx) {
                        x = std::move(y);
                        fx = fy;
                        moved = true;
                        break;
                    }
                }
                step[j] = moved ? std::min(1.0, step[j] * 2.0) : step[j] * 0.5;
            }
            const double largest = *std::max_element(step.begin(), step.end());
            if (sweep_start - fx < 1e-6 && largest < min_step) break;
        }
    }

    const std::vector<double> best = search.evaluations() > 0 ? search.best() : theta0;
    result.gains = unpack(problem.initial, problem.mask, best);
    result.evaluations = search.evaluations();
    result.best_history = search.history();

    // Independent verification of the returned gains.
    const Evaluation v = evaluate(problem, result.gains);
    result.hinf = v.hinf;
    result.decay = v.decay;
    result.max_freq = v.max_freq;
    result.objective = v.objective;
    result.converged = problem.max_evaluations > 0 && feasible(v, problem.constraints);
    return result;
}

} // namespace formstab

#pragma once

#include "formstab/control.hpp"
#include "formstab/freqana.hpp"
#include "formstab/linmodel.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace formstab {

struct SynthesisConstraints {
    double hinf_bound = 1.0;
    double min_decay = 0.08;  ///< 1/s
    double max_freq = 50.0;   ///< rad/s, bound on closed-loop pole magnitude
};

/// Which diagonal entries of K_p and K_d the tuner may move.
struct TunableMask {
    std::array<bool, 3> kp{true, true, true};
    std::array<bool, 3> kd{true, true, true};

    int count() const;
    /// Comma-separated subset of kp_x, kp_y, kp_z, kd_x, kd_y, kd_z (or "all").
    static TunableMask parse(const std::string& text);
    std::string to_string() const;
};

struct SynthesisProblem {
    LtiModel plant;
    GainSet initial;
    TunableMask mask;
    SynthesisConstraints constraints;
    int max_evaluations = 2000;
    std::uint64_t seed = 1;
    FrequencyGrid grid = FrequencyGrid::logspace();

    void validate() const;
};

struct Evaluation {
    bool stable = false;
    double hinf = 0.0;
    double decay = 0.0;
    double max_freq = 0.0;
    double objective = 0.0;
};

inline constexpr double kPenaltyWeight = 1e3;
inline constexpr double kUnstablePenalty = 1e6;

/// max(|T|inf - 1, 0) w + max(0.08 - decay, 0) w + max(maxfreq - 50, 0) w + |T|inf,
/// or 1e6 + spectral abscissa for an unstable loop.
Evaluation evaluate(const SynthesisProblem& problem, const GainSet& candidate);
double objective(const SynthesisProblem& problem, const GainSet& candidate);

struct SynthesisResult {
    GainSet gains;
    double hinf = 0.0;
    double decay = 0.0;
    double max_freq = 0.0;
    double objective = 0.0;
    int evaluations = 0;
    bool converged = false;
    bool initial_stable = false;
    std::vector<double> best_history; ///< best objective after each evaluation
};

/// Multi-start coordinate pattern search over the masked K_p, K_d diagonals. Reported
/// figures come from a fresh verification of the returned gains.
SynthesisResult tune(const SynthesisProblem& problem);

} // namespace formstab

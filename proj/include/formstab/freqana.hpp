#pragma once

#include "formstab/control.hpp"
#include "formstab/linmodel.hpp"
#include "formstab/lti.hpp"
#include "formstab/poly.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace formstab {

struct FrequencyGrid {
    std::vector<double> omega;

    static FrequencyGrid logspace(double lo = 1e-3, double hi = 1e3, int n = 400);
    void validate() const;
};

struct SvSweep {
    std::vector<double> omega;
    std::vector<double> sigma_max;
    double peak = 0.0;
    double peak_omega = 0.0;
};

/// Largest singular value over the grid, peak refined by golden-section search in log-frequency.
SvSweep sv_sweep(const StateSpace& system, const FrequencyGrid& grid);

/// Largest singular value of the frequency response at one frequency.
double max_singular_value(const StateSpace& system, double omega);

/// T(s) from the leader position to the follower position (3x3).
StateSpace complementary_sensitivity(const LtiModel& plant, const Controller& controller, double headway = 0.0);

/// S = I - T, same states as T.
StateSpace sensitivity(const StateSpace& T);

/// Open loop L = P_bar C from the separation error to the own position, states [x; xi].
StateSpace open_loop(const LtiModel& plant, const Controller& controller, double headway = 0.0);

/// One channel of a strictly proper MIMO system as a transfer function.
RationalTF siso_channel(const StateSpace& system, int input, int output);

enum class Verdict { stable, marginal, unstable };
std::string_view verdict_name(Verdict v);

inline constexpr double kPeakTolerance = 1e-6;
inline constexpr double kMarginalBand = 1e-3;

struct StringStabilityReport {
    double peak = 0.0;
    double peak_omega = 0.0;
    Verdict verdict = Verdict::unstable;
    bool closed_loop_stable = false;
    double spectral_abscissa = 0.0;
    std::vector<double> omega;
    std::vector<double> sigma_max;
    std::vector<std::array<double, 3>> diagonal; ///< |T_11|, |T_22|, |T_33|

    /// Stable and marginal verdicts both satisfy the criterion.
    bool string_stable() const { return verdict != Verdict::unstable; }
};

/// Verdict from loop stability and peak: stable when peak <= 1 - 1e-3, marginal up to
/// 1 + 1e-6, unstable above or when the loop itself is unstable.
Verdict classify(bool closed_loop_stable, double peak);

StringStabilityReport string_stable(const LtiModel& plant, const Controller& controller,
                                    const FrequencyGrid& grid = FrequencyGrid::logspace(), double headway = 0.0);

/// Origin poles minus origin zeros, both counted with |root| < origin_tol.
int system_type(const RationalTF& tf, double origin_tol = 1e-8);

/// lim s G(s): 0 for type 0, +inf for type >= 2.
double velocity_error_constant(const RationalTF& tf, double origin_tol = 1e-8);

std::vector<cdouble> rhp_zeros(const RationalTF& tf);

struct BodeIntegral {
    double lhs = 0.0;
    double rhs = 0.0;
    bool rhs_infinite = false;
};

/// Integral of ln|T(jw)|/w^2 over (0, inf) against -pi/(2 K_v) + pi sum 1/z_i.
BodeIntegral bode_T_integral(const RationalTF& T, const RationalTF& G, double origin_tol = 1e-8);

/// Integral of ln|S(jw)| over (0, inf) for a stable loop of relative degree >= 2.
double bode_S_integral(const RationalTF& S);

/// 1 / K_v of a stable unity-feedback loop.
double steady_state_ramp_error(const RationalTF& G, double origin_tol = 1e-8);

} // namespace formstab

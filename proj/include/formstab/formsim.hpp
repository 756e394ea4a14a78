#pragma once

#include "formstab/control.hpp"
#include "formstab/linmodel.hpp"
#include "formstab/wake.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace formstab {

enum class PerturbationPreset {
    none,
    leader_lateral, ///< leader displaced laterally
    all_lateral,    ///< every follower starts the same lateral distance off its optimum
    custom
};

struct FormationScenario {
    int n_aircraft = 1;
    std::optional<Vec3> delta_ref;      ///< defaults to optimal_offset(params)
    Controller controller = preset_lqr();
    std::string controller_name = "lqr";
    double headway = 0.0;               ///< s
    PerturbationPreset perturbation = PerturbationPreset::none;
    double perturbation_m = 0.0;        ///< magnitude for the presets
    std::vector<Vec12> initial;         ///< per aircraft, used with `custom`
    double turbulence_intensity = 0.0;  ///< fraction of cruise speed
    double turbulence_length_scale = 762.0;
    double duration = 10.0;             ///< s
    double dt = 0.01;                   ///< s
    std::uint64_t seed = 0;
    bool wake_enabled = true;
    int wing_stations = 25;             ///< odd, >= 3
    double tail_arm = 18.0;             ///< m
    /// Every aircraft regulates only its own deviation and feels no wake (solo flight).
    bool solo = false;

    void validate() const;
    std::vector<Vec12> initial_states() const;
};

/// Timestamped history with a fixed read-back delay and linear interpolation.
class DelayLine {
public:
    explicit DelayLine(double delay) : delay_(delay) {}
    double delay() const { return delay_; }
    void push(double t, const Vec3& value);
    /// Value at t - delay; before the first sample the first value is held.
    Vec3 read(double t) const;
    std::size_t size() const { return samples_.size(); }

private:
    double delay_;
    std::deque<std::pair<double, Vec3>> samples_;
};

struct AircraftTrace {
    std::vector<Vec12> x;
    std::vector<Vec4> u;
    std::vector<Vec3> e;          ///< separation error (leader: own regulation error)
    std::vector<double> upwash;   ///< span-averaged, positive up, m/s
    std::vector<Vec3> wake_head;  ///< head of the horseshoe felt by this aircraft (follower frame)
};

struct SimTrace {
    double dt = 0.0;
    double trimmed_thrust = 1.0;
    std::vector<double> t;
    std::vector<AircraftTrace> aircraft;

    int n_aircraft() const { return static_cast<int>(aircraft.size()); }
    std::size_t steps() const { return t.size(); }
    double thrust_pct(int i, std::size_t k) const { return 100.0 * aircraft[i].u[k](0) / trimmed_thrust; }
};

/// Fixed-step RK4 integration of the whole cascade. Throws DivergenceError when a
/// state exceeds 1e9 in magnitude.
SimTrace run_scenario(const FormationScenario& sc, const BuiltinModel& aircraft = builtin_a320());

/// Same scenario flown solo: no wake, no coupling, identical turbulence alignment.
SimTrace solo_baseline(const FormationScenario& sc, const BuiltinModel& aircraft = builtin_a320());

struct EnergyStats {
    double mean_pct = 0.0;
    double std_pct = 0.0;
};

/// Mean and standard deviation of the thrust change over the final window (negative = saving).
std::vector<EnergyStats> energy_report(const SimTrace& trace, double window = 30.0);
/// Same, relative to a solo baseline of identical length: per-sample formation minus solo.
std::vector<EnergyStats> energy_report(const SimTrace& trace, const SimTrace& baseline, double window = 30.0);

/// ratio_i = max|e_i| / max|e_{i-1}| for i >= 1 after `skip` seconds. `axis` selects one
/// component; without it the largest component counts. Empty optional = not applicable.
std::vector<std::optional<double>> amplification_ratios(const SimTrace& trace, double skip = 10.0,
                                                        std::optional<int> axis = std::nullopt);

/// Lifting-line drag coefficient along the trace from the sampled upwash (diagnostic).
std::vector<double> drag_trace(const SimTrace& trace, int aircraft, const AircraftParams& params);

} // namespace formstab

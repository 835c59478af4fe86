#pragma once

#include <cstdint>
#include <vector>

#include "tsync/rng.hpp"

namespace tsync {

// Two-environment oscillating temperature model for a crystal oscillator.
// The device alternates between t_high and t_low every p seconds; within an
// interval its temperature relaxes exponentially toward the ambient one with
// time constant tc. The frequency deviation is the cubic characteristic of an
// AT-cut quartz around the reference temperature t0.
struct ThermalProfile {
    double tc = 60.0;     // thermal time constant [s]
    double p = 1200.0;    // environment switch period [s]
    double t_high = 25.0; // [degC]
    double t_low = 25.0;  // [degC]
    double t0 = 25.0;     // reference temperature [degC]
    double a = 0.0;       // [1/degC]
    double b = 0.4e-9;    // [1/degC^2]
    double c = 109.5e-12; // [1/degC^3]
};

struct NoiseProfile {
    double var_theta = 0.0;  // offset increment variance [s^2]
    double var_gamma = 0.0;  // skew increment variance [dimensionless]
    std::uint64_t seed = 0;  // RNG stream identifier for the run
};

// Ground-truth synchronization state of a slave clock against its reference.
struct ClockState {
    double theta = 0.0;          // offset [s]
    double gamma_rw = 0.0;       // random-walk skew component
    double gamma_thermal = 0.0;  // thermal skew level
    double d = 0.0;              // stationary delay state [s]

    double total_skew() const { return gamma_rw + gamma_thermal; }
};

// Newton cooling: temperature after dt seconds in an environment at t_env,
// starting from t_xo_at_switch. Monotone toward t_env; dt must be >= 0.
double cooling_temperature(const ThermalProfile& profile, double t_xo_at_switch,
                           double t_env, double dt);

// Fractional frequency deviation at the given temperature.
double thermal_skew(const ThermalProfile& profile, double temperature);

struct ThermalSample {
    double time;         // [s]
    double temperature;  // [degC]
    double skew;         // thermal_skew(temperature)
};

// Samples the temperature/skew process every `step` seconds over [0, horizon].
std::vector<ThermalSample> thermal_trajectory(const ThermalProfile& profile,
                                              double horizon, double step);

// Random access into the periodic temperature process. The environment starts
// at t_high and toggles at every absolute multiple of p; the oscillator starts
// at t0. Switch-point temperatures are cached so lookups stay O(1) amortized.
class ThermalSimulator {
public:
    explicit ThermalSimulator(const ThermalProfile& profile);

    double temperature_at(double t) const;
    double skew_at(double t) const;
    const ThermalProfile& profile() const { return profile_; }

private:
    double env_of(std::size_t interval) const;
    void extend_to(std::size_t interval) const;

    ThermalProfile profile_;
    mutable std::vector<double> switch_temps_;  // XO temperature at n*p
};

// One step of the clock state recursion over a synchronization period tau.
// The offset integrates the state's current total skew; the new thermal level
// is taken from the `thermal` argument; increments are Gaussian draws from
// `rng` with the profile variances (a zero variance yields an exact zero).
ClockState step_state(const ClockState& state, const NoiseProfile& noise,
                      double thermal, double tau, RngStream& rng);

}  // namespace tsync

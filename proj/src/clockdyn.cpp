#include "tsync/clockdyn.hpp"

#include <cmath>

#include "tsync/errors.hpp"

namespace tsync {

double cooling_temperature(const ThermalProfile& profile, double t_xo_at_switch,
                           double t_env, double dt) {
    return t_env + (t_xo_at_switch - t_env) * std::exp(-dt / profile.tc);
}

double thermal_skew(const ThermalProfile& profile, double temperature) {
    const double dt = temperature - profile.t0;
    return profile.a * dt + profile.b * dt * dt + profile.c * dt * dt * dt;
}

ThermalSimulator::ThermalSimulator(const ThermalProfile& profile) : profile_(profile) {
    if (profile_.tc <= 0.0 || profile_.p <= 0.0)
        throw ConfigError("thermal profile requires tc > 0 and p > 0");
    if (profile_.t_high < profile_.t_low)
        throw ConfigError("thermal profile requires t_high >= t_low");
    switch_temps_.push_back(profile_.t0);
}

double ThermalSimulator::env_of(std::size_t interval) const {
    return (interval % 2 == 0) ? profile_.t_high : profile_.t_low;
}

void ThermalSimulator::extend_to(std::size_t interval) const {
    while (switch_temps_.size() <= interval) {
        const std::size_t n = switch_temps_.size() - 1;
        switch_temps_.push_back(
            cooling_temperature(profile_, switch_temps_[n], env_of(n), profile_.p));
    }
}

double ThermalSimulator::temperature_at(double t) const {
    if (t < 0.0) throw NumericError("thermal lookup requires t >= 0");
    const auto interval = static_cast<std::size_t>(t / profile_.p);
    extend_to(interval);
    const double dt = t - static_cast<double>(interval) * profile_.p;
    return cooling_temperature(profile_, switch_temps_[interval], env_of(interval), dt);
}

double ThermalSimulator::skew_at(double t) const {
    return thermal_skew(profile_, temperature_at(t));
}

std::vector<ThermalSample> thermal_trajectory(const ThermalProfile& profile,
                                              double horizon, double step) {
    if (horizon <= 0.0 || step <= 0.0)
        throw ConfigError("thermal trajectory requires horizon > 0 and step > 0");
    ThermalSimulator sim(profile);
    std::vector<ThermalSample> out;
    out.reserve(static_cast<std::size_t>(horizon / step) + 1);
    for (double t = 0.0; t <= horizon; t += step) {
        const double temp = sim.temperature_at(t);
        out.push_back({t, temp, thermal_skew(profile, temp)});
    }
    return out;
}

ClockState step_state(const ClockState& state, const NoiseProfile& noise,
                      double thermal, double tau, RngStream& rng) {
    if (tau <= 0.0) throw ConfigError("state step requires tau > 0");
    const double w_theta = std::sqrt(noise.var_theta) * rng.gaussian();
    const double w_gamma = std::sqrt(noise.var_gamma) * rng.gaussian();
    ClockState next;
    next.theta = state.theta + state.total_skew() * tau + w_theta;
    next.gamma_rw = state.gamma_rw + w_gamma;
    next.gamma_thermal = thermal;
    next.d = state.d;
    return next;
}

}  // namespace tsync

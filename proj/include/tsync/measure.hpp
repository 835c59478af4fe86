#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tsync/exchange.hpp"

namespace tsync {

// Per-exchange samples of delay, offset and skew derived from t1..t4.
struct MeasurementSample {
    double d_check = 0.0;      // [s]
    double theta_sr = 0.0;     // [s]
    double theta_rs = 0.0;     // [s]
    double gamma_check = 0.0;  // dimensionless
};

// ((1 - gamma) * (t4 - t1) - (t3 - t2)) / 2. Throws NumericError when t4 <= t1.
double delay_sample(double t1, double t2, double t3, double t4, double gamma);

// (theta_sr, theta_rs) = (t1 - (t2 - d), t4 - (t3 + d)).
std::pair<double, double> offset_samples(double t1, double t2, double t3, double t4,
                                         double d);

// 1 - (t3 + d - (t2 - d)) / (t4 - t1). Throws NumericError when t4 <= t1.
double skew_sample(double t1, double t2, double t3, double t4, double d);

MeasurementSample measure_exchange(const ExchangeRecord& rec, double gamma, double d);

// Arithmetic mean of the window's delay samples, each computed with the
// previous skew estimate. Degenerate exchanges (t4 <= t1) are skipped; an
// empty effective window is an error.
double windowed_delay_estimate(std::span<const ExchangeRecord> window, double gamma_prev);

// Systematic delay-estimation error induced by path asymmetry, computed from
// the profile means: (mean SR path - mean RS path) / 2, with n_mu applied to
// the receiver-side latencies.
double asymmetry_bias(const DelayProfile& profile);

// Running form of the windowed simplification: the delay estimate over a
// sliding window feeds the next skew estimate. The conventional initial skew
// estimate is 1; it is configurable because it only matters for the first step.
class RunningDelayEstimator {
public:
    explicit RunningDelayEstimator(std::size_t window_exchanges, double initial_gamma = 1.0);

    void observe(const ExchangeRecord& rec);
    double delay() const { return delay_; }
    double gamma() const { return gamma_; }
    std::size_t size() const { return window_.size(); }

private:
    std::size_t capacity_;
    std::vector<ExchangeRecord> window_;
    double gamma_;
    double delay_ = 0.0;
};

}  // namespace tsync

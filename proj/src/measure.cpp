#include "tsync/measure.hpp"

#include "tsync/errors.hpp"

namespace tsync {

namespace {

void require_forward_interval(double t1, double t4) {
    if (!(t4 > t1))
        throw NumericError("degenerate exchange: t4 <= t1");
}

double mean_propagation(const PropagationSpec& spec) {
    return spec.value;  // deterministic value and exponential mean coincide
}

}  // namespace

double delay_sample(double t1, double t2, double t3, double t4, double gamma) {
    require_forward_interval(t1, t4);
    return ((1.0 - gamma) * (t4 - t1) - (t3 - t2)) / 2.0;
}

std::pair<double, double> offset_samples(double t1, double t2, double t3, double t4,
                                         double d) {
    return {t1 - (t2 - d), t4 - (t3 + d)};
}

double skew_sample(double t1, double t2, double t3, double t4, double d) {
    require_forward_interval(t1, t4);
    return 1.0 - (t3 + d - (t2 - d)) / (t4 - t1);
}

MeasurementSample measure_exchange(const ExchangeRecord& rec, double gamma, double d) {
    MeasurementSample s;
    s.d_check = delay_sample(rec.t1, rec.t2, rec.t3, rec.t4, gamma);
    std::tie(s.theta_sr, s.theta_rs) = offset_samples(rec.t1, rec.t2, rec.t3, rec.t4, d);
    s.gamma_check = skew_sample(rec.t1, rec.t2, rec.t3, rec.t4, d);
    return s;
}

double windowed_delay_estimate(std::span<const ExchangeRecord> window, double gamma_prev) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : window) {
        if (!(rec.t4 > rec.t1)) continue;
        sum += delay_sample(rec.t1, rec.t2, rec.t3, rec.t4, gamma_prev);
        ++n;
    }
    if (n == 0) throw NumericError("delay estimate over an empty window");
    return sum / static_cast<double>(n);
}

double asymmetry_bias(const DelayProfile& profile) {
    const double path_sr = mean_propagation(profile.prop_sr) +
                           profile.rec_r.mean * profile.n_mu - profile.send_s.mean;
    const double path_rs = mean_propagation(profile.prop_rs) + profile.rec_s.mean -
                           profile.send_r.mean * profile.n_mu;
    return (path_sr - path_rs) / 2.0;
}

RunningDelayEstimator::RunningDelayEstimator(std::size_t window_exchanges,
                                             double initial_gamma)
    : capacity_(window_exchanges), gamma_(initial_gamma) {
    if (capacity_ == 0) throw ConfigError("delay estimator window must hold >= 1 exchange");
}

void RunningDelayEstimator::observe(const ExchangeRecord& rec) {
    window_.push_back(rec);
    if (window_.size() > capacity_) window_.erase(window_.begin());
    delay_ = windowed_delay_estimate(window_, gamma_);
    if (rec.t4 > rec.t1)
        gamma_ = skew_sample(rec.t1, rec.t2, rec.t3, rec.t4, delay_);
}

}  // namespace tsync

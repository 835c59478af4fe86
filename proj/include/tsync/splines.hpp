#pragma once

#include <array>
#include <deque>
#include <span>
#include <vector>

#include "tsync/exchange.hpp"

namespace tsync {

struct WindowPoint {
    double x;  // sender timescale [s]
    double y;  // receiver timescale [s]
};

// Regression window over the last K+1 exchanges: two points per exchange,
// (t1, t2) followed by (t4, t3), in exchange order. Even indices are the
// forward-direction points, odd ones the return direction; the delay
// correction replaces y with t2-d / t3+d respectively.
struct InfoWindow {
    std::vector<WindowPoint> points;

    static InfoWindow from_records(std::span<const ExchangeRecord> records,
                                   bool delay_correction = false, double d = 0.0);
};

// Polynomial map from sender time to receiver time. Coefficients apply to
// (x - x_shift); the shift keeps the fit conditioned on large absolute times.
struct SplineFit {
    int order = 1;
    double x_shift = 0.0;
    std::array<double, 4> coeff{};  // y = sum coeff[i] * (x - x_shift)^i

    double predict(double x) const {
        const double u = x - x_shift;
        double y = coeff[order];
        for (int i = order - 1; i >= 0; --i) y = y * u + coeff[i];
        return y;
    }
    double slope() const { return coeff[1]; }
    double intercept() const { return coeff[0]; }  // value at x = x_shift
};

// Ordinary least squares fit of the given order (1..3), vertical residuals.
// Throws ConfigError for unsupported orders and NumericError when the x
// values are insufficiently distinct for the order.
SplineFit fit_spline(const InfoWindow& window, int order);

double predict(const SplineFit& fit, double sender_time);

// Strategy seam for producing the order-1 line a window is reduced to. The
// default is the plain OLS fit; alternatives must be pure functions of the
// window.
class LineFitter {
public:
    virtual ~LineFitter() = default;
    virtual SplineFit fit_line(const InfoWindow& window) const = 0;
};

class OlsLineFitter final : public LineFitter {
public:
    SplineFit fit_line(const InfoWindow& window) const override;
};

// Fixed line, for exercising the strategy seam in tests.
class ConstantLineFitter final : public LineFitter {
public:
    ConstantLineFitter(double slope, double intercept_at_zero)
        : m_(slope), q_(intercept_at_zero) {}
    SplineFit fit_line(const InfoWindow& window) const override;

private:
    double m_;
    double q_;
};

// Keeps only the exchanges with the smallest round-trip residual delay and
// fits the line on those. A rough guard against one-sided (e.g. exponential)
// delay outliers; not a substitute for a calibrated estimator.
class MinDelayLineFitter final : public LineFitter {
public:
    explicit MinDelayLineFitter(double keep_fraction = 0.3) : keep_(keep_fraction) {}
    SplineFit fit_line(const InfoWindow& window) const override;

private:
    double keep_;
};

// Sliding order-1 fit with O(1) updates per exchange. Sums are kept relative
// to the window's first point and rebased on eviction, so the running fit
// matches a batch refit of the same window to high accuracy.
class SlidingS1 {
public:
    explicit SlidingS1(std::size_t capacity_exchanges);

    void push(const ExchangeRecord& rec);
    bool full() const { return exchanges_.size() == capacity_; }
    std::size_t size() const { return exchanges_.size(); }
    SplineFit fit() const;

private:
    void add_point(double x, double y);
    void remove_point(double x, double y);
    void rebase(double x0, double y0);

    std::size_t capacity_;
    std::deque<std::array<double, 4>> exchanges_;  // x1, y1, x2, y2
    double x0_ = 0.0, y0_ = 0.0;
    double sx_ = 0.0, sy_ = 0.0, sxx_ = 0.0, sxy_ = 0.0;
    std::size_t n_ = 0;
};

// Effect of applying the delay correction d on the order-1 fit. delta_m is
// computed twice: from the closed-form difference of the two normal-equation
// solutions and by actually differencing the two fits. delta_q is the
// intercept difference at the shared x_shift.
struct DelayCorrectionGap {
    double delta_m_fit = 0.0;
    double delta_m_closed = 0.0;
    double delta_q = 0.0;
};

DelayCorrectionGap delay_correction_gap(const InfoWindow& window, double d);

}  // namespace tsync

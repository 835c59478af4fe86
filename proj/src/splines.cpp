#include "tsync/splines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsync/errors.hpp"

namespace tsync {

InfoWindow InfoWindow::from_records(std::span<const ExchangeRecord> records,
                                    bool delay_correction, double d) {
    if (records.empty()) throw NumericError("cannot build a window from zero exchanges");
    InfoWindow w;
    w.points.reserve(records.size() * 2);
    const double corr = delay_correction ? d : 0.0;
    for (const auto& r : records) {
        w.points.push_back({r.t1, r.t2 - corr});
        w.points.push_back({r.t4, r.t3 + corr});
    }
    return w;
}

namespace {

// Solves A x = b for a small symmetric system by Gaussian elimination with
// partial pivoting. Returns false when a pivot collapses.
bool solve_dense(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b,
                 int n, std::array<double, 4>& x) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return true;
}

struct ScaledCoords {
    double x0 = 0.0;
    double y0 = 0.0;
    double span = 1.0;
};

ScaledCoords coords_of(const InfoWindow& w) {
    ScaledCoords c;
    c.x0 = w.points.front().x;
    c.y0 = w.points.front().y;
    double xmax = c.x0;
    for (const auto& p : w.points) xmax = std::max(xmax, p.x);
    c.span = xmax - c.x0;
    if (c.span <= 0.0) c.span = 1.0;
    return c;
}

SplineFit fit_line_shifted(const InfoWindow& w) {
    const auto c = coords_of(w);
    const double n = static_cast<double>(w.points.size());
    double su = 0.0, sv = 0.0, suu = 0.0, suv = 0.0;
    for (const auto& p : w.points) {
        const double u = (p.x - c.x0) / c.span;
        const double v = p.y - c.y0;
        su += u;
        sv += v;
        suu += u * u;
        suv += u * v;
    }
    const double denom = suu - su * su / n;
    if (std::abs(denom) < n * 1e-12)
        throw NumericError("order-1 fit on a window without distinct x values");
    const double m_u = (suv - su * sv / n) / denom;
    const double q_u = (sv - m_u * su) / n;

    SplineFit fit;
    fit.order = 1;
    fit.x_shift = c.x0;
    fit.coeff = {c.y0 + q_u, m_u / c.span, 0.0, 0.0};
    return fit;
}

}  // namespace

SplineFit fit_spline(const InfoWindow& w, int order) {
    if (order < 1 || order > 3)
        throw ConfigError("spline order must be 1, 2 or 3, got " + std::to_string(order));
    if (w.points.size() < static_cast<std::size_t>(order) + 1)
        throw NumericError("window has fewer points than order + 1");
    if (order == 1) return fit_line_shifted(w);

    const auto c = coords_of(w);
    // Normal equations on u = (x - x0)/span, v = y - y0; both shifts keep the
    // sums small against the micro-second residual scale of interest.
    std::array<double, 7> pow_sums{};  // sum of u^j, j = 0..6
    std::array<double, 4> rhs{};
    for (const auto& p : w.points) {
        const double u = (p.x - c.x0) / c.span;
        const double v = p.y - c.y0;
        double uj = 1.0;
        for (int j = 0; j <= 2 * order; ++j) {
            pow_sums[j] += uj;
            if (j <= order) rhs[j] += uj * v;
            uj *= u;
        }
    }
    std::array<std::array<double, 4>, 4> a{};
    for (int r = 0; r <= order; ++r)
        for (int col = 0; col <= order; ++col) a[r][col] = pow_sums[r + col];

    std::array<double, 4> sol{};
    if (!solve_dense(a, rhs, order + 1, sol))
        throw NumericError("rank-deficient window: x values insufficiently distinct for order " +
                           std::to_string(order));

    SplineFit fit;
    fit.order = order;
    fit.x_shift = c.x0;
    double scale = 1.0;
    for (int i = 0; i <= order; ++i) {
        fit.coeff[i] = sol[i] / scale;
        scale *= c.span;
    }
    fit.coeff[0] += c.y0;
    return fit;
}

double predict(const SplineFit& fit, double sender_time) { return fit.predict(sender_time); }

SplineFit OlsLineFitter::fit_line(const InfoWindow& window) const {
    return fit_spline(window, 1);
}

SplineFit ConstantLineFitter::fit_line(const InfoWindow&) const {
    SplineFit fit;
    fit.order = 1;
    fit.x_shift = 0.0;
    fit.coeff = {q_, m_, 0.0, 0.0};
    return fit;
}

SplineFit MinDelayLineFitter::fit_line(const InfoWindow& window) const {
    const std::size_t exchanges = window.points.size() / 2;
    if (exchanges < 2 || window.points.size() % 2 != 0) return fit_spline(window, 1);

    // Round-trip spread (t2 - t1) + (t4 - t3) per exchange; low values mean
    // little random delay entered either direction.
    std::vector<std::size_t> idx(exchanges);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> spread(exchanges);
    for (std::size_t e = 0; e < exchanges; ++e) {
        const auto& fwd = window.points[2 * e];
        const auto& back = window.points[2 * e + 1];
        spread[e] = (fwd.y - fwd.x) + (back.x - back.y);
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t l, std::size_t r) { return spread[l] < spread[r]; });

    const auto keep = std::max<std::size_t>(2, static_cast<std::size_t>(
                                                   std::ceil(keep_ * static_cast<double>(exchanges))));
    std::vector<std::size_t> chosen(idx.begin(), idx.begin() + std::min(keep, exchanges));
    std::sort(chosen.begin(), chosen.end());

    InfoWindow sub;
    sub.points.reserve(chosen.size() * 2);
    for (const auto e : chosen) {
        sub.points.push_back(window.points[2 * e]);
        sub.points.push_back(window.points[2 * e + 1]);
    }
    return fit_spline(sub, 1);
}

SlidingS1::SlidingS1(std::size_t capacity_exchanges) : capacity_(capacity_exchanges) {
    if (capacity_ == 0) throw ConfigError("sliding fit needs a window of >= 1 exchange");
}

void SlidingS1::add_point(double x, double y) {
    const double u = x - x0_;
    const double v = y - y0_;
    sx_ += u;
    sy_ += v;
    sxx_ += u * u;
    sxy_ += u * v;
    ++n_;
}

void SlidingS1::remove_point(double x, double y) {
    const double u = x - x0_;
    const double v = y - y0_;
    sx_ -= u;
    sy_ -= v;
    sxx_ -= u * u;
    sxy_ -= u * v;
    --n_;
}

void SlidingS1::rebase(double x0, double y0) {
    const double dx = x0 - x0_;
    const double dy = y0 - y0_;
    const double n = static_cast<double>(n_);
    // Shift x first, then y; each translation is exact algebra on the sums.
    sxx_ += dx * dx * n - 2.0 * dx * sx_;
    sxy_ += dx * dy * n - dx * sy_ - dy * sx_;
    sx_ -= dx * n;
    sy_ -= dy * n;
    x0_ = x0;
    y0_ = y0;
}

void SlidingS1::push(const ExchangeRecord& rec) {
    if (exchanges_.empty()) {
        x0_ = rec.t1;
        y0_ = rec.t2;
        sx_ = sy_ = sxx_ = sxy_ = 0.0;
        n_ = 0;
    }
    exchanges_.push_back({rec.t1, rec.t2, rec.t4, rec.t3});
    add_point(rec.t1, rec.t2);
    add_point(rec.t4, rec.t3);
    if (exchanges_.size() > capacity_) {
        const auto& old = exchanges_.front();
        remove_point(old[0], old[1]);
        remove_point(old[2], old[3]);
        exchanges_.pop_front();
        rebase(exchanges_.front()[0], exchanges_.front()[1]);
    }
}

SplineFit SlidingS1::fit() const {
    if (n_ < 2) throw NumericError("sliding fit needs at least one exchange");
    const double n = static_cast<double>(n_);
    const double denom = sxx_ - sx_ * sx_ / n;
    if (std::abs(denom) < n * 1e-12)
        throw NumericError("sliding fit on a window without distinct x values");
    const double m = (sxy_ - sx_ * sy_ / n) / denom;

    SplineFit fit;
    fit.order = 1;
    fit.x_shift = x0_;
    fit.coeff = {y0_ + (sy_ - m * sx_) / n, m, 0.0, 0.0};
    return fit;
}

DelayCorrectionGap delay_correction_gap(const InfoWindow& window, double d) {
    const SplineFit plain = fit_spline(window, 1);

    InfoWindow corrected = window;
    for (std::size_t i = 0; i < corrected.points.size(); ++i) {
        if (i % 2 == 0)
            corrected.points[i].y -= d;
        else
            corrected.points[i].y += d;
    }
    const SplineFit with_corr = fit_spline(corrected, 1);

    DelayCorrectionGap gap;
    gap.delta_m_fit = with_corr.slope() - plain.slope();
    gap.delta_q = with_corr.intercept() - plain.intercept();

    // Closed form of the slope difference: the y shifts cancel in the mean, so
    // only the covariance with x survives.
    const double x0 = window.points.front().x;
    const double n = static_cast<double>(window.points.size());
    double sx = 0.0, sxx = 0.0, alt = 0.0;
    for (std::size_t i = 0; i < window.points.size(); ++i) {
        const double u = window.points[i].x - x0;
        sx += u;
        sxx += u * u;
        alt += (i % 2 == 0) ? -u : u;
    }
    gap.delta_m_closed = d * alt / (sxx - sx * sx / n);
    return gap;
}

}  // namespace tsync

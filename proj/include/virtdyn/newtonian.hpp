#pragma once

// Reference solution of x'' = gamma / (2 x^2) (repulsion from a particle
// fixed at the origin). Adaptive Dormand-Prince 5(4) with quintic Hermite
// dense output; the acceleration is known in closed form at every knot, so
// interpolating x, x', x'' costs nothing extra.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "virtdyn/error.hpp"
#include "virtdyn/quadrature.hpp"

namespace virtdyn {

struct PhasePoint {
    double x;
    double v;
};

struct Energies {
    double kinetic;   // T = v^2 / 2
    double potential; // U = gamma/(2x) - gamma/(2 x0)
};

inline Energies energies(double x, double v, double gamma, double x0)
{
    if (!(x > 0.0)) fail(ErrorCode::InvalidArgument, "position must be > 0");
    return {0.5 * v * v, gamma / (2.0 * x) - gamma / (2.0 * x0)};
}

inline double terminal_velocity(double gamma, double x0, double v0)
{
    if (!(gamma > 0.0)) fail(ErrorCode::NonPositiveParameter, "gamma must be > 0");
    if (!(x0 > 0.0)) fail(ErrorCode::InvalidArgument, "x0 must be > 0");
    return std::sqrt(v0 * v0 + gamma / x0);
}

class NewtonianSolution {
public:
    double gamma() const noexcept { return gamma_; }
    double x0() const noexcept { return x_.front(); }
    double v0() const noexcept { return v_.front(); }
    double tol() const noexcept { return tol_; }
    double s_max() const noexcept { return s_.back(); }
    std::size_t knot_count() const noexcept { return s_.size(); }
    const std::vector<double>& knots() const noexcept { return s_; }

    double acceleration_at(double x) const noexcept { return gamma_ / (2.0 * x * x); }

    PhasePoint at(double s) const
    {
        if (!(s >= 0.0 && s <= s_max()))
            fail(ErrorCode::OutOfRange, "s = " + std::to_string(s) + " outside [0, " +
                                            std::to_string(s_max()) + "]");
        auto it = std::upper_bound(s_.begin(), s_.end(), s);
        std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
        if (i + 1 >= s_.size()) return {x_.back(), v_.back()};
        return hermite(i, s);
    }

    double position(double s) const { return at(s).x; }
    double velocity(double s) const { return at(s).v; }

    /// Time at which v = 0 (only for v0 < 0); bisection on the dense output.
    std::optional<double> turnaround_time() const
    {
        if (v0() >= 0.0) return std::nullopt;
        auto it = std::find_if(v_.begin(), v_.end(), [](double v) { return v >= 0.0; });
        if (it == v_.end()) return std::nullopt;
        const auto j = static_cast<std::size_t>(it - v_.begin());
        return bisect(s_[j - 1], s_[j], [this](double s) { return velocity(s); }, 0.0);
    }

    /// Time s at which x(s) = x on the requested branch (incoming: v < 0
    /// before the turnaround; outgoing: after it). nullopt if not reached.
    std::optional<double> time_at_position(double x, bool outgoing = true) const
    {
        const auto turn = turnaround_time();
        double lo = 0.0;
        double hi = s_max();
        if (outgoing) {
            if (v0() < 0.0 && !turn) return std::nullopt;
            lo = turn.value_or(0.0);
        } else {
            if (v0() >= 0.0) return std::nullopt;
            hi = turn.value_or(s_max());
        }
        const double x_lo = position(lo);
        const double x_hi = position(hi);
        if (x < std::min(x_lo, x_hi) || x > std::max(x_lo, x_hi)) return std::nullopt;
        return bisect(lo, hi, [this](double s) { return position(s); }, x);
    }

private:
    friend NewtonianSolution solve(double, double, double, double, double);

    PhasePoint hermite(std::size_t i, double s) const
    {
        const double h = s_[i + 1] - s_[i];
        const double th = (s - s_[i]) / h;
        const double t2 = th * th, t3 = t2 * th, t4 = t3 * th, t5 = t4 * th;
        const double a0 = acceleration_at(x_[i]);
        const double a1 = acceleration_at(x_[i + 1]);

        const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        const double h1 = th - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
        const double h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        const double h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        const double x = h0 * x_[i] + h * (h1 * v_[i] + h4 * v_[i + 1]) +
                         h * h * (h2 * a0 + h3 * a1) + h5 * x_[i + 1];

        const double d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        const double d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        const double d2 = th - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        const double d3 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        const double d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        const double d5 = -d0;
        const double v = (d0 * x_[i] + d5 * x_[i + 1]) / h + d1 * v_[i] + d4 * v_[i + 1] +
                         h * (d2 * a0 + d3 * a1);
        return {x, v};
    }

    // f must be monotone on [lo, hi] and bracket target.
    template <class F>
    static double bisect(double lo, double hi, const F& f, double target)
    {
        const bool increasing = f(hi) >= f(lo);
        for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool below = f(mid) < target;
            if (below == increasing) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    double gamma_ = 0.0;
    double tol_ = 0.0;
    std::vector<double> s_;
    std::vector<double> x_;
    std::vector<double> v_;
};

namespace detail {

struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b*, the embedded 4th-order difference.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

} // namespace detail

/// Integrates from s = 0 to s_max with local error controlled to `tol`
/// (mixed absolute/relative per component).
inline NewtonianSolution solve(double gamma, double x0, double v0, double s_max, double tol = 1e-12)
{
    if (!(gamma > 0.0)) fail(ErrorCode::NonPositiveParameter, "gamma must be > 0");
    if (!(x0 > 0.0)) fail(ErrorCode::InvalidArgument, "x0 must be > 0");
    if (!(s_max >= 0.0) || !std::isfinite(s_max))
        fail(ErrorCode::InvalidArgument, "s_max must be finite and >= 0");
    if (!(tol >= 1e-14 && tol <= 1e-6))
        fail(ErrorCode::InvalidArgument, "tol must lie in [1e-14, 1e-6]");

    using K = detail::DormandPrince;
    NewtonianSolution sol;
    sol.gamma_ = gamma;
    sol.tol_ = tol;
    sol.s_.push_back(0.0);
    sol.x_.push_back(x0);
    sol.v_.push_back(v0);

    auto accel = [gamma](double x) { return gamma / (2.0 * x * x); };
    const double speed = std::max(std::abs(v0), std::sqrt(gamma / x0));
    double h = std::min(1e-3 * x0 / speed, std::max(s_max, 1e-300));

    double s = 0.0, x = x0, v = v0;
    // FSAL: the last stage of an accepted step is the first of the next.
    double kx1 = v, kv1 = accel(x);
    constexpr long max_steps = 50'000'000;
    long steps = 0;
    while (s < s_max) {
        if (++steps > max_steps)
            fail(ErrorCode::ToleranceUnachievable, "step budget exhausted");
        if (s + h > s_max || s + 1.0001 * h >= s_max) h = s_max - s;
        if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s))))
            fail(ErrorCode::ToleranceUnachievable,
                 "step size underflow at s = " + std::to_string(s));

        const double x2 = x + h * K::a21 * kx1;
        const double v2 = v + h * K::a21 * kv1;
        const double kx2 = v2, kv2 = accel(x2);
        const double x3 = x + h * (K::a31 * kx1 + K::a32 * kx2);
        const double v3 = v + h * (K::a31 * kv1 + K::a32 * kv2);
        const double kx3 = v3, kv3 = accel(x3);
        const double x4 = x + h * (K::a41 * kx1 + K::a42 * kx2 + K::a43 * kx3);
        const double v4 = v + h * (K::a41 * kv1 + K::a42 * kv2 + K::a43 * kv3);
        const double kx4 = v4, kv4 = accel(x4);
        const double x5 = x + h * (K::a51 * kx1 + K::a52 * kx2 + K::a53 * kx3 + K::a54 * kx4);
        const double v5 = v + h * (K::a51 * kv1 + K::a52 * kv2 + K::a53 * kv3 + K::a54 * kv4);
        const double kx5 = v5, kv5 = accel(x5);
        const double x6 =
            x + h * (K::a61 * kx1 + K::a62 * kx2 + K::a63 * kx3 + K::a64 * kx4 + K::a65 * kx5);
        const double v6 =
            v + h * (K::a61 * kv1 + K::a62 * kv2 + K::a63 * kv3 + K::a64 * kv4 + K::a65 * kv5);
        const double kx6 = v6, kv6 = accel(x6);
        const double xn =
            x + h * (K::b1 * kx1 + K::b3 * kx3 + K::b4 * kx4 + K::b5 * kx5 + K::b6 * kx6);
        const double vn =
            v + h * (K::b1 * kv1 + K::b3 * kv3 + K::b4 * kv4 + K::b5 * kv5 + K::b6 * kv6);
        const double kx7 = vn, kv7 = accel(xn);

        const double ex = h * (K::e1 * kx1 + K::e3 * kx3 + K::e4 * kx4 + K::e5 * kx5 +
                               K::e6 * kx6 + K::e7 * kx7);
        const double ev = h * (K::e1 * kv1 + K::e3 * kv3 + K::e4 * kv4 + K::e5 * kv5 +
                               K::e6 * kv6 + K::e7 * kv7);
        const double sx = tol * (1.0 + std::max(std::abs(x), std::abs(xn)));
        const double sv = tol * (1.0 + std::max(std::abs(v), std::abs(vn)));
        const double err = std::sqrt(0.5 * ((ex / sx) * (ex / sx) + (ev / sv) * (ev / sv)));

        if (std::isfinite(err) && err <= 1.0 && xn > 0.0) {
            s = (h == s_max - s) ? s_max : s + h;
            x = xn;
            v = vn;
            kx1 = kx7;
            kv1 = kv7;
            sol.s_.push_back(s);
            sol.x_.push_back(x);
            sol.v_.push_back(v);
        }
        const double factor =
            std::isfinite(err) ? 0.9 * std::pow(std::max(err, 1e-10), -0.2) : 0.2;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return sol;
}

/// Flight time from x0 to x_target on the monotone branch (v0 >= 0):
///   s = integral_{x0}^{x_target} dx / sqrt(v0^2 + gamma/x0 - gamma/x).
/// With x = x0 + u^2 the (x - x0)^(-1/2) endpoint singularity at v0 = 0
/// becomes a smooth integrand.
inline double time_of_flight(double gamma, double x0, double v0, double x_target, double tol = 1e-12)
{
    if (!(gamma > 0.0)) fail(ErrorCode::NonPositiveParameter, "gamma must be > 0");
    if (!(x0 > 0.0)) fail(ErrorCode::InvalidArgument, "x0 must be > 0");
    if (v0 < 0.0) fail(ErrorCode::InvalidArgument, "time_of_flight needs v0 >= 0");
    if (!(x_target >= x0)) fail(ErrorCode::InvalidArgument, "x_target must be >= x0");
    if (x_target == x0) return 0.0;

    const double v0sq = v0 * v0;
    auto integrand = [=](double u) {
        const double u2 = u * u;
        // gamma/x0 - gamma/x written as gamma (x - x0) / (x x0) to avoid cancellation.
        const double gain = gamma / (x0 * (x0 + u2));
        if (u == 0.0) {
            if (v0 == 0.0) return 2.0 / std::sqrt(gain);
            return 0.0;
        }
        return 2.0 / std::sqrt(v0sq / u2 + gain);
    };
    const double u_max = std::sqrt(x_target - x0);
    const auto r = quad::integrate(integrand, 0.0, u_max, 0.1 * tol, tol);
    return r.value;
}

} // namespace virtdyn

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "virtdyn/error.hpp"
#include "virtdyn/newtonian.hpp"
#include "virtdyn/parallel.hpp"
#include "virtdyn/recurrence.hpp"

namespace virtdyn {

/// How the discrete states are joined into a curve y(t), w(t).
///   jump:   y = y_n + w_n (t - t_n), w = w_n on [t_n, t_n+1); y jumps by
///           alpha at each t_n; both right-continuous.
///   smooth: y = y_n + w_n tau + a_n tau^2 / 2, w = w_n + a_n tau; continuous.
/// Either way the result is clamped into [y_n, y_n+1] x [w_n, w_n+1].
enum class InterpolationMode { jump, smooth };

constexpr std::string_view to_string(InterpolationMode m) noexcept
{
    return m == InterpolationMode::jump ? "jump" : "smooth";
}

inline std::optional<InterpolationMode> parse_interpolation_mode(std::string_view s)
{
    if (s == "jump") return InterpolationMode::jump;
    if (s == "smooth") return InterpolationMode::smooth;
    return std::nullopt;
}

struct CurvePoint {
    double y;
    double w;
};

inline CurvePoint interpolate(const DiscreteTrajectory& traj, double t, InterpolationMode mode)
{
    const auto& st = traj.states();
    if (!(t >= st.front().t && t <= st.back().t))
        fail(ErrorCode::OutOfRange, "t = " + std::to_string(t) + " outside the trajectory span");
    auto it = std::upper_bound(st.begin(), st.end(), t,
                               [](double value, const ModelState& s) { return value < s.t; });
    const auto k = static_cast<std::size_t>(it - st.begin()) - 1;
    if (k + 1 == st.size()) return {st[k].y, st[k].w};

    const ModelState& lo = st[k];
    const ModelState& hi = st[k + 1];
    const double tau = t - lo.t;
    double y = lo.y + lo.w * tau;
    double w = lo.w;
    if (mode == InterpolationMode::smooth) {
        const double a = traj.increments()[k].a;
        y += 0.5 * a * tau * tau;
        w += a * tau;
    }
    y = std::clamp(y, std::min(lo.y, hi.y), std::max(lo.y, hi.y));
    w = std::clamp(w, std::min(lo.w, hi.w), std::max(lo.w, hi.w));
    return {y, w};
}

struct SupError {
    double sup_y = 0.0;
    double sup_w = 0.0;
    double t_at_sup_y = 0.0;
    double t_at_sup_w = 0.0;
    std::size_t samples = 0;
};

/// sup over t <= t_{ceil(A c)} of |y(t) - x(t)| and |w(t) - v(t)|, sampled at
/// every knot and `interior` equally spaced points inside each interval.
inline SupError sup_error(const DiscreteTrajectory& traj, const NewtonianSolution& ref,
                          InterpolationMode mode, double horizon_A, int interior = 10)
{
    const auto n_steps = static_cast<std::size_t>(horizon_steps(traj.params(), horizon_A));
    if (traj.step_count() < n_steps)
        fail(ErrorCode::InsufficientTrajectory,
             "trajectory has " + std::to_string(traj.step_count()) + " steps, horizon needs " +
                 std::to_string(n_steps));
    const auto& st = traj.states();
    SupError out;
    auto sample = [&](double t) {
        const CurvePoint d = interpolate(traj, t, mode);
        const PhasePoint r = ref.at(t);
        const double ey = std::abs(d.y - r.x);
        const double ew = std::abs(d.w - r.v);
        if (ey > out.sup_y) {
            out.sup_y = ey;
            out.t_at_sup_y = t;
        }
        if (ew > out.sup_w) {
            out.sup_w = ew;
            out.t_at_sup_w = t;
        }
        ++out.samples;
    };
    for (std::size_t k = 0; k <= n_steps; ++k) {
        sample(st[k].t);
        if (k == n_steps) break;
        const double span = st[k + 1].t - st[k].t;
        for (int j = 1; j <= interior; ++j)
            sample(st[k].t + span * static_cast<double>(j) / static_cast<double>(interior + 1));
    }
    return out;
}

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0; // log of the prefactor
};

/// Least-squares line through (log x, log y).
inline LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size() || xs.size() < 2)
        fail(ErrorCode::InvalidArgument, "log-log fit needs at least two paired points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0 && ys[i] > 0.0))
            fail(ErrorCode::InvalidArgument, "log-log fit needs positive data");
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) fail(ErrorCode::InvalidArgument, "log-log fit needs distinct x values");
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

struct ConvergenceReport {
    double gamma = 0.0;
    double y0 = 0.0;
    double w0 = 0.0;
    double horizon_A = 0.0;
    InterpolationMode mode = InterpolationMode::jump;
    std::vector<double> c_values;
    std::vector<double> sup_errors_y;
    std::vector<double> sup_errors_w;
    double fitted_rate_y = 0.0;
    double fitted_rate_w = 0.0;
    double fitted_B_y = 0.0; // sup_y ~ B c^rate
    double fitted_B_w = 0.0;
    /// Smallest tested c from which sup_y decreases monotonically.
    std::optional<double> decay_onset_c;
};

inline void validate_c_list(std::span<const double> c_list)
{
    if (c_list.size() < 3) fail(ErrorCode::InvalidArgument, "need ≥3 c values");
    for (std::size_t i = 0; i < c_list.size(); ++i) {
        if (!(c_list[i] > 0.0)) fail(ErrorCode::NonPositiveParameter, "c values must be > 0");
        if (i > 0 && !(c_list[i] > c_list[i - 1]))
            fail(ErrorCode::InvalidArgument, "c values must be strictly increasing");
    }
}

/// Runs the model and the reference for every c and fits error ~ B c^rate.
inline ConvergenceReport rate_sweep(double gamma, double y0, double w0, double horizon_A,
                                    std::span<const double> c_list, InterpolationMode mode,
                                    unsigned threads = sweep_threads(), double ref_tol = 1e-12)
{
    validate_c_list(c_list);
    if (!(horizon_A > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be > 0");

    ConvergenceReport rep;
    rep.gamma = gamma;
    rep.y0 = y0;
    rep.w0 = w0;
    rep.horizon_A = horizon_A;
    rep.mode = mode;
    rep.c_values.assign(c_list.begin(), c_list.end());
    rep.sup_errors_y.assign(c_list.size(), 0.0);
    rep.sup_errors_w.assign(c_list.size(), 0.0);

    parallel_for(
        c_list.size(),
        [&](std::size_t i) {
            const ModelParams p(c_list[i], gamma);
            const auto n = horizon_steps(p, horizon_A);
            const DiscreteTrajectory traj = run(p, y0, w0, n);
            if (traj.truncation())
                fail(ErrorCode::NumericOverflow, "trajectory overflowed before the horizon");
            const NewtonianSolution ref = solve(gamma, y0, w0, traj.last().t, ref_tol);
            const SupError e = sup_error(traj, ref, mode, horizon_A);
            rep.sup_errors_y[i] = e.sup_y;
            rep.sup_errors_w[i] = e.sup_w;
        },
        threads);

    const LogLogFit fy = fit_loglog(rep.c_values, rep.sup_errors_y);
    const LogLogFit fw = fit_loglog(rep.c_values, rep.sup_errors_w);
    rep.fitted_rate_y = fy.slope;
    rep.fitted_rate_w = fw.slope;
    rep.fitted_B_y = std::exp(fy.intercept);
    rep.fitted_B_w = std::exp(fw.intercept);

    for (std::size_t start = 0; start + 1 < c_list.size(); ++start) {
        bool decreasing = true;
        for (std::size_t i = start; i + 1 < c_list.size(); ++i)
            decreasing = decreasing && rep.sup_errors_y[i + 1] < rep.sup_errors_y[i];
        if (decreasing) {
            rep.decay_onset_c = c_list[start];
            break;
        }
    }
    return rep;
}

} // namespace virtdyn

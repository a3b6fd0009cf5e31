#pragma once

// Discrete virtual-particle model: particle 1 pinned at the origin, particle 2
// at y > 0, and a massless carrier bouncing between them at speed c. Every
// time the carrier returns to particle 2 the recurrence advances one step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "virtdyn/compensated.hpp"
#include "virtdyn/error.hpp"

namespace virtdyn {

/// Signal speed c, coupling gamma and the derived jump length
/// alpha = gamma / c^2. alpha is always recomputed from (c, gamma).
class ModelParams {
public:
    ModelParams(double c, double gamma) : c_(c), gamma_(gamma)
    {
        if (!(c > 0.0) || !std::isfinite(c))
            fail(ErrorCode::NonPositiveParameter, "c must be > 0, got " + std::to_string(c));
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            fail(ErrorCode::NonPositiveParameter, "gamma must be > 0, got " + std::to_string(gamma));
        alpha_ = gamma / (c * c);
    }

    double c() const noexcept { return c_; }
    double gamma() const noexcept { return gamma_; }
    double alpha() const noexcept { return alpha_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    double c_;
    double gamma_;
    double alpha_ = 0.0;
};

inline ModelParams make_params(double c, double gamma) { return ModelParams(c, gamma); }

struct ModelState {
    std::int64_t n = 0;
    double t = 0.0;
    double y = 0.0;
    double w = 0.0;

    friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Increments of one step. `a` is the piecewise-constant acceleration of the
/// smooth interpretation, 2*alpha/dt^2.
struct StepIncrements {
    double dt = 0.0;
    double dy = 0.0;
    double dw = 0.0;
    double a = 0.0;
};

struct StepResult {
    ModelState state;
    StepIncrements increments;
};

/// The three algebraically equivalent ways of writing one step.
enum class Formulation {
    jump,         // closed forms for dt, dy = alpha + w dt, dw = c alpha (1 - w/c) / (y + alpha/2)
    acceleration, // constant acceleration a = 2 alpha / dt^2 over the interval
    implicit,     // meeting-time equation c dt = 2y + alpha + w dt, then dw = 2 alpha / dt
};

/// Compensation terms of the t, y, w accumulators (see CompensatedSum).
struct Carry {
    double t = 0.0;
    double y = 0.0;
    double w = 0.0;

    friend bool operator==(const Carry&, const Carry&) = default;
};

namespace detail {

inline void require_steppable(const ModelState& s, const ModelParams& p)
{
    if (!(std::abs(s.w) < p.c()))
        fail(ErrorCode::VelocityAtSignalSpeed,
             "velocity " + std::to_string(s.w) + " is not below the signal speed " +
                 std::to_string(p.c()) + " at step " + std::to_string(s.n));
    if (!(s.y + 0.5 * p.alpha() > 0.0))
        fail(ErrorCode::DegenerateGeometry,
             "y + alpha/2 must be > 0 at step " + std::to_string(s.n));
}

} // namespace detail

/// Solves dt = (2y + alpha + w dt) / c for dt, rounded once.
inline double implicit_meeting_time(const ModelState& s, const ModelParams& p)
{
    detail::require_steppable(s, p);
    return ((DoubleDouble(2.0 * s.y) + p.alpha()) / (DoubleDouble(p.c()) - s.w)).hi;
}

namespace detail {

struct ExtendedIncrements {
    DoubleDouble dt, dy, dw, a;
};

// Each formulation is evaluated with its own algebra in double-double, so the
// three agree far below double rounding and their sums round identically.
inline ExtendedIncrements extended_increments(const ModelState& s, const ModelParams& p,
                                              Formulation form)
{
    require_steppable(s, p);
    const double alpha = p.alpha();
    const DoubleDouble w = s.w;
    const DoubleDouble dt = (DoubleDouble(2.0 * s.y) + alpha) / (DoubleDouble(p.c()) - w);
    ExtendedIncrements inc;
    inc.dt = dt;
    switch (form) {
    case Formulation::jump:
        inc.dy = DoubleDouble(alpha) + w * dt;
        inc.dw = DoubleDouble(alpha) * (DoubleDouble(p.c()) - w) / (DoubleDouble(s.y) + 0.5 * alpha);
        inc.a = inc.dw / dt;
        break;
    case Formulation::acceleration: {
        const DoubleDouble dt2 = dt * dt;
        inc.a = DoubleDouble(2.0 * alpha) / dt2;
        inc.dy = w * dt + DoubleDouble(0.5) * (inc.a * dt2);
        inc.dw = inc.a * dt;
        break;
    }
    case Formulation::implicit:
        inc.dy = DoubleDouble(alpha) + w * dt;
        inc.dw = DoubleDouble(2.0 * alpha) / dt;
        inc.a = inc.dw / dt;
        break;
    }
    return inc;
}

} // namespace detail

inline StepIncrements increments(const ModelState& s, const ModelParams& p,
                                 Formulation form = Formulation::jump)
{
    const auto x = detail::extended_increments(s, p, form);
    return {x.dt.hi, x.dy.hi, x.dw.hi, x.a.hi};
}

/// One step from `s`, continuing the compensated accumulators in `carry`.
/// Throws NumericOverflow when the next state is not representable.
inline StepResult advance(const ModelState& s, Carry& carry, const ModelParams& p,
                          Formulation form = Formulation::jump)
{
    const auto x = detail::extended_increments(s, p, form);
    const StepIncrements inc{x.dt.hi, x.dy.hi, x.dw.hi, x.a.hi};
    CompensatedSum t(s.t, carry.t);
    CompensatedSum y(s.y, carry.y);
    CompensatedSum w(s.w, carry.w);
    t += x.dt;
    y += x.dy;
    w += x.dw;
    StepResult r{{s.n + 1, t.value(), y.value(), w.value()}, inc};
    if (!std::isfinite(inc.dt) || !std::isfinite(inc.dy) || !std::isfinite(r.state.t) ||
        !std::isfinite(r.state.y) || !std::isfinite(inc.a) || !std::isfinite(y.carry()))
        fail(ErrorCode::NumericOverflow,
             "state leaves the double range at step " + std::to_string(r.state.n));
    carry = {t.carry(), y.carry(), w.carry()};
    return r;
}

/// Jump form: next state = state + increments.
inline StepResult step(const ModelState& s, const ModelParams& p)
{
    Carry fresh;
    return advance(s, fresh, p, Formulation::jump);
}

inline StepResult step_acceleration_form(const ModelState& s, const ModelParams& p)
{
    Carry fresh;
    return advance(s, fresh, p, Formulation::acceleration);
}

inline StepResult step_implicit_form(const ModelState& s, const ModelParams& p)
{
    Carry fresh;
    return advance(s, fresh, p, Formulation::implicit);
}

/// Why a run stopped before its requested length.
struct Truncation {
    std::int64_t requested_steps = 0;
    std::int64_t completed_steps = 0;
    std::string reason;
};

class DiscreteTrajectory {
public:
    DiscreteTrajectory(ModelParams params, ModelState initial, Formulation form = Formulation::jump)
        : params_(params), form_(form)
    {
        states_.push_back(initial);
        carries_.emplace_back();
    }

    const ModelParams& params() const noexcept { return params_; }
    Formulation formulation() const noexcept { return form_; }
    const std::vector<ModelState>& states() const noexcept { return states_; }
    const std::vector<StepIncrements>& increments() const noexcept { return increments_; }
    const ModelState& state(std::size_t k) const { return states_.at(k); }
    const Carry& carry(std::size_t k) const { return carries_.at(k); }
    const ModelState& initial() const noexcept { return states_.front(); }
    const ModelState& last() const noexcept { return states_.back(); }
    std::size_t step_count() const noexcept { return increments_.size(); }
    const std::optional<Truncation>& truncation() const noexcept { return truncation_; }

    /// Appends one step; returns false (and records why) if the next state
    /// would overflow.
    bool extend()
    {
        Carry carry = carries_.back();
        try {
            StepResult r = advance(states_.back(), carry, params_, form_);
            states_.push_back(r.state);
            increments_.push_back(r.increments);
            carries_.push_back(carry);
            return true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NumericOverflow) throw;
            truncation_ = Truncation{0, static_cast<std::int64_t>(step_count()), e.what()};
            return false;
        }
    }

    void reserve(std::size_t steps)
    {
        states_.reserve(steps + 1);
        carries_.reserve(steps + 1);
        increments_.reserve(steps);
    }

    void mark_requested(std::int64_t steps)
    {
        if (truncation_) truncation_->requested_steps = steps;
    }

private:
    ModelParams params_;
    Formulation form_;
    std::vector<ModelState> states_;
    std::vector<StepIncrements> increments_;
    std::vector<Carry> carries_;
    std::optional<Truncation> truncation_;
};

/// Evolves the model from t0 = 0, y0, w0 for n_steps steps. Stops early (and
/// reports it through truncation()) only if the state leaves the double range.
inline DiscreteTrajectory run(const ModelParams& p, double y0, double w0, std::int64_t n_steps,
                              Formulation form = Formulation::jump)
{
    if (!(y0 > 0.0) || !std::isfinite(y0))
        fail(ErrorCode::InvalidArgument, "y0 must be > 0, got " + std::to_string(y0));
    if (!(std::abs(w0) < p.c()))
        fail(ErrorCode::VelocityAtSignalSpeed, "initial speed exceeds signal speed");
    if (n_steps < 0)
        fail(ErrorCode::InvalidArgument, "n_steps must be >= 0");

    DiscreteTrajectory traj(p, ModelState{0, 0.0, y0, w0}, form);
    traj.reserve(static_cast<std::size_t>(n_steps));
    for (std::int64_t k = 0; k < n_steps; ++k) {
        if (!traj.extend()) {
            traj.mark_requested(n_steps);
            break;
        }
    }
    return traj;
}

/// Number of steps covering the horizon A: ceil(A * c).
inline std::int64_t horizon_steps(const ModelParams& p, double horizon_A)
{
    if (!(horizon_A >= 0.0) || !std::isfinite(horizon_A))
        fail(ErrorCode::InvalidArgument, "horizon must be >= 0");
    // A c that lands within rounding of an integer counts as that integer.
    const double x = horizon_A * p.c();
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::int64_t>(nearest);
    return static_cast<std::int64_t>(std::ceil(x));
}

struct SimplifiedPoint {
    double t;
    double y;
};

/// Velocity-free model: dy = alpha, dt = (2 y_n + alpha) / c from t0 = 0.
/// Summed: y_n = y0 + n alpha, t_n = (2 n y0 + n^2 alpha) / c.
inline SimplifiedPoint simplified_closed_form(const ModelParams& p, double y0, std::int64_t n)
{
    if (!(y0 > 0.0)) fail(ErrorCode::InvalidArgument, "y0 must be > 0");
    if (n < 0) fail(ErrorCode::InvalidArgument, "n must be >= 0");
    const double nd = static_cast<double>(n);
    return {(2.0 * nd * y0 + nd * nd * p.alpha()) / p.c(), y0 + nd * p.alpha()};
}

/// First index N with w_N >= 0; 0 when w0 >= 0, nullopt if never reached.
inline std::optional<std::int64_t> turnaround_index(const DiscreteTrajectory& traj)
{
    const auto& states = traj.states();
    for (std::size_t k = 0; k < states.size(); ++k)
        if (states[k].w >= 0.0) return static_cast<std::int64_t>(k);
    return std::nullopt;
}

} // namespace virtdyn

#pragma once

// Diagnostics reconstructed from a discrete trajectory and pointwise checks
// of the model's qualitative claims (speed limit, monotonicity, turnaround,
// uniform bounds on n <= A c, inverse-square potential, energy-time product).
//
// Constants that appear only implicitly in the analysis of the model (bounds
// B1..B4, remainders of the form D c^-1) are reported as measured values:
// "max over the run" or "max deviation times c".

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "virtdyn/compensated.hpp"
#include "virtdyn/error.hpp"
#include "virtdyn/newtonian.hpp"
#include "virtdyn/recurrence.hpp"

namespace virtdyn {

enum class LemmaId {
    L1_speed_limit,
    L2_monotonic,
    L2_negative_branch,
    L3_bounds,
    potential_lemma,
    energy_time,
};

inline constexpr std::array<LemmaId, 6> all_lemmas{
    LemmaId::L1_speed_limit,  LemmaId::L2_monotonic,    LemmaId::L2_negative_branch,
    LemmaId::L3_bounds,       LemmaId::potential_lemma, LemmaId::energy_time};

constexpr std::string_view to_string(LemmaId id) noexcept
{
    switch (id) {
    case LemmaId::L1_speed_limit: return "L1_speed_limit";
    case LemmaId::L2_monotonic: return "L2_monotonic";
    case LemmaId::L2_negative_branch: return "L2_negative_branch";
    case LemmaId::L3_bounds: return "L3_bounds";
    case LemmaId::potential_lemma: return "potential_lemma";
    case LemmaId::energy_time: return "energy_time";
    }
    return "unknown";
}

inline std::optional<LemmaId> parse_lemma_id(std::string_view name)
{
    for (LemmaId id : all_lemmas)
        if (to_string(id) == name) return id;
    return std::nullopt;
}

struct Witness {
    std::int64_t step = 0;
    std::string quantity;
    double value = 0.0;
    double bound = 0.0;
    bool violation = false;
};

struct LemmaReport {
    LemmaId lemma_id{};
    bool passed = true;
    std::vector<Witness> witnesses;
    std::map<std::string, double> measured_constants;

    std::size_t violation_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(witnesses.begin(), witnesses.end(), [](const Witness& w) { return w.violation; }));
    }
};

/// Relative slack granted to non-strict inequalities between computed values.
inline constexpr double kRelativeSlack = 1e-12;

struct Profile {
    std::vector<double> values;
    double max_deviation = 0.0;
    double max_deviation_times_c = 0.0;
};

namespace detail {

inline void require_increments(const DiscreteTrajectory& traj)
{
    if (traj.step_count() == 0)
        fail(ErrorCode::InsufficientTrajectory, "trajectory has no steps");
}

/// Collects inequality checks: every violation (up to a cap) plus the
/// tightest non-violating margin per quantity.
class Checker {
public:
    explicit Checker(LemmaId id) { report_.lemma_id = id; }

    void upper(std::string_view quantity, std::int64_t step, double value, double bound,
               bool strict = false)
    {
        const double scale = std::max(std::abs(value), std::abs(bound));
        const bool ok = strict ? (value < bound) : (value <= bound + kRelativeSlack * scale);
        record(quantity, step, value, bound, ok, scale > 0 ? (bound - value) / scale : 0.0);
    }

    void lower(std::string_view quantity, std::int64_t step, double value, double bound,
               bool strict = false)
    {
        const double scale = std::max(std::abs(value), std::abs(bound));
        const bool ok = strict ? (value > bound) : (value >= bound - kRelativeSlack * scale);
        record(quantity, step, value, bound, ok, scale > 0 ? (value - bound) / scale : 0.0);
    }

    void measure(const std::string& name, double value) { report_.measured_constants[name] = value; }

    LemmaReport finish()
    {
        for (auto& [quantity, entry] : tightest_)
            report_.witnesses.push_back(entry.witness);
        report_.passed = report_.violation_count() == 0;
        for (auto& [quantity, count] : violations_)
            report_.measured_constants["violations." + quantity] = static_cast<double>(count);
        return std::move(report_);
    }

private:
    struct Tightest {
        Witness witness;
        double margin;
    };

    void record(std::string_view quantity, std::int64_t step, double value, double bound, bool ok,
                double margin)
    {
        const std::string key(quantity);
        if (!ok) {
            auto& count = violations_[key];
            if (count++ < kMaxViolationWitnesses)
                report_.witnesses.push_back({step, key, value, bound, true});
            return;
        }
        auto it = tightest_.find(key);
        if (it == tightest_.end() || margin < it->second.margin)
            tightest_[key] = {{step, key, value, bound, false}, margin};
    }

    static constexpr std::size_t kMaxViolationWitnesses = 16;
    LemmaReport report_;
    std::map<std::string, Tightest> tightest_;
    std::map<std::string, std::size_t> violations_;
};

} // namespace detail

/// f_n = a_n = 2 alpha / dt_n^2 on [y_n, y_{n+1}); deviation is measured
/// against the inverse-square force gamma / (2 y_n^2).
inline Profile force_profile(const DiscreteTrajectory& traj)
{
    detail::require_increments(traj);
    const ModelParams& p = traj.params();
    Profile out;
    out.values.reserve(traj.step_count());
    for (std::size_t k = 0; k < traj.step_count(); ++k) {
        const double dt = traj.increments()[k].dt;
        const double f = 2.0 * p.alpha() / (dt * dt);
        const double y = traj.states()[k].y;
        out.values.push_back(f);
        out.max_deviation = std::max(out.max_deviation, std::abs(f - p.gamma() / (2.0 * y * y)));
    }
    out.max_deviation_times_c = out.max_deviation * p.c();
    return out;
}

/// V(y_n) = -sum_{k<n} f_k dy_k (piecewise-constant force), compared with
/// gamma/(2 y_n) - gamma/(2 y_0). One value per state; V(y_0) = 0.
inline Profile potential_profile(const DiscreteTrajectory& traj, std::optional<std::size_t> last = {})
{
    detail::require_increments(traj);
    const ModelParams& p = traj.params();
    const std::size_t n_max = std::min(last.value_or(traj.step_count()), traj.step_count());
    const double y0 = traj.initial().y;
    const Profile force = force_profile(traj);

    Profile out;
    out.values.reserve(n_max + 1);
    out.values.push_back(0.0);
    CompensatedSum work;
    for (std::size_t k = 0; k < n_max; ++k) {
        work += force.values[k] * traj.increments()[k].dy;
        const double v = -work.value();
        const double y = traj.states()[k + 1].y;
        out.values.push_back(v);
        out.max_deviation =
            std::max(out.max_deviation, std::abs(v - (p.gamma() / (2.0 * y) - p.gamma() / (2.0 * y0))));
    }
    out.max_deviation_times_c = out.max_deviation * p.c();
    return out;
}

struct EnergyTimeProfile {
    std::vector<double> products; // (gamma / 2 y_n) dt_n
    std::vector<double> ratios;   // products / (gamma / c)
};

inline EnergyTimeProfile energy_time_products(const DiscreteTrajectory& traj)
{
    detail::require_increments(traj);
    const ModelParams& p = traj.params();
    EnergyTimeProfile out;
    out.products.reserve(traj.step_count());
    out.ratios.reserve(traj.step_count());
    for (std::size_t k = 0; k < traj.step_count(); ++k) {
        const double product = p.gamma() / (2.0 * traj.states()[k].y) * traj.increments()[k].dt;
        out.products.push_back(product);
        out.ratios.push_back(product / (p.gamma() / p.c()));
    }
    return out;
}

/// Max over n of |w_n^2/2 - w_0^2/2 + V(y_n)|. With f_n = 2 alpha / dt_n^2 the
/// work over one step equals the kinetic energy gained, so this is roundoff.
inline double energy_exchange_residual(const DiscreteTrajectory& traj)
{
    const Profile v = potential_profile(traj);
    const double w0 = traj.initial().w;
    double worst = 0.0;
    for (std::size_t n = 0; n < v.values.size(); ++n) {
        const double w = traj.states()[n].w;
        worst = std::max(worst, std::abs(0.5 * w * w - 0.5 * w0 * w0 + v.values[n]));
    }
    return worst;
}

struct PositionMatch {
    double max_velocity_gap = 0.0; // |w_n - v(s*)| with x(s*) = y_n
    double max_time_gap = 0.0;     // |t_n - s*|
    std::size_t compared = 0;
    std::size_t skipped = 0;
};

/// Compares the discrete and reference motions at equal positions rather
/// than equal times. States whose position the reference never reaches on
/// the same branch (possible right at a turnaround) are skipped.
inline PositionMatch compare_at_equal_positions(const DiscreteTrajectory& traj,
                                                const NewtonianSolution& ref,
                                                std::optional<std::size_t> last = {})
{
    const std::size_t n_max = std::min(last.value_or(traj.step_count()), traj.step_count());
    PositionMatch out;
    for (std::size_t n = 0; n <= n_max; ++n) {
        const ModelState& s = traj.states()[n];
        const auto when = ref.time_at_position(s.y, s.w >= 0.0);
        if (!when) {
            ++out.skipped;
            continue;
        }
        ++out.compared;
        out.max_velocity_gap = std::max(out.max_velocity_gap, std::abs(s.w - ref.velocity(*when)));
        out.max_time_gap = std::max(out.max_time_gap, std::abs(s.t - *when));
    }
    return out;
}

namespace detail {

inline LemmaReport check_speed_limit(const DiscreteTrajectory& traj)
{
    Checker ck(LemmaId::L1_speed_limit);
    const double c = traj.params().c();
    double max_w = 0.0;
    double min_y = traj.initial().y;
    const auto& st = traj.states();
    for (std::size_t n = 0; n < st.size(); ++n) {
        const auto i = static_cast<std::int64_t>(n);
        ck.upper("|w_n|", i, std::abs(st[n].w), c, true);
        ck.lower("y_n", i, st[n].y, 0.0, true);
        if (n > 0) ck.lower("t_n", i, st[n].t, st[n - 1].t, true);
        max_w = std::max(max_w, std::abs(st[n].w));
        min_y = std::min(min_y, st[n].y);
    }
    ck.measure("max_abs_w", max_w);
    ck.measure("max_abs_w_over_c", max_w / c);
    ck.measure("min_y", min_y);
    ck.measure("steps", static_cast<double>(traj.step_count()));
    ck.measure("overflow_step", traj.truncation() ? static_cast<double>(traj.step_count()) : -1.0);
    return ck.finish();
}

inline std::int64_t require_turnaround(const DiscreteTrajectory& traj)
{
    const auto turn = turnaround_index(traj);
    if (!turn)
        fail(ErrorCode::InsufficientTrajectory,
             "trajectory ends before the velocity turns nonnegative");
    return *turn;
}

inline LemmaReport check_monotonic(const DiscreteTrajectory& traj)
{
    Checker ck(LemmaId::L2_monotonic);
    // For w0 < 0 the claims apply from the turnaround onward.
    const auto start = static_cast<std::size_t>(require_turnaround(traj));
    const double c = traj.params().c();
    const auto& st = traj.states();
    const auto& inc = traj.increments();
    std::size_t stalled_w = 0;
    for (std::size_t n = start; n < st.size(); ++n) {
        const auto i = static_cast<std::int64_t>(n);
        ck.upper("w_n", i, st[n].w, c, true);
        if (n > start) {
            ck.lower("t_n increasing", i, st[n].t, st[n - 1].t, true);
            ck.lower("y_n increasing", i, st[n].y, st[n - 1].y, true);
            ck.lower("w_n increasing", i, st[n].w, st[n - 1].w);
            if (st[n].w == st[n - 1].w) ++stalled_w;
        }
        if (n + 1 < st.size()) {
            ck.lower("dw_n positive", i, inc[n].dw, 0.0, true);
            if (n > start) {
                ck.lower("dt_n increasing", i, inc[n].dt, inc[n - 1].dt);
                ck.lower("dy_n increasing", i, inc[n].dy, inc[n - 1].dy);
                ck.upper("dw_n decreasing", i, inc[n].dw, inc[n - 1].dw);
            }
        }
    }
    ck.measure("start_index", static_cast<double>(start));
    ck.measure("w_last", st.back().w);
    ck.measure("w_last_over_c", st.back().w / c);
    ck.measure("stalled_w_steps", static_cast<double>(stalled_w));
    return ck.finish();
}

inline double turnaround_bound_b4(const DiscreteTrajectory& traj)
{
    const ModelParams& p = traj.params();
    const ModelState& s0 = traj.initial();
    return std::abs(s0.w) * (s0.y + 0.5 * p.alpha()) / p.gamma();
}

inline LemmaReport check_negative_branch(const DiscreteTrajectory& traj)
{
    Checker ck(LemmaId::L2_negative_branch);
    const ModelParams& p = traj.params();
    const ModelState& s0 = traj.initial();
    const double b4 = turnaround_bound_b4(traj);
    const auto n_bound = static_cast<std::int64_t>(std::ceil(b4 * p.c()));
    ck.measure("B4", b4);
    ck.measure("N_bound", static_cast<double>(n_bound));
    if (s0.w >= 0.0) {
        ck.measure("N", 0.0);
        return ck.finish();
    }

    const auto& st = traj.states();
    const auto& inc = traj.increments();
    const auto turn = turnaround_index(traj);
    if (!turn) {
        if (static_cast<std::int64_t>(traj.step_count()) <= n_bound)
            fail(ErrorCode::InsufficientTrajectory,
                 "trajectory shorter than the turnaround bound ceil(B4 c) = " + std::to_string(n_bound));
        ck.upper("N", static_cast<std::int64_t>(traj.step_count()),
                 static_cast<double>(traj.step_count()), static_cast<double>(n_bound));
        return ck.finish();
    }
    const auto big_n = static_cast<std::size_t>(*turn);
    ck.measure("N", static_cast<double>(big_n));
    ck.upper("N", *turn, static_cast<double>(big_n), static_cast<double>(n_bound));

    const double dt_cap = (2.0 * s0.y + p.alpha()) / p.c();
    for (std::size_t n = 0; n < big_n; ++n) {
        const auto i = static_cast<std::int64_t>(n);
        ck.lower("y_n positive", i, st[n].y, 0.0, true);
        ck.upper("w_n negative", i, st[n].w, 0.0, true);
        ck.lower("t_n increasing", i + 1, st[n + 1].t, st[n].t, true);
        ck.lower("w_n increasing", i + 1, st[n + 1].w, st[n].w, true);
        ck.upper("dt_n", i, inc[n].dt, dt_cap);
        // 0 < dw_n < |w_n| holds only while the next velocity is still negative.
        if (n + 1 < big_n) {
            ck.upper("y_n decreasing", i + 1, st[n + 1].y, st[n].y, true);
            ck.upper("dy_n", i, inc[n].dy, -p.alpha());
        }
    }
    ck.lower("y_N", *turn, st[big_n].y, 0.0, true);
    ck.lower("w_N", *turn, st[big_n].w, 0.0);
    if (big_n > 0) ck.upper("w_N", *turn, st[big_n].w, inc[big_n - 1].dw);
    // N <= ceil(B4 c) steps of length <= (2 y0 + alpha) / c.
    ck.upper("t_N", *turn, st[big_n].t, static_cast<double>(n_bound) * dt_cap);
    ck.measure("t_N", st[big_n].t);
    ck.measure("w_N", st[big_n].w);
    ck.measure("y_N", st[big_n].y);
    return ck.finish();
}

inline LemmaReport check_bounds(const DiscreteTrajectory& traj, double horizon_A)
{
    Checker ck(LemmaId::L3_bounds);
    const ModelParams& p = traj.params();
    const auto start = static_cast<std::size_t>(require_turnaround(traj));
    const auto window = static_cast<std::size_t>(horizon_steps(p, horizon_A));
    if (traj.step_count() < start + window)
        fail(ErrorCode::InsufficientTrajectory,
             "L3 needs " + std::to_string(start + window) + " steps, trajectory has " +
                 std::to_string(traj.step_count()));

    const auto& st = traj.states();
    const auto& inc = traj.increments();
    const ModelState& base = st[start];
    const double c = p.c();
    const double b3 = base.w + horizon_A * p.gamma() / base.y;
    double b1 = 0.0, b2_dt = 0.0, b2_dy = 0.0, b2_dw = 0.0;
    for (std::size_t n = start; n < start + window; ++n) {
        b2_dt = std::max(b2_dt, c * inc[n].dt);
        b2_dy = std::max(b2_dy, c * std::abs(inc[n].dy));
        b2_dw = std::max(b2_dw, c * inc[n].dw);
    }
    const double dw_floor = 2.0 * p.alpha() * c / b2_dt;

    for (std::size_t n = start; n <= start + window; ++n) {
        const auto i = static_cast<std::int64_t>(n);
        const double m = static_cast<double>(n - start);
        b1 = std::max({b1, st[n].t, st[n].y, st[n].w});
        ck.upper("w_n <= w0 + A gamma / y0", i, st[n].w, b3);
        ck.lower("w_n >= w0", i, st[n].w, base.w);
        ck.lower("y_n >= y0", i, st[n].y, base.y);
        ck.lower("t_n >= 2 y0 n / c", i, st[n].t - base.t, 2.0 * base.y * m / c);
        if (n < start + window) {
            ck.lower("dt_n >= 2 y0 / c", i, inc[n].dt, 2.0 * base.y / c);
            ck.lower("dy_n >= alpha + 2 w0 y0 / c", i, inc[n].dy,
                     p.alpha() + base.w * 2.0 * base.y / c);
            ck.lower("dw_n >= 2 gamma / (B2 c)", i, inc[n].dw, dw_floor);
        }
    }
    ck.measure("start_index", static_cast<double>(start));
    ck.measure("B1", b1);
    ck.measure("B2", std::max({b2_dt, b2_dy, b2_dw}));
    ck.measure("B2_dt", b2_dt);
    ck.measure("B2_dy", b2_dy);
    ck.measure("B2_dw", b2_dw);
    ck.measure("B3", b3);
    return ck.finish();
}

inline LemmaReport check_potential(const DiscreteTrajectory& traj, double horizon_A)
{
    Checker ck(LemmaId::potential_lemma);
    const ModelParams& p = traj.params();
    const auto window = static_cast<std::size_t>(horizon_steps(p, horizon_A));
    if (window == 0 || traj.step_count() < window)
        fail(ErrorCode::InsufficientTrajectory,
             "potential check needs " + std::to_string(window) + " steps");

    const Profile force = force_profile(traj);
    const Profile pot = potential_profile(traj, window);
    const auto& st = traj.states();
    const auto& inc = traj.increments();
    const double g = p.gamma();
    const double y0 = st.front().y;
    const double w0 = st.front().w;

    // Triangle-inequality bound on |V(y_n) - (g/2y_n - g/2y_0)|: per step the
    // force error |f_k - g/2y_k^2| |dy_k| plus the variation of g/2x^2 across
    // the step, g dy_k^2 / (2 min(y_k, y_k+1)^3).
    CompensatedSum bound;
    CompensatedSum work_abs;
    double bound_max = 0.0;
    double exchange_max = 0.0;
    for (std::size_t n = 0; n <= window; ++n) {
        const auto i = static_cast<std::int64_t>(n);
        const double newtonian = g / (2.0 * st[n].y) - g / (2.0 * y0);
        const double scale = std::abs(pot.values[n]) + std::abs(newtonian) + work_abs.value();
        ck.upper("|V(y_n) - (g/2y_n - g/2y_0)|", i, std::abs(pot.values[n] - newtonian),
                 bound.value() + kRelativeSlack * scale);
        const double exchange = 0.5 * st[n].w * st[n].w - 0.5 * w0 * w0 + pot.values[n];
        exchange_max = std::max(exchange_max, std::abs(exchange));
        ck.upper("|W(y_n) - W(y_0) + V(y_n)|", i, std::abs(exchange),
                 kRelativeSlack * (scale + 0.5 * st[n].w * st[n].w + 0.5 * w0 * w0));
        bound_max = std::max(bound_max, bound.value());
        if (n < window) {
            const double y = st[n].y;
            const double y_min = std::min(y, st[n + 1].y);
            bound += std::abs(force.values[n] - g / (2.0 * y * y)) * std::abs(inc[n].dy);
            bound += g * inc[n].dy * inc[n].dy / (2.0 * y_min * y_min * y_min);
            work_abs += std::abs(force.values[n] * inc[n].dy);
        }
    }
    ck.measure("potential_deviation", pot.max_deviation);
    ck.measure("potential_deviation_times_c", pot.max_deviation_times_c);
    ck.measure("potential_bound_times_c", bound_max * p.c());
    ck.measure("force_deviation_times_c", force.max_deviation_times_c);
    ck.measure("energy_exchange_residual", exchange_max);
    return ck.finish();
}

inline LemmaReport check_energy_time(const DiscreteTrajectory& traj)
{
    Checker ck(LemmaId::energy_time);
    const ModelParams& p = traj.params();
    const EnergyTimeProfile prof = energy_time_products(traj);
    const auto& st = traj.states();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t n = 0; n < prof.ratios.size(); ++n) {
        const auto i = static_cast<std::int64_t>(n);
        const double r = prof.ratios[n];
        const double stretch = 1.0 + p.alpha() / (2.0 * st[n].y);
        const double analytic = p.c() / (p.c() - st[n].w) * stretch;
        ck.upper("|ratio - c/(c-w) (1 + alpha/2y)|", i, std::abs(r - analytic), 1e-12 * analytic);
        if (st[n].w <= 0.5 * p.c()) {
            // c/(c - w) lies in (1/2, 2] for -c < w <= c/2.
            ck.lower("ratio", i, r, 0.5);
            ck.upper("ratio", i, r, 2.0 * stretch);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    ck.measure("ratio_first", prof.ratios.front());
    if (hi > 0.0) {
        ck.measure("ratio_min", lo);
        ck.measure("ratio_max", hi);
    }
    return ck.finish();
}

} // namespace detail

/// Runs one lemma check. `horizon_A` matters for L3_bounds and
/// potential_lemma, which inspect n <= ceil(A c).
inline LemmaReport check_lemma(const DiscreteTrajectory& traj, LemmaId id, double horizon_A)
{
    switch (id) {
    case LemmaId::L1_speed_limit: return detail::check_speed_limit(traj);
    case LemmaId::L2_monotonic: return detail::check_monotonic(traj);
    case LemmaId::L2_negative_branch: return detail::check_negative_branch(traj);
    case LemmaId::L3_bounds: return detail::check_bounds(traj, horizon_A);
    case LemmaId::potential_lemma: return detail::check_potential(traj, horizon_A);
    case LemmaId::energy_time:
        detail::require_increments(traj);
        return detail::check_energy_time(traj);
    }
    fail(ErrorCode::InvalidArgument, "unknown lemma id");
}

} // namespace virtdyn

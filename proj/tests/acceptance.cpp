// Acceptance harness: one PASS/FAIL line per criterion, extra context on
// indented lines. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "virtdyn/cli.hpp"
#include "virtdyn/virtdyn.hpp"

using namespace virtdyn;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what)
{
    std::printf("%s [%d] %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const std::string& text) { std::printf("    %s\n", text.c_str()); }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Config {
    ModelParams params;
    double y0;
    double w0;
};

enum class Sign { any, nonnegative, negative };

// c log-uniform in [10, 1e4], gamma in (0, 10], y0 in (alpha/2, 10].
Config random_config(std::mt19937_64& rng, Sign sign)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double c = std::pow(10.0, 1.0 + 3.0 * u(rng));
    const ModelParams p(c, 10.0 * (1.0 - u(rng)));
    double y0 = 0.0;
    do {
        y0 = 10.0 * (1.0 - u(rng));
    } while (!(y0 > 0.5 * p.alpha()));
    double w0 = 0.0;
    switch (sign) {
    case Sign::any: w0 = c * (2.0 * u(rng) - 1.0); break;
    case Sign::nonnegative: w0 = c * u(rng); break;
    case Sign::negative: w0 = -c * (1.0 - u(rng)); break;
    }
    return {p, y0, w0};
}

std::int64_t ten_c(const ModelParams& p) { return static_cast<std::int64_t>(std::ceil(10.0 * p.c())); }

void speed_limit_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    std::size_t violations = 0, truncated = 0, steps = 0;
    for (int i = 0; i < 1000; ++i) {
        const Config cfg = random_config(rng, Sign::any);
        const auto traj = run(cfg.params, cfg.y0, cfg.w0, ten_c(cfg.params));
        const auto rep = check_lemma(traj, LemmaId::L1_speed_limit, 1.0);
        violations += rep.violation_count();
        truncated += traj.truncation() ? 1 : 0;
        steps += traj.step_count();
    }
    const double secs = seconds_since(t0);
    verdict(1, violations == 0 && secs < 60.0,
            fmt("speed limit: 1000 configs, %zu steps, %zu violations, %.1f s (limit 60 s)", steps, violations,
                secs));
    info(fmt("%zu runs left the double range before 10c steps (y grows geometrically for w0 near c);"
             " checked on the finite prefix",
             truncated));
}

void monotonic_suite()
{
    std::mt19937_64 rng(1002);
    std::size_t violations = 0, steps = 0;
    for (int i = 0; i < 1000; ++i) {
        const Config cfg = random_config(rng, Sign::nonnegative);
        const auto traj = run(cfg.params, cfg.y0, cfg.w0, ten_c(cfg.params));
        const auto rep = check_lemma(traj, LemmaId::L2_monotonic, 1.0);
        violations += rep.violation_count();
        steps += traj.step_count();
    }
    verdict(2, violations == 0,
            fmt("monotonicity (w0 >= 0): 1000 configs, %zu steps, %zu violations", steps, violations));
}

void negative_branch_suite()
{
    std::mt19937_64 rng(1003);
    std::size_t violations = 0;
    std::int64_t max_n = 0;
    double max_ratio = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Config cfg = random_config(rng, Sign::negative);
        DiscreteTrajectory traj(cfg.params, ModelState{0, 0.0, cfg.y0, cfg.w0});
        const double b4 = std::abs(cfg.w0) * (cfg.y0 + 0.5 * cfg.params.alpha()) / cfg.params.gamma();
        const auto n_bound = static_cast<std::int64_t>(std::ceil(b4 * cfg.params.c()));
        // Step until the velocity turns or the bound is exceeded.
        while (traj.last().w < 0.0 && static_cast<std::int64_t>(traj.step_count()) <= n_bound)
            if (!traj.extend()) break;
        traj.extend();
        const auto rep = check_lemma(traj, LemmaId::L2_negative_branch, 1.0);
        violations += rep.violation_count();
        const auto n = static_cast<std::int64_t>(rep.measured_constants.at("N"));
        max_n = std::max(max_n, n);
        max_ratio = std::max(max_ratio, static_cast<double>(n) / static_cast<double>(n_bound));
    }
    verdict(3, violations == 0,
            fmt("negative branch: 100 configs with w0 < 0, %zu violations (largest N = %lld, max N / ceil(B4 c) = %.3g)",
                violations, static_cast<long long>(max_n), max_ratio));
}

void formulation_equivalence()
{
    std::mt19937_64 rng(1004);
    std::size_t steps = 0, mismatches = 0, out_of_range = 0;
    std::uint64_t worst = 0;
    int configs = 0;
    while (steps < 1000000) {
        ++configs;
        const Config cfg = random_config(rng, Sign::any);
        const auto traj = run(cfg.params, cfg.y0, cfg.w0, 1000);
        auto other_form = [&](std::size_t k, Formulation form) -> std::optional<ModelState> {
            Carry carry = traj.carry(k);
            try {
                return advance(traj.state(k), carry, cfg.params, form).state;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NumericOverflow) throw;
                return std::nullopt;
            }
        };
        for (std::size_t k = 0; k < traj.step_count(); ++k) {
            const ModelState& jump = traj.state(k + 1);
            const auto accel = other_form(k, Formulation::acceleration);
            const auto implicit = other_form(k, Formulation::implicit);
            if (!accel || !implicit) {
                ++out_of_range;
                continue;
            }
            for (const ModelState& other : {*accel, *implicit}) {
                const std::uint64_t d = std::max({oracle::ulp_distance(jump.t, other.t),
                                                  oracle::ulp_distance(jump.y, other.y),
                                                  oracle::ulp_distance(jump.w, other.w)});
                worst = std::max(worst, d);
                mismatches += d > 1 ? 1 : 0;
            }
            ++steps;
        }
    }
    verdict(4, mismatches == 0,
            fmt("formulation equivalence: %zu steps from %d configs, worst component distance %llu ulp, %zu comparisons over 1 ulp",
                steps, configs, static_cast<unsigned long long>(worst), mismatches));
    info(fmt("%zu further steps not counted: dt^2 overflows in the acceleration form past dt ~ 1e154", out_of_range));
}

void potential_lemma()
{
    std::vector<double> scaled;
    std::vector<double> bound_scaled;
    for (double c : {1e3, 1e4, 1e5}) {
        const ModelParams p(c, 1.0);
        const auto traj = run(p, 1.0, 0.0, horizon_steps(p, 1.0));
        const auto rep = check_lemma(traj, LemmaId::potential_lemma, 1.0);
        scaled.push_back(rep.measured_constants.at("potential_deviation_times_c"));
        bound_scaled.push_back(rep.measured_constants.at("potential_bound_times_c"));
    }
    const double hi = *std::max_element(scaled.begin(), scaled.end());
    const double lo = *std::min_element(scaled.begin(), scaled.end());
    verdict(5, hi / lo < 3.0,
            fmt("potential lemma: max|V - (g/2y - g/2y0)| * c = %.3e, %.3e, %.3e at c = 1e3, 1e4, 1e5;"
                " spread factor %.3g (required < 3)",
                scaled[0], scaled[1], scaled[2], hi / lo));
    info(fmt("deviation * c^2 = %.4g, %.4g, %.4g (the deviation is O(1/c^2), so * c is bounded but not flat)",
             scaled[0] * 1e3, scaled[1] * 1e4, scaled[2] * 1e5));
    info(fmt("per-step triangle bound * c = %.4g, %.4g, %.4g", bound_scaled[0], bound_scaled[1], bound_scaled[2]));
}

void convergence_rate()
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> cs{200, 400, 800, 1600};
    struct Case {
        double y0, w0;
    };
    bool all_ok = true;
    std::vector<std::string> lines;
    for (const Case k : {Case{1.0, 0.0}, Case{1.0, 0.5}, Case{2.0, -0.3}}) {
        for (auto mode : {InterpolationMode::jump, InterpolationMode::smooth}) {
            const auto rep = rate_sweep(1.0, k.y0, k.w0, 1.0, cs, mode);
            auto check = [&](const char* name, const std::vector<double>& e, double slope) {
                bool ok = slope >= -1.2 && slope <= -0.8;
                std::string ratios;
                double bound_c_max = 0.0;
                for (std::size_t i = 0; i + 1 < e.size(); ++i) {
                    const double r = e[i] / e[i + 1];
                    ok = ok && r >= 1.6 && r <= 2.5;
                    ratios += fmt("%s%.3f", i ? "," : "", r);
                }
                for (std::size_t i = 0; i < e.size(); ++i) bound_c_max = std::max(bound_c_max, e[i] * cs[i]);
                all_ok = all_ok && ok;
                lines.push_back(fmt("(y0=%g, w0=%g) %-6s %s: slope %.3f, doubling ratios %s, max sup*c %.3g%s",
                                    k.y0, k.w0, to_string(mode).data(), name, slope, ratios.c_str(), bound_c_max,
                                    ok ? "" : "  <- outside window"));
            };
            check("sup_y", rep.sup_errors_y, rep.fitted_rate_y);
            check("sup_w", rep.sup_errors_w, rep.fitted_rate_w);
        }
    }
    const double secs = seconds_since(t0);
    verdict(6, all_ok && secs < 120.0,
            fmt("convergence rate: slopes in [-1.2, -0.8] and doubling ratios in [1.6, 2.5] for 3 configs x 2 modes"
                " x (sup_y, sup_w); %.1f s (limit 120 s)",
                secs));
    for (const auto& l : lines) info(l);
}

void terminal_velocity_check()
{
    const ModelParams p(1e4, 1.0);
    const auto traj = run(p, 1.0, 0.0, horizon_steps(p, 50.0));
    const double w = traj.last().w;
    const double v_inf = terminal_velocity(1.0, 1.0, 0.0);
    verdict(7, !traj.truncation() && std::abs(w - v_inf) <= 0.05,
            fmt("terminal velocity: w after %zu steps (t = %.4g) = %.8f, v_inf = %g, gap %.3g (limit 0.05)",
                traj.step_count(), traj.last().t, w, v_inf, std::abs(w - v_inf)));
}

void oracle_self_check()
{
    double energy_worst = 0.0;
    for (double v0 : {0.0, 0.5, -0.5}) {
        const auto sol = solve(1.0, 1.0, v0, 100.0, 1e-12);
        for (int i = 0; i <= 100000; ++i) {
            const auto pt = sol.at(100.0 * i / 100000.0);
            const auto e = energies(pt.x, pt.v, 1.0, 1.0);
            energy_worst = std::max(energy_worst, std::abs(e.kinetic + e.potential - 0.5 * v0 * v0));
        }
    }
    double invert_worst = 0.0;
    struct Case {
        double gamma, x0, v0;
    };
    for (const Case k : {Case{1.0, 1.0, 0.0}, Case{1.0, 1.0, 1.0}, Case{3.0, 0.5, 0.2}}) {
        const auto sol = solve(k.gamma, k.x0, k.v0, 60.0, 1e-12);
        for (double target : {1.001, 1.5, 3.0, 10.0, 25.0}) {
            const double x = k.x0 * target;
            const double s = time_of_flight(k.gamma, k.x0, k.v0, x);
            if (s > sol.s_max()) continue;
            invert_worst = std::max(invert_worst, std::abs(sol.position(s) - x));
            invert_worst = std::max(invert_worst, std::abs(*sol.time_at_position(x) - s));
        }
    }
    verdict(8, energy_worst <= 1e-10 && invert_worst <= 1e-8,
            fmt("oracle self-check: energy drift %.3g over s in [0, 100] (limit 1e-10); "
                "time_of_flight vs solve %.3g (limit 1e-8)",
                energy_worst, invert_worst));
}

void determinism()
{
    cli::RunConfig cfg;
    cfg.w0 = -0.7;
    cfg.horizon_A = 3.0;
    const std::string a = cli::cmd_simulate(cfg);
    const std::string b = cli::cmd_simulate(cfg);
    cfg.format = cli::OutputFormat::json;
    const bool json_same = cli::cmd_simulate(cfg) == cli::cmd_simulate(cfg);
    verdict(9, a == b && json_same,
            fmt("determinism: simulate output identical across runs (%zu bytes csv)", a.size()));
}

} // namespace

int main()
{
    void (*const criteria[])() = {speed_limit_suite,       monotonic_suite,   negative_branch_suite,
                                  formulation_equivalence, potential_lemma,   convergence_rate,
                                  terminal_velocity_check, oracle_self_check, determinism};
    int id = 0;
    for (auto fn : criteria) {
        ++id;
        try {
            fn();
        } catch (const std::exception& e) {
            verdict(id, false, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

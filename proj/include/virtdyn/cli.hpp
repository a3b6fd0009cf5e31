#pragma once

// Command implementations behind the `virtdyn` executable. Each command
// returns the bytes it would write so that tests can inspect them directly.

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "virtdyn/analysis.hpp"
#include "virtdyn/convergence.hpp"
#include "virtdyn/error.hpp"
#include "virtdyn/recurrence.hpp"

namespace virtdyn::cli {

inline constexpr int kSchemaVersion = 1;

enum class OutputFormat { csv, json };

struct RunConfig {
    double c = 100.0;
    double gamma = 1.0;
    double y0 = 1.0;
    double w0 = 0.0;
    double horizon_A = 1.0;
    InterpolationMode mode = InterpolationMode::jump;
    OutputFormat format = OutputFormat::csv;
    bool emit_plot = false;
};

/// Exit status for a failed command: 2 for anything the caller can fix by
/// changing the configuration (every library Error), 1 is reserved for
/// failed lemma checks.
inline constexpr int kExitLemmaViolation = 1;
inline constexpr int kExitBadConfig = 2;

inline void validate(const RunConfig& cfg)
{
    auto finite = [](double v, const char* name) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, std::string(name) + " must be finite");
    };
    finite(cfg.c, "c");
    finite(cfg.gamma, "gamma");
    finite(cfg.y0, "y0");
    finite(cfg.w0, "w0");
    finite(cfg.horizon_A, "horizon");
    if (!(cfg.c > 0.0)) fail(ErrorCode::NonPositiveParameter, "c must be > 0");
    if (!(cfg.gamma > 0.0)) fail(ErrorCode::NonPositiveParameter, "gamma must be > 0");
    if (!(cfg.y0 > 0.0)) fail(ErrorCode::InvalidArgument, "y0 must be > 0");
    if (!(std::abs(cfg.w0) < cfg.c))
        fail(ErrorCode::VelocityAtSignalSpeed, "initial speed exceeds signal speed");
    if (!(cfg.horizon_A > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be > 0");
}

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::vector<double> parse_number_list(std::string_view text)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string_view item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
            fail(ErrorCode::InvalidArgument, "cannot parse number '" + std::string(item) + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

inline std::vector<LemmaId> parse_lemma_list(std::string_view text)
{
    if (text.empty() || text == "all") return {all_lemmas.begin(), all_lemmas.end()};
    std::vector<LemmaId> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = text.substr(pos, comma - pos);
        const auto id = parse_lemma_id(item);
        if (!id) fail(ErrorCode::InvalidArgument, "unknown lemma id '" + std::string(item) + "'");
        out.push_back(*id);
        pos = comma + 1;
    }
    return out;
}

namespace detail {

inline nlohmann::ordered_json config_json(const RunConfig& cfg, const ModelParams& p)
{
    return {{"c", cfg.c},           {"gamma", cfg.gamma}, {"alpha", p.alpha()},
            {"y0", cfg.y0},         {"w0", cfg.w0},       {"horizon", cfg.horizon_A},
            {"mode", std::string(to_string(cfg.mode))}};
}

inline std::string header_comment(std::string_view command, const RunConfig& cfg,
                                  const ModelParams& p, std::int64_t steps)
{
    std::string h = "# virtdyn " + std::string(command) + " schema=" + std::to_string(kSchemaVersion);
    h += " c=" + format_double(cfg.c) + " gamma=" + format_double(cfg.gamma) +
         " alpha=" + format_double(p.alpha()) + " y0=" + format_double(cfg.y0) +
         " w0=" + format_double(cfg.w0) + " horizon=" + format_double(cfg.horizon_A) +
         " steps=" + std::to_string(steps) + "\n";
    return h;
}

} // namespace detail

/// Trajectory for n <= ceil(A c): one row per state with the increments of
/// the step leaving it (blank on the final row).
inline std::string cmd_simulate(const RunConfig& cfg)
{
    validate(cfg);
    const ModelParams p(cfg.c, cfg.gamma);
    const std::int64_t steps = horizon_steps(p, cfg.horizon_A);
    const DiscreteTrajectory traj = run(p, cfg.y0, cfg.w0, steps);
    const auto& st = traj.states();
    const auto& inc = traj.increments();

    if (cfg.format == OutputFormat::json) {
        nlohmann::ordered_json doc;
        doc["schema"] = kSchemaVersion;
        doc["kind"] = "trajectory";
        doc["config"] = detail::config_json(cfg, p);
        doc["steps"] = steps;
        if (traj.truncation())
            doc["truncated"] = {{"completed_steps", traj.truncation()->completed_steps},
                                {"reason", traj.truncation()->reason}};
        else
            doc["truncated"] = nullptr;
        auto& rows = doc["states"] = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < st.size(); ++k) {
            nlohmann::ordered_json row = {{"n", st[k].n}, {"t", st[k].t}, {"y", st[k].y}, {"w", st[k].w}};
            if (k < inc.size()) {
                row["dt"] = inc[k].dt;
                row["dy"] = inc[k].dy;
                row["dw"] = inc[k].dw;
                row["a"] = inc[k].a;
                row["f_n"] = inc[k].a;
            }
            rows.push_back(std::move(row));
        }
        return doc.dump(1) + "\n";
    }

    std::string out = detail::header_comment("simulate", cfg, p, steps);
    if (traj.truncation())
        out += "# truncated after " + std::to_string(traj.truncation()->completed_steps) +
               " steps: " + traj.truncation()->reason + "\n";
    out += "n,t,y,w,dt,dy,dw,a,f_n\n";
    for (std::size_t k = 0; k < st.size(); ++k) {
        out += std::to_string(st[k].n) + ',' + format_double(st[k].t) + ',' +
               format_double(st[k].y) + ',' + format_double(st[k].w);
        if (k < inc.size()) {
            out += ',' + format_double(inc[k].dt) + ',' + format_double(inc[k].dy) + ',' +
                   format_double(inc[k].dw) + ',' + format_double(inc[k].a) + ',' +
                   format_double(inc[k].a);
        } else {
            out += ",,,,,";
        }
        out += '\n';
    }
    return out;
}

struct VerifyResult {
    std::string report;
    bool passed = false;
    std::vector<LemmaReport> lemmas;
};

inline nlohmann::ordered_json lemma_json(const LemmaReport& r)
{
    nlohmann::ordered_json j;
    j["id"] = std::string(to_string(r.lemma_id));
    j["passed"] = r.passed;
    j["measured"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.measured_constants) j["measured"][k] = v;
    auto& ws = j["witnesses"] = nlohmann::ordered_json::array();
    for (const Witness& w : r.witnesses)
        ws.push_back({{"step", w.step},
                      {"quantity", w.quantity},
                      {"value", w.value},
                      {"bound", w.bound},
                      {"violation", w.violation}});
    return j;
}

/// Runs the requested lemma checks on one trajectory. The trajectory covers
/// ceil(A c) steps, plus ceil(B4 c) + 1 more when w0 < 0 so the turnaround
/// fits and the post-turnaround window is complete.
inline VerifyResult cmd_verify(const RunConfig& cfg, const std::vector<LemmaId>& lemmas)
{
    validate(cfg);
    const ModelParams p(cfg.c, cfg.gamma);
    std::int64_t steps = horizon_steps(p, cfg.horizon_A);
    const double b4 = std::abs(cfg.w0) * (cfg.y0 + 0.5 * p.alpha()) / cfg.gamma;
    if (cfg.w0 < 0.0) steps += static_cast<std::int64_t>(std::ceil(b4 * cfg.c)) + 1;
    const DiscreteTrajectory traj = run(p, cfg.y0, cfg.w0, steps);

    VerifyResult res;
    res.passed = true;
    for (LemmaId id : lemmas) {
        res.lemmas.push_back(check_lemma(traj, id, cfg.horizon_A));
        res.passed = res.passed && res.lemmas.back().passed;
    }

    auto constant = [&](LemmaId id, const char* key) -> nlohmann::ordered_json {
        for (const auto& r : res.lemmas)
            if (r.lemma_id == id) {
                auto it = r.measured_constants.find(key);
                if (it != r.measured_constants.end()) return it->second;
            }
        return nullptr;
    };

    nlohmann::ordered_json doc;
    doc["schema"] = kSchemaVersion;
    doc["kind"] = "verify";
    doc["config"] = detail::config_json(cfg, p);
    doc["steps"] = traj.step_count();
    doc["passed"] = res.passed;
    doc["B1"] = constant(LemmaId::L3_bounds, "B1");
    doc["B2"] = constant(LemmaId::L3_bounds, "B2");
    doc["B4"] = b4;
    doc["potential_deviation_times_c"] = constant(LemmaId::potential_lemma, "potential_deviation_times_c");
    auto& arr = doc["lemmas"] = nlohmann::ordered_json::array();
    for (const auto& r : res.lemmas) arr.push_back(lemma_json(r));
    res.report = doc.dump(1) + "\n";
    return res;
}

struct SweepResult {
    ConvergenceReport data;
    std::string report;
    std::string plot_script; // empty unless emit_plot
};

inline std::string plot_script(const ConvergenceReport& r)
{
    auto list = [](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
        return s + "]";
    };
    std::ostringstream os;
    os << "# Error versus signal speed for one virtdyn sweep; all data is inline.\n"
       << "import matplotlib\n"
       << "matplotlib.use('Agg')\n"
       << "import matplotlib.pyplot as plt\n\n"
       << "c = " << list(r.c_values) << "\n"
       << "sup_y = " << list(r.sup_errors_y) << "\n"
       << "sup_w = " << list(r.sup_errors_w) << "\n"
       << "rate_y = " << format_double(r.fitted_rate_y) << "\n"
       << "rate_w = " << format_double(r.fitted_rate_w) << "\n\n"
       << "fig, ax = plt.subplots()\n"
       << "ax.loglog(c, sup_y, 'o-', label='sup |y - x| (slope %.3f)' % rate_y)\n"
       << "ax.loglog(c, sup_w, 's-', label='sup |w - v| (slope %.3f)' % rate_w)\n"
       << "ref = [sup_y[0] * c[0] / ci for ci in c]\n"
       << "ax.loglog(c, ref, 'k:', label='1/c')\n"
       << "ax.set_xlabel('c')\n"
       << "ax.set_ylabel('sup error')\n"
       << "ax.set_title('gamma=" << format_double(r.gamma) << " y0=" << format_double(r.y0)
       << " w0=" << format_double(r.w0) << " A=" << format_double(r.horizon_A)
       << " mode=" << to_string(r.mode) << "')\n"
       << "ax.legend()\n"
       << "fig.savefig('sweep.png', dpi=120)\n";
    return os.str();
}

inline SweepResult cmd_sweep(const RunConfig& cfg, const std::vector<double>& c_list)
{
    validate_c_list(c_list);
    for (double c : c_list) {
        RunConfig one = cfg;
        one.c = c;
        validate(one);
    }
    SweepResult res;
    res.data = rate_sweep(cfg.gamma, cfg.y0, cfg.w0, cfg.horizon_A, c_list, cfg.mode);
    const ConvergenceReport& r = res.data;

    if (cfg.format == OutputFormat::csv) {
        std::string out = "# virtdyn sweep schema=" + std::to_string(kSchemaVersion) +
                          " gamma=" + format_double(r.gamma) + " y0=" + format_double(r.y0) +
                          " w0=" + format_double(r.w0) + " horizon=" + format_double(r.horizon_A) +
                          " mode=" + std::string(to_string(r.mode)) +
                          " fitted_rate_y=" + format_double(r.fitted_rate_y) +
                          " fitted_rate_w=" + format_double(r.fitted_rate_w) + "\n";
        out += "c,sup_y,sup_w\n";
        for (std::size_t i = 0; i < r.c_values.size(); ++i)
            out += format_double(r.c_values[i]) + ',' + format_double(r.sup_errors_y[i]) + ',' +
                   format_double(r.sup_errors_w[i]) + '\n';
        res.report = out;
    } else {
        nlohmann::ordered_json doc;
        doc["schema"] = kSchemaVersion;
        doc["kind"] = "sweep";
        doc["gamma"] = r.gamma;
        doc["y0"] = r.y0;
        doc["w0"] = r.w0;
        doc["horizon"] = r.horizon_A;
        doc["mode"] = std::string(to_string(r.mode));
        doc["c_values"] = r.c_values;
        doc["sup_errors_y"] = r.sup_errors_y;
        doc["sup_errors_w"] = r.sup_errors_w;
        doc["fitted_rate_y"] = r.fitted_rate_y;
        doc["fitted_rate_w"] = r.fitted_rate_w;
        doc["fitted_B_y"] = r.fitted_B_y;
        doc["fitted_B_w"] = r.fitted_B_w;
        doc["decay_onset_c"] = r.decay_onset_c ? nlohmann::ordered_json(*r.decay_onset_c) : nlohmann::ordered_json(nullptr);
        res.report = doc.dump(1) + "\n";
    }
    if (cfg.emit_plot) res.plot_script = plot_script(r);
    return res;
}

} // namespace virtdyn::cli

// virtdyn: simulate the virtual-particle model, verify its lemma checks, and
// sweep the signal speed to measure convergence to the Newtonian motion.
//
// Exit codes: 0 success, 1 a lemma check failed, 2 invalid configuration or
// any other library error. Errors are one line on stderr:
//   error: <Code>: <message>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "virtdyn/cli.hpp"

namespace {

using virtdyn::cli::OutputFormat;
using virtdyn::cli::RunConfig;

struct Options {
    RunConfig cfg;
    std::string mode = "jump";
    std::optional<std::string> format;
    std::string out;
    std::string lemmas = "all";
    std::string c_list;
};

void add_common(CLI::App* cmd, Options& o)
{
    cmd->add_option("--c", o.cfg.c, "signal speed c > 0")->capture_default_str();
    cmd->add_option("--gamma", o.cfg.gamma, "coupling gamma > 0")->capture_default_str();
    cmd->add_option("--y0", o.cfg.y0, "initial position > 0")->capture_default_str();
    cmd->add_option("--w0", o.cfg.w0, "initial velocity, |w0| < c")->capture_default_str();
    cmd->add_option("--horizon", o.cfg.horizon_A, "horizon A; steps = ceil(A c)")->capture_default_str();
    cmd->add_option("--mode", o.mode, "interpolation mode")
        ->check(CLI::IsMember({"jump", "smooth"}))
        ->capture_default_str();
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out, "output path (default: stdout)");
}

void write_output(const std::string& path, const std::string& bytes)
{
    if (path.empty() || path == "-") {
        std::cout << bytes;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw virtdyn::Error(virtdyn::ErrorCode::InvalidArgument, "cannot open " + path);
    f << bytes;
}

int report_error(const virtdyn::Error& e)
{
    std::cerr << "error: " << virtdyn::to_string(e.code()) << ": " << e.what() << "\n";
    return virtdyn::cli::kExitBadConfig;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"virtual-particle recurrence model: simulate, verify, sweep"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "write the trajectory for n <= ceil(A c)");
    add_common(simulate, o);

    auto* verify = app.add_subcommand("verify", "check lemma claims on one trajectory (JSON report)");
    add_common(verify, o);
    verify->add_option("--lemmas", o.lemmas, "comma-separated lemma ids or 'all'")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "measure sup errors against the Newtonian motion over c");
    add_common(sweep, o);
    sweep->add_option("--c-list", o.c_list, "comma-separated increasing c values")->required();
    sweep->add_flag("--emit-plot", o.cfg.emit_plot, "also write <out>.plot.py");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : virtdyn::cli::kExitBadConfig;
    }

    try {
        o.cfg.mode = *virtdyn::parse_interpolation_mode(o.mode);
        if (simulate->parsed()) {
            o.cfg.format = o.format.value_or("csv") == "json" ? OutputFormat::json : OutputFormat::csv;
            write_output(o.out, virtdyn::cli::cmd_simulate(o.cfg));
            return 0;
        }
        if (verify->parsed()) {
            const auto ids = virtdyn::cli::parse_lemma_list(o.lemmas);
            const auto res = virtdyn::cli::cmd_verify(o.cfg, ids);
            write_output(o.out, res.report);
            if (!res.passed) {
                std::cerr << "error: LemmaViolation: at least one lemma check failed\n";
                return virtdyn::cli::kExitLemmaViolation;
            }
            return 0;
        }
        if (sweep->parsed()) {
            o.cfg.format = o.format.value_or("json") == "csv" ? OutputFormat::csv : OutputFormat::json;
            const auto c_list = virtdyn::cli::parse_number_list(o.c_list);
            const auto res = virtdyn::cli::cmd_sweep(o.cfg, c_list);
            write_output(o.out, res.report);
            if (o.cfg.emit_plot) {
                const std::string base = (o.out.empty() || o.out == "-") ? "virtdyn_sweep" : o.out;
                write_output(base + ".plot.py", res.plot_script);
            }
            return 0;
        }
    } catch (const virtdyn::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return virtdyn::cli::kExitBadConfig;
    }
    return 0;
}

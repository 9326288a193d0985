// Command-line driver: solve, simulate, check, plot.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "attitude/io.hpp"

namespace {

using namespace attitude;

struct Overrides {
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<double> damping;
    std::optional<std::string> out_dir;
};

ManeuverConfig load_with_overrides(const std::string& path, const Overrides& o) {
    ManeuverConfig cfg = load_config(path);
    if (o.tol) cfg.solver.tol = *o.tol;
    if (o.max_iter) cfg.solver.max_iter = *o.max_iter;
    if (o.damping) cfg.solver.damping = *o.damping;
    if (o.out_dir) cfg.output.dir = *o.out_dir;
    if (!(cfg.solver.tol > 0.0)) throw ValidationError("--tol must be positive");
    if (cfg.solver.max_iter < 1) throw ValidationError("--max-iter must be at least 1");
    if (!(cfg.solver.damping > 0.0 && cfg.solver.damping <= 1.0)) {
        throw ValidationError("--damping must lie in (0, 1]");
    }
    for (const std::string& n : cfg.notices) {
        std::cerr << "notice: " << n << "\n";
    }
    return cfg;
}

int solve_cmd(const std::string& config, const Overrides& o) {
    const ManeuverConfig cfg = load_with_overrides(config, o);
    const SolveOutcome out = run_solve(cfg);
    const SolverReport& r = out.result.report;
    if (!r.converged) {
        std::cerr << "solver failed: " << r.error_kind << ": " << r.error_message << "\n";
        std::cerr << "report: " << cfg.output.report_path().string() << "\n";
        return kExitSolver;
    }
    std::printf("converged in %d iterations (%.3f s), residual %.3e\n", r.iterations, r.wall_time,
                r.final_residual_inf);
    std::printf("orientation error %.3e rad, terminal momentum error %.3e, active entries %d\n",
                out.summary.orientation_error, out.summary.terminal_momentum_error, out.result.active.count());
    std::printf("wrote %s, %s, %s\n", cfg.output.trajectory_path().c_str(), cfg.output.report_path().c_str(),
                cfg.output.plot_path().c_str());
    return kExitOk;
}

int simulate_cmd(const std::string& config, const std::string& controls_path, const Overrides& o) {
    const ManeuverConfig cfg = load_with_overrides(config, o);
    const SimulateOutcome out = run_simulate(cfg, read_controls_csv(controls_path));
    const DynamicsState& last = out.states.back();
    const double angle = rotation_angle(Mat3(last.R.transpose() * cfg.problem.R_f));
    std::printf("final momentum (%.17g, %.17g, %.17g)\n", last.Pi[0], last.Pi[1], last.Pi[2]);
    std::printf("distance to target: orientation %.3e rad, momentum %.3e\n", angle,
                (last.Pi - cfg.problem.Pi_f).norm());
    std::printf("wrote %s\n", cfg.output.trajectory_path().c_str());
    return kExitOk;
}

int check_cmd(const std::string& config, const Overrides& o) {
    const ManeuverConfig cfg = load_with_overrides(config, o);
    std::cout << format_check_json(run_check(cfg));
    return kExitOk;
}

int plot_cmd(const std::string& trajectory, const std::optional<std::string>& out_dir) {
    const std::filesystem::path in(trajectory);
    std::filesystem::path out = in;
    out.replace_extension(".svg");
    if (out_dir) out = std::filesystem::path(*out_dir) / out.filename();
    write_svg(out, read_trajectory_csv(in));
    std::printf("wrote %s\n", out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-optimal rigid-body attitude maneuvers"};
    app.require_subcommand(1);

    Overrides o;
    double tol = 0.0, damping = 0.0;
    int max_iter = 0;
    std::string out_dir;
    const auto add_flags = [&](CLI::App* cmd, bool solver_flags) {
        if (solver_flags) {
            cmd->add_option("--tol", tol, "residual tolerance (inf-norm)");
            cmd->add_option("--max-iter", max_iter, "maximum Newton iterations");
            cmd->add_option("--damping", damping, "Newton step scale in (0, 1]");
        }
        cmd->add_option("--out-dir", out_dir, "directory for written artifacts");
    };

    std::string config, controls, trajectory;
    CLI::App* solve = app.add_subcommand("solve", "solve the maneuver and export trajectory, report, plot");
    solve->add_option("config", config, "maneuver config (JSON)")->required();
    add_flags(solve, true);

    CLI::App* simulate = app.add_subcommand("simulate", "forward-propagate a control sequence");
    simulate->add_option("config", config, "maneuver config (JSON)")->required();
    simulate->add_option("--controls", controls, "CSV of N torque rows or an exported trajectory")->required();
    add_flags(simulate, true);

    CLI::App* check = app.add_subcommand("check", "print inertia and invertibility diagnostics");
    check->add_option("config", config, "maneuver config (JSON)")->required();
    add_flags(check, true);

    CLI::App* plot = app.add_subcommand("plot", "render an exported trajectory as SVG");
    plot->add_option("trajectory", trajectory, "trajectory CSV")->required();
    add_flags(plot, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    const auto given = [](CLI::App* cmd, const char* name) { return cmd->count(name) > 0; };
    CLI::App* active = app.get_subcommands().front();
    if (active != plot) {
        if (given(active, "--tol")) o.tol = tol;
        if (given(active, "--max-iter")) o.max_iter = max_iter;
        if (given(active, "--damping")) o.damping = damping;
    }
    if (given(active, "--out-dir")) o.out_dir = out_dir;

    try {
        if (active == solve) return solve_cmd(config, o);
        if (active == simulate) return simulate_cmd(config, controls, o);
        if (active == check) return check_cmd(config, o);
        return plot_cmd(trajectory, o.out_dir);
    } catch (const ParseError& e) {
        std::cerr << "ParseError: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "ValidationError: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "IoError: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return kExitSolver;
    }
}

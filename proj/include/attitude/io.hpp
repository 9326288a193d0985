#pragma once

// Configuration loading, trajectory/report export and the command drivers
// behind the CLI.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "attitude/shooting.hpp"

namespace attitude {

struct OutputPaths {
    std::filesystem::path dir = "out";
    std::string trajectory = "trajectory.csv";
    std::string report = "report.json";
    std::string plot = "trajectory.svg";

    std::filesystem::path trajectory_path() const { return dir / trajectory; }
    std::filesystem::path report_path() const { return dir / report; }
    std::filesystem::path plot_path() const { return dir / plot; }
};

struct ManeuverConfig {
    ManeuverProblem problem;
    SolverOptions solver;
    OutputPaths output;
    std::vector<std::string> notices;  // non-fatal remarks made while loading
};

// Parses and validates a JSON maneuver description. `source` names the input
// in error messages. Throws ParseError (syntax, wrong types, with line or
// field) and ValidationError (violated invariant, naming the field).
ManeuverConfig parse_config(const std::string& text, const std::string& source = "<config>");

// Throws IoError when the file cannot be read.
ManeuverConfig load_config(const std::filesystem::path& path);

// One row per step, the CSV schema of every exported trajectory.
struct TrajectoryRow {
    double t = 0.0;
    Vec3 Pi = Vec3::Zero();
    std::optional<Vec3> u;           // absent on the last row
    std::optional<Vec3> lambda_bar;  // absent for simulated trajectories
    Vec4 q = Vec4(1.0, 0.0, 0.0, 0.0);
    std::array<bool, 3> active{};
};

inline constexpr const char* kTrajectoryHeader =
    "t,Pi1,Pi2,Pi3,u1,u2,u3,lam1,lam2,lam3,q0,q1,q2,q3,active1,active2,active3";

std::vector<TrajectoryRow> trajectory_rows(const Trajectory& trajectory);

// Rows of a forward simulation: no costates, flags mark exact bound contact.
std::vector<TrajectoryRow> simulation_rows(const std::vector<DynamicsState>& states,
                                           const std::vector<Vec3>& controls, double h,
                                           const Bounds& bounds);

std::string format_trajectory_csv(const std::vector<TrajectoryRow>& rows);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

// Accepts either an exported trajectory (the u1..u3 columns of rows that have
// them) or a bare file of three torques per line, with or without header.
std::vector<Vec3> read_controls_csv(const std::filesystem::path& path);

// Three stacked panels (u, Pi, lambda_bar against t), one line per axis.
std::string render_svg(const std::vector<TrajectoryRow>& rows);
void write_svg(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows);

// Quality measures of an exported solution.
struct SolutionSummary {
    double orientation_error = 0.0;       // angle(R_N^T R_f), rad
    double terminal_momentum_error = 0.0; // |Pi_N - Pi_f|
    double max_control_excess = 0.0;      // max(|u^i| - c^i), <= 0 when honored
    double max_momentum_excess = 0.0;     // max(|Pi^i| - b^i)
    double energy = 0.0;                  // sum_k |u_k|^2 / 2
};

SolutionSummary summarize(const Trajectory& trajectory, const ManeuverProblem& problem);

std::string format_report_json(const SolveResult& result, const SolutionSummary& summary);

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitSolver = 3, kExitIo = 4 };

struct SolveOutcome {
    SolveResult result;
    Trajectory trajectory;
    SolutionSummary summary;
};

// Runs the modified shooting solver and writes CSV, report and SVG. Artifacts
// are written on failure too; the report carries the error class.
SolveOutcome run_solve(const ManeuverConfig& config);

struct SimulateOutcome {
    std::vector<DynamicsState> states;
    std::vector<Vec3> controls;
};

// Forward-propagates the controls from (R_i, Pi_i) and writes the trajectory.
// Throws ValidationError when the row count differs from N.
SimulateOutcome run_simulate(const ManeuverConfig& config, const std::vector<Vec3>& controls);

struct CheckReport {
    Vec3 jd_diagonal = Vec3::Zero();
    double lemma1_threshold = 0.0;
    double worst_trace_condition = 0.0;
    int worst_trace_condition_step = 0;
    double max_step_momentum = 0.0;  // max_k |h Pi_k| along the free motion
    double max_step_angle = 0.0;     // max_k angle(F_k)
    bool near_half_pi_bound = false;  // some step angle within 10% of pi/2
};

CheckReport run_check(const ManeuverConfig& config);
std::string format_check_json(const CheckReport& report);

}  // namespace attitude

#include "attitude/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace attitude {

using nlohmann::json;

namespace {

// ---- config helpers ---------------------------------------------------------

std::string line_of(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return std::to_string(1 + std::count(text.begin(), text.begin() + static_cast<long>(end), '\n'));
}

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ValidationError("missing required field \"" + std::string(key) + "\" (" + path + ")");
    }
    return obj.at(key);
}

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) {
        throw ParseError("field \"" + field + "\": expected a number, got " + v.type_name());
    }
    return v.get<double>();
}

Vec3 as_vec3(const json& v, const std::string& field, bool allow_scalar = false) {
    if (allow_scalar && v.is_number()) {
        return Vec3::Constant(v.get<double>());
    }
    if (!v.is_array() || v.size() != 3) {
        throw ParseError("field \"" + field + "\": expected an array of 3 numbers");
    }
    return Vec3(as_number(v[0], field), as_number(v[1], field), as_number(v[2], field));
}

InertiaModel parse_inertia(const json& v) {
    Vec3 j;
    if (v.is_object()) {
        j = Vec3(as_number(require(v, "Jx", "inertia"), "inertia.Jx"),
                 as_number(require(v, "Jy", "inertia"), "inertia.Jy"),
                 as_number(require(v, "Jz", "inertia"), "inertia.Jz"));
    } else if (v.is_array() && v.size() == 3 && v[0].is_array()) {
        Mat3 m;
        for (int r = 0; r < 3; ++r) {
            const Vec3 row = as_vec3(v[static_cast<std::size_t>(r)], "inertia");
            m.row(r) = row.transpose();
        }
        if ((m - Mat3(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0) {
            throw ValidationError("field \"inertia\": matrix must be diagonal in principal axes");
        }
        j = m.diagonal();
    } else {
        j = as_vec3(v, "inertia");
    }
    try {
        return InertiaModel(j[0], j[1], j[2]);
    } catch (const InvalidInertia& e) {
        throw ValidationError(std::string("field \"inertia\": ") + e.what());
    }
}

Rotation parse_attitude(const json& v, const std::string& field, std::vector<std::string>& notices) {
    if (!v.is_object()) {
        throw ParseError("field \"" + field + "\": expected an object");
    }
    if (v.contains("quaternion")) {
        const json& q = v.at("quaternion");
        if (!q.is_array() || q.size() != 4) {
            throw ParseError("field \"" + field + ".quaternion\": expected an array of 4 numbers");
        }
        Vec4 c;
        for (int i = 0; i < 4; ++i) {
            c[i] = as_number(q[static_cast<std::size_t>(i)], field + ".quaternion");
        }
        const double n = c.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw ValidationError("field \"" + field + ".quaternion\": zero or non-finite quaternion");
        }
        if (std::abs(n - 1.0) > so3::kQuaternionNormTolerance) {
            notices.push_back(field + ": quaternion normalized (norm was " + std::to_string(n) + ")");
        }
        return quat_matrix(Vec4(c / n));
    }
    Vec3 axis = as_vec3(require(v, "axis", field), field + ".axis");
    double angle = as_number(require(v, "angle", field), field + ".angle");
    const std::string unit = v.value("unit", std::string("rad"));
    if (unit == "deg") {
        angle *= std::numbers::pi / 180.0;
    } else if (unit != "rad") {
        throw ValidationError("field \"" + field + ".unit\": expected \"deg\" or \"rad\"");
    }
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ValidationError("field \"" + field + ".axis\": zero or non-finite axis");
    }
    if (std::abs(n - 1.0) > 1e-12) {
        axis /= n;
        notices.push_back(field + ": axis normalized to unit length");
    }
    return exp_rodrigues(Vec3(angle * axis));
}

void check_positive(const Vec3& v, const std::string& field) {
    if (!(v.array() > 0.0).all() || !v.allFinite()) {
        throw ValidationError("field \"" + field + "\": every component must be positive");
    }
}

// ---- CSV helpers ------------------------------------------------------------

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string trim(std::string s) {
    const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

bool parse_double(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) {
        return false;
    }
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!trim(line).empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

}  // namespace

// ---- config -----------------------------------------------------------------

ManeuverConfig parse_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ":" + line_of(text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError(source + ": top level must be an object");
    }

    ManeuverConfig cfg;
    ManeuverProblem& p = cfg.problem;
    p.inertia = parse_inertia(require(doc, "inertia", "top level"));
    p.R_i = doc.contains("initial_attitude")
                ? parse_attitude(doc.at("initial_attitude"), "initial_attitude", cfg.notices)
                : Rotation::Identity();
    p.R_f = parse_attitude(require(doc, "final_attitude", "top level"), "final_attitude", cfg.notices);
    p.Pi_i = as_vec3(require(doc, "initial_momentum", "top level"), "initial_momentum");
    p.Pi_f = doc.contains("final_momentum") ? as_vec3(doc.at("final_momentum"), "final_momentum")
                                            : Vec3::Zero();

    p.h = as_number(require(doc, "h", "top level"), "h");
    if (!(p.h > 0.0) || !std::isfinite(p.h)) {
        throw ValidationError("field \"h\": step length must be positive");
    }
    if (doc.contains("N")) {
        const json& n = doc.at("N");
        if (!n.is_number_integer()) {
            throw ParseError("field \"N\": expected an integer");
        }
        p.N = n.get<int>();
        if (doc.contains("T") && std::lround(as_number(doc.at("T"), "T") / p.h) != p.N) {
            throw ValidationError("fields \"N\" and \"T\" disagree: N must equal round(T/h)");
        }
    } else if (doc.contains("T")) {
        const double T = as_number(doc.at("T"), "T");
        p.N = static_cast<int>(std::lround(T / p.h));
    } else {
        throw ValidationError("missing required field \"N\" or \"T\" (top level)");
    }
    if (p.N < 2) {
        throw ValidationError("field \"N\": horizon must have at least 2 steps");
    }

    const json& bounds = require(doc, "bounds", "top level");
    p.bounds.c = as_vec3(require(bounds, "c", "bounds"), "bounds.c", true);
    p.bounds.b = as_vec3(require(bounds, "b", "bounds"), "bounds.b", true);
    check_positive(p.bounds.c, "c");
    check_positive(p.bounds.b, "b");
    if ((p.Pi_i.cwiseAbs().array() > p.bounds.b.array()).any()) {
        throw ValidationError("field \"initial_momentum\": outside the momentum bound b");
    }
    if ((p.Pi_f.cwiseAbs().array() > p.bounds.b.array()).any()) {
        throw ValidationError("field \"final_momentum\": outside the momentum bound b");
    }

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        if (s.contains("tol")) cfg.solver.tol = as_number(s.at("tol"), "solver.tol");
        if (s.contains("max_iter")) {
            if (!s.at("max_iter").is_number_integer()) {
                throw ParseError("field \"solver.max_iter\": expected an integer");
            }
            cfg.solver.max_iter = s.at("max_iter").get<int>();
        }
        if (s.contains("damping")) cfg.solver.damping = as_number(s.at("damping"), "solver.damping");
        if (s.contains("linear_solver")) {
            const std::string kind = s.at("linear_solver").get<std::string>();
            if (kind == "sparse") {
                cfg.solver.linear_solver = LinearSolverKind::Sparse;
            } else if (kind != "dense") {
                throw ValidationError("field \"solver.linear_solver\": expected \"dense\" or \"sparse\"");
            }
        }
    }
    if (!(cfg.solver.tol > 0.0)) throw ValidationError("field \"tol\": must be positive");
    if (cfg.solver.max_iter < 1) throw ValidationError("field \"max_iter\": must be at least 1");
    if (!(cfg.solver.damping > 0.0 && cfg.solver.damping <= 1.0)) {
        throw ValidationError("field \"damping\": must lie in (0, 1]");
    }

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        if (o.contains("dir")) cfg.output.dir = o.at("dir").get<std::string>();
        if (o.contains("trajectory")) cfg.output.trajectory = o.at("trajectory").get<std::string>();
        if (o.contains("report")) cfg.output.report = o.at("report").get<std::string>();
        if (o.contains("plot")) cfg.output.plot = o.at("plot").get<std::string>();
    }
    return cfg;
}

ManeuverConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

// ---- trajectories -----------------------------------------------------------

std::vector<TrajectoryRow> trajectory_rows(const Trajectory& trajectory) {
    std::vector<TrajectoryRow> rows;
    const std::size_t n = trajectory.Pi.size();
    for (std::size_t k = 0; k < n; ++k) {
        TrajectoryRow r;
        r.t = static_cast<double>(k) * trajectory.h;
        r.Pi = trajectory.Pi[k];
        if (k < trajectory.u.size()) r.u = trajectory.u[k];
        r.lambda_bar = trajectory.lambda_bar[k];
        r.q = rotation_to_quat(trajectory.R[k]).coeffs;
        r.active = trajectory.active[k];
        rows.push_back(r);
    }
    return rows;
}

std::vector<TrajectoryRow> simulation_rows(const std::vector<DynamicsState>& states,
                                           const std::vector<Vec3>& controls, double h,
                                           const Bounds& bounds) {
    std::vector<TrajectoryRow> rows;
    for (std::size_t k = 0; k < states.size(); ++k) {
        TrajectoryRow r;
        r.t = static_cast<double>(k) * h;
        r.Pi = states[k].Pi;
        if (k < controls.size()) r.u = controls[k];
        r.q = rotation_to_quat(states[k].R).coeffs;
        for (int i = 0; i < 3; ++i) {
            r.active[i] = std::abs(r.Pi[i]) >= bounds.b[i];
        }
        rows.push_back(r);
    }
    return rows;
}

std::string format_trajectory_csv(const std::vector<TrajectoryRow>& rows) {
    std::string out = std::string(kTrajectoryHeader) + "\n";
    for (const TrajectoryRow& r : rows) {
        out += fmt(r.t);
        for (int i = 0; i < 3; ++i) out += "," + fmt(r.Pi[i]);
        for (int i = 0; i < 3; ++i) out += "," + (r.u ? fmt((*r.u)[i]) : std::string());
        for (int i = 0; i < 3; ++i) out += "," + (r.lambda_bar ? fmt((*r.lambda_bar)[i]) : std::string());
        for (int i = 0; i < 4; ++i) out += "," + fmt(r.q[i]);
        for (int i = 0; i < 3; ++i) out += r.active[i] ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows) {
    write_text(path, format_trajectory_csv(rows));
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || trim(lines.front()) != kTrajectoryHeader) {
        throw ParseError(path.string() + ":1: expected trajectory header \"" +
                         std::string(kTrajectoryHeader) + "\"");
    }
    std::vector<TrajectoryRow> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const std::vector<std::string> cells = split(lines[n]);
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        if (cells.size() != 17) {
            throw ParseError(where + ": expected 17 fields, found " + std::to_string(cells.size()));
        }
        const auto num = [&](std::size_t c) {
            double v;
            if (!parse_double(cells[c], v)) throw ParseError(where + ": bad number in column " + std::to_string(c + 1));
            return v;
        };
        const auto optional_vec = [&](std::size_t c) -> std::optional<Vec3> {
            if (trim(cells[c]).empty() && trim(cells[c + 1]).empty() && trim(cells[c + 2]).empty()) {
                return std::nullopt;
            }
            return Vec3(num(c), num(c + 1), num(c + 2));
        };
        TrajectoryRow r;
        r.t = num(0);
        r.Pi = Vec3(num(1), num(2), num(3));
        r.u = optional_vec(4);
        r.lambda_bar = optional_vec(7);
        r.q = Vec4(num(10), num(11), num(12), num(13));
        for (int i = 0; i < 3; ++i) r.active[i] = num(14 + static_cast<std::size_t>(i)) != 0.0;
        rows.push_back(r);
    }
    return rows;
}

std::vector<Vec3> read_controls_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw ParseError(path.string() + ": empty controls file");
    }
    std::array<std::size_t, 3> cols{0, 1, 2};
    std::size_t first = 0;
    const std::vector<std::string> head = split(lines.front());
    double probe;
    if (!head.empty() && !parse_double(head.front(), probe)) {
        first = 1;
        const auto find = [&](const char* name) {
            for (std::size_t c = 0; c < head.size(); ++c) {
                if (trim(head[c]) == name) return c;
            }
            return std::numeric_limits<std::size_t>::max();
        };
        if (find("u1") != std::numeric_limits<std::size_t>::max()) {
            cols = {find("u1"), find("u2"), find("u3")};
        }
    }
    std::vector<Vec3> controls;
    for (std::size_t n = first; n < lines.size(); ++n) {
        const std::vector<std::string> cells = split(lines[n]);
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        const std::size_t need = *std::max_element(cols.begin(), cols.end());
        if (cells.size() <= need) {
            throw ParseError(where + ": too few fields");
        }
        if (trim(cells[cols[0]]).empty() && trim(cells[cols[1]]).empty() && trim(cells[cols[2]]).empty()) {
            continue;  // terminal trajectory row
        }
        Vec3 u;
        for (int i = 0; i < 3; ++i) {
            if (!parse_double(cells[cols[static_cast<std::size_t>(i)]], u[i])) {
                throw ParseError(where + ": bad torque value");
            }
        }
        controls.push_back(u);
    }
    return controls;
}

// ---- SVG --------------------------------------------------------------------

std::string render_svg(const std::vector<TrajectoryRow>& rows) {
    constexpr double width = 900, panel_h = 240, left = 80, right = 20, top = 30, bottom = 40;
    const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};
    struct Panel {
        const char* title;
        std::vector<std::pair<double, Vec3>> pts;
    };
    Panel panels[3] = {{"control u (N m)", {}}, {"momentum Pi (N m s)", {}}, {"scaled costate lambda_bar", {}}};
    for (const TrajectoryRow& r : rows) {
        if (r.u) panels[0].pts.emplace_back(r.t, *r.u);
        panels[1].pts.emplace_back(r.t, r.Pi);
        if (r.lambda_bar) panels[2].pts.emplace_back(r.t, *r.lambda_bar);
    }
    const double t_max = rows.empty() ? 1.0 : std::max(rows.back().t, 1e-12);

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << 3 * panel_h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int p = 0; p < 3; ++p) {
        const double y0 = p * panel_h + top, ph = panel_h - top - bottom, pw = width - left - right;
        s << "<text x=\"" << left << "\" y=\"" << y0 - 10 << "\" font-weight=\"bold\">" << panels[p].title
          << "</text>\n";
        s << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << ph
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        const auto& pts = panels[p].pts;
        if (pts.empty()) {
            s << "<text x=\"" << left + pw / 2 << "\" y=\"" << y0 + ph / 2
              << "\" text-anchor=\"middle\">not available</text>\n";
            continue;
        }
        double lo = 0.0, hi = 0.0;
        for (const auto& [t, v] : pts) {
            lo = std::min(lo, v.minCoeff());
            hi = std::max(hi, v.maxCoeff());
        }
        if (hi - lo < 1e-12) {
            hi += 1.0;
            lo -= 1.0;
        }
        const auto X = [&](double t) { return left + pw * t / t_max; };
        const auto Y = [&](double v) { return y0 + ph * (hi - v) / (hi - lo); };
        for (double v : {lo, 0.0, hi}) {
            s << "<text x=\"" << left - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << fmt(std::round(v * 1000) / 1000)
              << "</text>\n";
        }
        s << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << Y(0) << "\" y2=\"" << Y(0)
          << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
        s << "<text x=\"" << left << "\" y=\"" << y0 + ph + 16 << "\">0</text><text x=\"" << left + pw
          << "\" y=\"" << y0 + ph + 16 << "\" text-anchor=\"end\">" << fmt(t_max) << "</text><text x=\""
          << left + pw / 2 << "\" y=\"" << y0 + ph + 30 << "\" text-anchor=\"middle\">t (s)</text>\n";
        for (int i = 0; i < 3; ++i) {
            s << "<polyline fill=\"none\" stroke=\"" << colors[i] << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [t, v] : pts) {
                s << X(t) << "," << Y(v[i]) << " ";
            }
            s << "\"/>\n<text x=\"" << left + pw - 60 << "\" y=\"" << y0 + 16 + 14 * i << "\" fill=\"" << colors[i]
              << "\">axis " << i + 1 << "</text>\n";
        }
    }
    s << "</svg>\n";
    return s.str();
}

void write_svg(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows) {
    write_text(path, render_svg(rows));
}

// ---- reports ----------------------------------------------------------------

SolutionSummary summarize(const Trajectory& trajectory, const ManeuverProblem& problem) {
    SolutionSummary s;
    s.orientation_error = rotation_angle(Mat3(trajectory.R.back().transpose() * problem.R_f));
    s.terminal_momentum_error = (trajectory.Pi.back() - problem.Pi_f).norm();
    s.max_control_excess = -std::numeric_limits<double>::infinity();
    s.max_momentum_excess = -std::numeric_limits<double>::infinity();
    for (const Vec3& u : trajectory.u) {
        s.max_control_excess = std::max(s.max_control_excess, (u.cwiseAbs() - problem.bounds.c).maxCoeff());
        s.energy += 0.5 * u.squaredNorm();
    }
    for (const Vec3& pi : trajectory.Pi) {
        s.max_momentum_excess = std::max(s.max_momentum_excess, (pi.cwiseAbs() - problem.bounds.b).maxCoeff());
    }
    return s;
}

std::string format_report_json(const SolveResult& result, const SolutionSummary& summary) {
    const SolverReport& r = result.report;
    json j;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["final_residual_inf"] = r.final_residual_inf;
    j["residual_history"] = r.residual_history;
    j["active_count_history"] = r.active_count_history;
    json sets = json::array();
    for (const auto& set : r.active_set_history) {
        json one = json::array();
        for (const auto& [k, i] : set) one.push_back({k, i + 1});
        sets.push_back(one);
    }
    j["active_set_history"] = sets;  // (step, axis) pairs, axis 1-based
    j["timings"] = {{"wall_time_s", r.wall_time}};
    j["error_kind"] = r.error_kind.empty() ? json(nullptr) : json(r.error_kind);
    j["error_message"] = r.error_message.empty() ? json(nullptr) : json(r.error_message);
    j["summary"] = {{"orientation_error_rad", summary.orientation_error},
                    {"terminal_momentum_error", summary.terminal_momentum_error},
                    {"max_control_excess", summary.max_control_excess},
                    {"max_momentum_excess", summary.max_momentum_excess},
                    {"energy", summary.energy}};
    return j.dump(2) + "\n";
}

// ---- commands ---------------------------------------------------------------

SolveOutcome run_solve(const ManeuverConfig& config) {
    SolveOutcome out{modified_shooting_solve(initial_guess(config.problem), config.problem, config.solver),
                     {}, {}};
    out.trajectory = reconstruct_trajectory(out.result.X, config.problem, out.result.active);
    out.summary = summarize(out.trajectory, config.problem);
    const std::vector<TrajectoryRow> rows = trajectory_rows(out.trajectory);
    write_trajectory_csv(config.output.trajectory_path(), rows);
    write_text(config.output.report_path(), format_report_json(out.result, out.summary));
    write_svg(config.output.plot_path(), rows);
    return out;
}

SimulateOutcome run_simulate(const ManeuverConfig& config, const std::vector<Vec3>& controls) {
    const ManeuverProblem& p = config.problem;
    if (static_cast<int>(controls.size()) != p.N) {
        throw ValidationError("controls: expected " + std::to_string(p.N) + " rows, found " +
                              std::to_string(controls.size()));
    }
    SimulateOutcome out;
    out.controls = controls;
    out.states = propagate(DynamicsState{p.R_i, p.Pi_i}, controls, p.h, p.inertia);
    write_trajectory_csv(config.output.trajectory_path(),
                         simulation_rows(out.states, controls, p.h, p.bounds));
    return out;
}

CheckReport run_check(const ManeuverConfig& config) {
    const ManeuverProblem& p = config.problem;
    CheckReport c;
    c.jd_diagonal = p.inertia.jd_diagonal();
    c.lemma1_threshold = lemma1_threshold(p.inertia);
    UnitQuaternion guess;
    Vec3 pi = p.Pi_i;
    for (int k = 0; k < p.N; ++k) {
        const RelativeRotationSolution sol = solve_relative_rotation(pi, p.h, p.inertia, guess);
        guess = sol.q;
        const double cond = condition_number(trace_operator(sol.F, p.inertia));
        if (cond > c.worst_trace_condition) {
            c.worst_trace_condition = cond;
            c.worst_trace_condition_step = k;
        }
        c.max_step_momentum = std::max(c.max_step_momentum, p.h * pi.norm());
        c.max_step_angle = std::max(c.max_step_angle, rotation_angle(sol.F));
        pi = sol.F.transpose() * pi;
    }
    const double limit = 0.9 * std::numbers::pi / 2.0;
    c.near_half_pi_bound = c.max_step_angle > limit;
    return c;
}

std::string format_check_json(const CheckReport& c) {
    json j;
    j["jd_diagonal"] = {c.jd_diagonal[0], c.jd_diagonal[1], c.jd_diagonal[2]};
    j["lemma1_threshold"] = c.lemma1_threshold;
    j["worst_trace_condition"] = c.worst_trace_condition;
    j["worst_trace_condition_step"] = c.worst_trace_condition_step;
    j["max_step_momentum"] = c.max_step_momentum;
    j["max_step_angle_rad"] = c.max_step_angle;
    j["near_half_pi_bound"] = c.near_half_pi_bound;
    return j.dump(2) + "\n";
}

}  // namespace attitude

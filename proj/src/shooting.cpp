#include "attitude/shooting.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace attitude {

namespace {

Eigen::Index sigma_row(int k) { return 6 * static_cast<Eigen::Index>(k - 1); }
Eigen::Index xi_row(int k) { return 6 * static_cast<Eigen::Index>(k - 1) + 3; }

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

ShootingVector::ShootingVector(int N) : N_(N), data_(Eigen::VectorXd::Zero(size_for(N))) {
    if (N < 1) {
        throw std::invalid_argument("ShootingVector: horizon must be positive");
    }
}

ShootingVector::ShootingVector(int N, Eigen::VectorXd data) : N_(N), data_(std::move(data)) {
    if (N < 1 || data_.size() != size_for(N)) {
        throw std::invalid_argument("ShootingVector: length must be 6N+9");
    }
}

ShootingVector initial_guess(const ManeuverProblem& problem) {
    ShootingVector X(problem.N);
    for (int k = 0; k <= problem.N; ++k) {
        const double s = static_cast<double>(k) / problem.N;
        X.pi(k) = (1.0 - s) * problem.Pi_i + s * problem.Pi_f;
    }
    return X;
}

ShootingLinearization linearize(const ShootingVector& X, const ManeuverProblem& problem) {
    const int N = problem.N;
    ShootingLinearization lin;
    lin.steps.reserve(static_cast<std::size_t>(N) + 1);
    lin.F.reserve(static_cast<std::size_t>(N) + 1);
    UnitQuaternion guess;
    for (int k = 0; k <= N; ++k) {
        try {
            lin.steps.push_back(evaluate_step(X.pi(k), problem.h, problem.inertia, guess));
        } catch (const Error& e) {
            throw DynamicsFailure(k, e);
        }
        guess = lin.steps.back().sol.q;
        lin.F.push_back(lin.steps.back().F());
    }
    lin.Q.assign(static_cast<std::size_t>(N) + 1, Rotation::Identity());
    for (int k = 1; k <= N; ++k) {
        lin.Q[k] = lin.Q[k - 1] * lin.F[k];
    }
    try {
        lin.orientation = orientation_constraint(
            problem.R_i, problem.R_f, std::span<const Rotation>(lin.F.data(), static_cast<std::size_t>(N)));
    } catch (const Error& e) {
        throw DynamicsFailure(N, e);
    }
    return lin;
}

Eigen::VectorXd assemble_matching(const ShootingVector& X, const ManeuverProblem& problem) {
    return assemble_matching(X, problem, linearize(X, problem));
}

Eigen::VectorXd assemble_matching(const ShootingVector& X, const ManeuverProblem& problem,
                                  const ShootingLinearization& lin) {
    const int N = problem.N;
    const double h = problem.h;
    const Vec3 mu = X.mu_bar0();
    Eigen::VectorXd m(ShootingVector::size_for(N));
    for (int k = 1; k <= N; ++k) {
        m.segment<3>(sigma_row(k)) =
            sigma_residual(lin.F[k - 1], X.pi(k - 1), X.pi(k), X.lambda_bar(k - 1), h, problem.bounds);
        m.segment<3>(xi_row(k)) = xi_residual(lin.steps[k], X.pi(k), X.lambda_bar(k - 1),
                                              X.lambda_bar(k), mu, lin.Q[k], Vec3::Zero(), h);
    }
    m.segment<6>(6 * N) = momentum_boundary_residual(X.pi(0), X.pi(N), problem.Pi_i, problem.Pi_f);
    m.segment<3>(6 * N + 6) = lin.orientation;
    return m;
}

Eigen::MatrixXd assemble_jacobian(const ShootingVector& X, const ManeuverProblem& problem) {
    return assemble_jacobian(X, problem, linearize(X, problem));
}

Eigen::MatrixXd assemble_jacobian(const ShootingVector& X, const ManeuverProblem& problem,
                                  const ShootingLinearization& lin) {
    const int N = problem.N;
    const double h = problem.h;
    const Eigen::Index n = ShootingVector::size_for(N);
    const Eigen::Index mu_col = X.mu_offset();
    const Vec3 mu = X.mu_bar0();
    const Mat3 id = Mat3::Identity();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);

    // d(Q_k^T mu)/dPi_j^i = Q_k^T (mu x (Q_j W_j^i)) for 1 <= j <= k.
    std::vector<Mat3> q_rotated_w(static_cast<std::size_t>(N) + 1, Mat3::Zero());
    for (int j = 1; j <= N; ++j) {
        for (int i = 0; i < 3; ++i) {
            q_rotated_w[j].col(i) = mu.cross(lin.Q[j] * lin.steps[j].W[i]);
        }
    }

    for (int k = 1; k <= N; ++k) {
        const StepModel& prev = lin.steps[k - 1];
        const StepModel& cur = lin.steps[k];
        const Eigen::Index rs = sigma_row(k);
        const Eigen::Index rx = xi_row(k);
        const Vec3 pi_prev = X.pi(k - 1);

        J.block<3, 3>(rs, ShootingVector::pi_offset(k)) = id;
        for (int i = 0; i < 3; ++i) {
            J.block<3, 1>(rs, ShootingVector::pi_offset(k - 1) + i) =
                -(prev.F().transpose().col(i) + prev.dF[i].transpose() * pi_prev);
        }
        J.block<3, 3>(rs, ShootingVector::lambda_offset(k - 1)) =
            -h * control_generalized_gradient(X.lambda_bar(k - 1), problem.bounds);

        const Mat3 nq = cur.N * lin.Q[k].transpose();
        const Vec3 mu_k = lin.Q[k].transpose() * mu;
        const Vec3 lam = X.lambda_bar(k);
        J.block<3, 3>(rx, ShootingVector::lambda_offset(k - 1)) = -id;
        J.block<3, 3>(rx, ShootingVector::lambda_offset(k)) = cur.A;
        J.block<3, 3>(rx, mu_col) = nq;
        for (int i = 0; i < 3; ++i) {
            J.block<3, 1>(rx, ShootingVector::pi_offset(k) + i) = cur.dA[i] * lam + cur.dN[i] * mu_k;
        }
        for (int j = 1; j <= k; ++j) {
            J.block<3, 3>(rx, ShootingVector::pi_offset(j)) += nq * q_rotated_w[j];
        }
    }

    const Eigen::Index rm = 6 * static_cast<Eigen::Index>(N);
    J.block<3, 3>(rm, ShootingVector::pi_offset(N)) = id;
    J.block<3, 3>(rm + 3, ShootingVector::pi_offset(0)) = id;

    // Orientation rows: Jr^{-1}(C) S_k^T W_k with S_k = F_{k+1} ... F_{N-1},
    // accumulated backwards.
    const Eigen::Index ro = rm + 6;
    const Mat3 jr_inv = right_jacobian_inverse(lin.orientation);
    Mat3 trailing_t = id;
    for (int k = N - 1; k >= 0; --k) {
        const StepModel& s = lin.steps[k];
        for (int i = 0; i < 3; ++i) {
            J.block<3, 1>(ro, ShootingVector::pi_offset(k) + i) = jr_inv * trailing_t * s.W[i];
        }
        trailing_t = trailing_t * s.F().transpose();
    }
    return J;
}

ActiveSet::ActiveSet(int N)
    : side(static_cast<std::size_t>(N) + 1,
           std::array<BoundSide, 3>{BoundSide::Inactive, BoundSide::Inactive, BoundSide::Inactive}),
      beta(static_cast<std::size_t>(N) + 1, Vec3::Zero()) {}

int ActiveSet::count() const {
    int c = 0;
    for (const auto& s : side) {
        for (BoundSide b : s) {
            c += b != BoundSide::Inactive;
        }
    }
    return c;
}

const SolveResult& SolveResult::value() const {
    if (report.converged) {
        return *this;
    }
    const std::string& k = report.error_kind;
    const std::string& msg = report.error_message;
    if (k == "SingularJacobian") throw SingularJacobian(msg);
    if (k == "ActiveSetCycling") throw ActiveSetCycling(msg);
    if (k == "DynamicsFailure") throw Error("DynamicsFailure", msg);
    throw MaxIterationsExceeded(msg);
}

Eigen::VectorXd solve_linear(const Eigen::MatrixXd& J, const Eigen::VectorXd& rhs,
                             LinearSolverKind kind) {
    if (kind == LinearSolverKind::Sparse) {
        Eigen::SparseMatrix<double> sparse = J.sparseView();
        sparse.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(sparse);
        if (lu.info() != Eigen::Success) {
            throw SingularJacobian("sparse LU failed: " + lu.lastErrorMessage());
        }
        Eigen::VectorXd x = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !x.allFinite()) {
            throw SingularJacobian("sparse LU solve failed");
        }
        return x;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    if (!(lu.rcond() > std::numeric_limits<double>::epsilon())) {
        throw SingularJacobian("Jacobian is rank deficient (rcond " + std::to_string(lu.rcond()) + ")");
    }
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) {
        throw SingularJacobian("Newton step is not finite");
    }
    return x;
}

ShootingVector project_feasible(const ShootingVector& X, const Bounds& bounds) {
    ShootingVector out = X;
    for (int k = 0; k <= X.horizon(); ++k) {
        for (int i = 0; i < 3; ++i) {
            const double p = X.pi(k)[i];
            out.pi(k)[i] = sgn(p) * std::min(bounds.b[i], std::abs(p));
        }
    }
    return out;
}

std::vector<bool> projected_steps(const ShootingVector& before, const ShootingVector& after) {
    std::vector<bool> changed(static_cast<std::size_t>(before.horizon()) + 1, false);
    for (int k = 0; k <= before.horizon(); ++k) {
        changed[k] = before.pi(k) != after.pi(k);
    }
    return changed;
}

ShootingVector update_costates_after_projection(const ShootingVector& X_projected,
                                                const ManeuverProblem& problem,
                                                const std::vector<bool>& projected) {
    ShootingVector out = X_projected;
    const int N = problem.N;
    const bool all = projected.empty();
    for (int k = 1; k <= N; ++k) {
        if (!all && !projected[k - 1] && !projected[k]) {
            continue;
        }
        RelativeRotationSolution sol;
        try {
            sol = solve_relative_rotation(X_projected.pi(k - 1), problem.h, problem.inertia);
        } catch (const Error& e) {
            throw DynamicsFailure(k - 1, e);
        }
        const Vec3 u = (Vec3(X_projected.pi(k)) - sol.F.transpose() * X_projected.pi(k - 1)) / problem.h;
        for (int i = 0; i < 3; ++i) {
            if (std::abs(u[i]) < problem.bounds.c[i]) {
                out.lambda_bar(k - 1)[i] = -u[i];
            }
        }
    }
    return out;
}

ActiveSet identify_active_set(const ShootingVector& X_projected, const ManeuverProblem& problem) {
    return identify_active_set(X_projected, problem, linearize(X_projected, problem));
}

ActiveSet identify_active_set(const ShootingVector& X, const ManeuverProblem& problem,
                              const ShootingLinearization& lin) {
    const int N = problem.N;
    ActiveSet active(N);
    const Vec3 mu = X.mu_bar0();
    for (int k = 1; k < N; ++k) {
        std::array<bool, 3> on_bound{};
        bool any = false;
        for (int i = 0; i < 3; ++i) {
            on_bound[i] = std::abs(X.pi(k)[i]) == problem.bounds.b[i];
            any = any || on_bound[i];
        }
        if (!any) {
            continue;
        }
        const Vec3 beta = compute_slack_beta(lin.steps[k], X.pi(k), X.lambda_bar(k - 1),
                                             X.lambda_bar(k), mu, lin.Q[k], problem.h, on_bound);
        for (int i = 0; i < 3; ++i) {
            if (on_bound[i] && beta[i] > 0.0) {
                active.side[k][i] = X.pi(k)[i] > 0.0 ? BoundSide::Upper : BoundSide::Lower;
                active.beta[k][i] = beta[i];
            }
        }
    }
    return active;
}

void enforce_active_constraints(const ActiveSet& active, const ShootingVector& X,
                                const Bounds& bounds, Eigen::VectorXd& residual,
                                Eigen::MatrixXd& jacobian) {
    const int N = X.horizon();
    for (int k = 1; k <= N && k < static_cast<int>(active.side.size()); ++k) {
        for (int i = 0; i < 3; ++i) {
            if (!active.active(k, i)) {
                continue;
            }
            const Eigen::Index row = xi_row(k) + i;
            const double p = X.pi(k)[i];
            residual[row] = std::abs(p) - bounds.b[i];
            if (jacobian.size() == 0) {
                continue;
            }
            jacobian.row(row).setZero();
            jacobian(row, ShootingVector::pi_offset(k) + i) =
                active.side[k][i] == BoundSide::Upper ? 1.0 : -1.0;
        }
    }
}

namespace {

std::vector<std::array<int, 2>> active_pairs(const ActiveSet& a) {
    std::vector<std::array<int, 2>> out;
    for (std::size_t k = 0; k < a.side.size(); ++k) {
        for (int i = 0; i < 3; ++i) {
            if (a.side[k][i] != BoundSide::Inactive) {
                out.push_back({static_cast<int>(k), i});
            }
        }
    }
    return out;
}

// Shared driver for both iterations; `constrained` switches on projection,
// costate repair, active-set identification and row replacement.
SolveResult shooting_loop(const ShootingVector& X0, const ManeuverProblem& problem,
                          const SolverOptions& options, bool constrained) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result{X0, ActiveSet(problem.N), {}};
    SolverReport& report = result.report;
    ShootingVector X = X0;
    std::vector<ActiveSet> recent;
    int cycle_run = 0;

    auto finish = [&](const std::string& kind, const std::string& msg) {
        report.error_kind = kind;
        report.error_message = msg;
        report.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    try {
        for (int iter = 0;; ++iter) {
            ShootingVector Xt = X;
            ActiveSet active(problem.N);
            if (constrained) {
                Xt = project_feasible(X, problem.bounds);
                Xt = update_costates_after_projection(Xt, problem, projected_steps(X, Xt));
            }
            const ShootingLinearization lin = linearize(Xt, problem);
            if (constrained) {
                active = identify_active_set(Xt, problem, lin);
            }
            Eigen::VectorXd r = assemble_matching(Xt, problem, lin);
            Eigen::MatrixXd J;
            enforce_active_constraints(active, Xt, problem.bounds, r, J);
            const double rnorm = inf_norm(r);

            report.residual_history.push_back(rnorm);
            report.active_count_history.push_back(active.count());
            report.active_set_history.push_back(active_pairs(active));
            if (options.record_iterates) {
                report.iterates.push_back(Xt.data());
            }
            result.X = Xt;
            result.active = active;
            report.final_residual_inf = rnorm;
            report.iterations = iter;

            if (rnorm < options.tol) {
                report.converged = true;
                finish("", "");
                return result;
            }
            if (iter >= options.max_iter) {
                finish("MaxIterationsExceeded", "residual " + std::to_string(rnorm) + " after " +
                                                    std::to_string(iter) + " iterations");
                return result;
            }

            if (constrained) {
                if (recent.size() >= 2 && active == recent[recent.size() - 2] &&
                    !(active == recent.back())) {
                    ++cycle_run;
                } else {
                    cycle_run = 0;
                }
                recent.push_back(active);
                if (recent.size() > 2) {
                    recent.erase(recent.begin());
                }
                if (cycle_run >= options.cycle_limit) {
                    finish("ActiveSetCycling", "active set alternated between two sets for " +
                                                   std::to_string(cycle_run) + " iterations");
                    return result;
                }
            }

            J = assemble_jacobian(Xt, problem, lin);
            enforce_active_constraints(active, Xt, problem.bounds, r, J);
            const Eigen::VectorXd dx = solve_linear(J, -r, options.linear_solver);
            X = Xt;
            X.data() += options.damping * dx;
        }
    } catch (const DynamicsFailure& e) {
        finish("DynamicsFailure", e.what());
    } catch (const SingularJacobian& e) {
        finish("SingularJacobian", e.what());
    } catch (const Error& e) {
        finish("DynamicsFailure", std::string(e.kind()) + ": " + e.what());
    }
    return result;
}

}  // namespace

SolveResult newton_solve(const ShootingVector& X0, const ManeuverProblem& problem,
                         const SolverOptions& options) {
    return shooting_loop(X0, problem, options, false);
}

SolveResult modified_shooting_solve(const ShootingVector& X0, const ManeuverProblem& problem,
                                    const SolverOptions& options) {
    return shooting_loop(X0, problem, options, true);
}

JacobianDiagnostic momentum_only_jacobian_diagnostic(const ShootingVector& Y,
                                                     const ManeuverProblem& problem) {
    ShootingVector Z = Y;
    Z.mu_bar0().setZero();
    const Eigen::Index n = ShootingVector::size_for(problem.N) - 3;
    JacobianDiagnostic out;
    out.jacobian = assemble_jacobian(Z, problem).topLeftCorner(n, n);
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(out.jacobian);
    const Eigen::VectorXd& s = svd.singularValues();
    out.condition_number = s[n - 1] > 0.0 ? s[0] / s[n - 1] : std::numeric_limits<double>::infinity();
    const double tol = s[0] * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
    out.rank = static_cast<int>((s.array() > tol).count());
    return out;
}

Trajectory reconstruct_trajectory(const ShootingVector& X, const ManeuverProblem& problem,
                                  const ActiveSet& active) {
    const int N = problem.N;
    Trajectory t;
    t.h = problem.h;
    t.R.push_back(problem.R_i);
    UnitQuaternion guess;
    for (int k = 0; k <= N; ++k) {
        t.Pi.push_back(X.pi(k));
        t.lambda_bar.push_back(X.lambda_bar(k));
        std::array<bool, 3> flags{};
        for (int i = 0; i < 3; ++i) {
            flags[i] = k < static_cast<int>(active.side.size()) && active.active(k, i);
        }
        t.active.push_back(flags);
        if (k < N) {
            t.u.push_back(optimal_control(X.lambda_bar(k), problem.bounds));
            const RelativeRotationSolution sol =
                solve_relative_rotation(X.pi(k), problem.h, problem.inertia, guess);
            guess = sol.q;
            t.R.push_back(t.R.back() * sol.F);
        }
    }
    return t;
}

}  // namespace attitude

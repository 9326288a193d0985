#pragma once

// Multiple shooting for the reduced necessary conditions.
//
// Unknowns  X = (Pi_0, lambda_bar_0, ..., Pi_N, lambda_bar_N, mu_bar_0), length 6N+9.
// Residual  M = (Sigma_1, Xi_1, ..., Sigma_N, Xi_N, C_mtm, C_ornt).

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "attitude/optimality.hpp"

namespace attitude {

struct ManeuverProblem {
    InertiaModel inertia{1.0, 1.0, 1.0};
    Rotation R_i = Rotation::Identity();
    Rotation R_f = Rotation::Identity();
    Vec3 Pi_i = Vec3::Zero();
    Vec3 Pi_f = Vec3::Zero();
    double h = 0.1;
    int N = 2;
    Bounds bounds;
};

class ShootingVector {
public:
    explicit ShootingVector(int N);
    // Throws std::invalid_argument unless data.size() == 6N+9.
    ShootingVector(int N, Eigen::VectorXd data);

    static Eigen::Index size_for(int N) { return 6 * static_cast<Eigen::Index>(N) + 9; }
    static Eigen::Index pi_offset(int k) { return 6 * static_cast<Eigen::Index>(k); }
    static Eigen::Index lambda_offset(int k) { return 6 * static_cast<Eigen::Index>(k) + 3; }
    Eigen::Index mu_offset() const { return 6 * static_cast<Eigen::Index>(N_) + 6; }

    int horizon() const { return N_; }
    Eigen::Index size() const { return data_.size(); }

    auto pi(int k) { return data_.segment<3>(pi_offset(k)); }
    auto pi(int k) const { return data_.segment<3>(pi_offset(k)); }
    auto lambda_bar(int k) { return data_.segment<3>(lambda_offset(k)); }
    auto lambda_bar(int k) const { return data_.segment<3>(lambda_offset(k)); }
    auto mu_bar0() { return data_.segment<3>(mu_offset()); }
    auto mu_bar0() const { return data_.segment<3>(mu_offset()); }

    const Eigen::VectorXd& data() const { return data_; }
    Eigen::VectorXd& data() { return data_; }

private:
    int N_;
    Eigen::VectorXd data_;
};

// Zero costates, momenta interpolated linearly from Pi_i to Pi_f.
ShootingVector initial_guess(const ManeuverProblem& problem);

// Per-iterate cache: step models at every Pi_k, the prefix products
// Q_k = F_1 ... F_k (Q_0 = I) and the orientation residual.
struct ShootingLinearization {
    std::vector<StepModel> steps;
    std::vector<Rotation> F;
    std::vector<Rotation> Q;
    Vec3 orientation = Vec3::Zero();
};

// Throws DynamicsFailure naming the step whose implicit solve failed.
ShootingLinearization linearize(const ShootingVector& X, const ManeuverProblem& problem);

Eigen::VectorXd assemble_matching(const ShootingVector& X, const ManeuverProblem& problem);
Eigen::VectorXd assemble_matching(const ShootingVector& X, const ManeuverProblem& problem,
                                  const ShootingLinearization& lin);

Eigen::MatrixXd assemble_jacobian(const ShootingVector& X, const ManeuverProblem& problem);
Eigen::MatrixXd assemble_jacobian(const ShootingVector& X, const ManeuverProblem& problem,
                                  const ShootingLinearization& lin);

enum class BoundSide { Inactive, Upper, Lower };

struct ActiveSet {
    std::vector<std::array<BoundSide, 3>> side;  // indexed by k = 0..N
    std::vector<Vec3> beta;                       // nonzero only where active

    explicit ActiveSet(int N = 0);

    bool active(int k, int i) const { return side[static_cast<std::size_t>(k)][i] != BoundSide::Inactive; }
    int count() const;
    bool operator==(const ActiveSet& other) const { return side == other.side; }
};

enum class LinearSolverKind { Dense, Sparse };

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double damping = 1.0;
    LinearSolverKind linear_solver = LinearSolverKind::Dense;
    int cycle_limit = 10;
    bool record_iterates = false;
};

struct SolverReport {
    int iterations = 0;
    std::vector<double> residual_history;
    std::vector<int> active_count_history;
    std::vector<std::vector<std::array<int, 2>>> active_set_history;  // (k, i) pairs
    std::vector<Eigen::VectorXd> iterates;  // evaluation points, when recorded
    bool converged = false;
    double final_residual_inf = 0.0;
    double wall_time = 0.0;
    std::string error_kind;
    std::string error_message;
};

struct SolveResult {
    ShootingVector X;
    ActiveSet active;
    SolverReport report;

    // Rethrows the recorded failure as its typed error, if any.
    const SolveResult& value() const;
};

// Solves J dx = rhs. Throws SingularJacobian when the factorization detects
// rank deficiency.
Eigen::VectorXd solve_linear(const Eigen::MatrixXd& J, const Eigen::VectorXd& rhs,
                             LinearSolverKind kind);

// Plain multiple-shooting Newton iteration.
SolveResult newton_solve(const ShootingVector& X0, const ManeuverProblem& problem,
                         const SolverOptions& options = {});

// Componentwise clamp of every momentum block into [-b, b].
ShootingVector project_feasible(const ShootingVector& X, const Bounds& bounds);

// Indices k whose momentum block differs between the two vectors.
std::vector<bool> projected_steps(const ShootingVector& before, const ShootingVector& after);

// Overwrites interior components of lambda_bar_{k-1} with minus the control
// implied by the (projected) momenta. With a mask, only the transitions
// touching a projected momentum are rewritten; an empty mask rewrites all.
ShootingVector update_costates_after_projection(const ShootingVector& X_projected,
                                                const ManeuverProblem& problem,
                                                const std::vector<bool>& projected = {});

// Components sitting exactly on a bound whose slack multiplier is positive,
// over the interior steps k = 1..N-1.
ActiveSet identify_active_set(const ShootingVector& X_projected, const ManeuverProblem& problem);
ActiveSet identify_active_set(const ShootingVector& X_projected, const ManeuverProblem& problem,
                              const ShootingLinearization& lin);

// Replaces each active Xi row by |Pi_k^i| - b^i and its Jacobian row by the
// matching signed unit vector. The system size never changes.
void enforce_active_constraints(const ActiveSet& active, const ShootingVector& X,
                                const Bounds& bounds, Eigen::VectorXd& residual,
                                Eigen::MatrixXd& jacobian);

// Projection-augmented Newton iteration for the momentum-constrained problem.
SolveResult modified_shooting_solve(const ShootingVector& X0, const ManeuverProblem& problem,
                                    const SolverOptions& options = {});

struct JacobianDiagnostic {
    Eigen::MatrixXd jacobian;
    double condition_number = 0.0;
    int rank = 0;
};

// Jacobian of the momentum-only matching conditions (no orientation row, no
// mu_bar_0) at Y, with its 2-norm condition number and numerical rank.
JacobianDiagnostic momentum_only_jacobian_diagnostic(const ShootingVector& Y,
                                                     const ManeuverProblem& problem);

// Time histories reconstructed from a shooting vector.
struct Trajectory {
    double h = 0.0;
    std::vector<Vec3> Pi;          // N+1
    std::vector<Vec3> u;           // N
    std::vector<Vec3> lambda_bar;  // N+1
    std::vector<Rotation> R;       // N+1
    std::vector<std::array<bool, 3>> active;  // N+1
};

Trajectory reconstruct_trajectory(const ShootingVector& X, const ManeuverProblem& problem,
                                  const ActiveSet& active);

}  // namespace attitude

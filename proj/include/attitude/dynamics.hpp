#pragma once

// Discrete rigid-body model on SO(3):
//
//   R_{k+1}      = R_k F_k
//   Pi_{k+1}     = F_k^T Pi_k + h u_k
//   hat(h Pi_k)  = F_k Jd - Jd F_k^T
//
// with Jd the diagonal "nonstandard" inertia built from the principal moments.

#include <array>
#include <span>
#include <vector>

#include "attitude/so3.hpp"

namespace attitude {

class InertiaModel {
public:
    // Throws InvalidInertia unless all moments are positive and satisfy the
    // strict triangle inequalities (so every Jd entry is positive).
    InertiaModel(double jx, double jy, double jz);

    double jx() const { return j_[0]; }
    double jy() const { return j_[1]; }
    double jz() const { return j_[2]; }

    const Vec3& principal() const { return j_; }
    const Vec3& jd_diagonal() const { return d_; }

    Mat3 j() const { return j_.asDiagonal(); }
    Mat3 jd() const { return d_.asDiagonal(); }

private:
    Vec3 j_;
    Vec3 d_;
};

struct DynamicsState {
    Rotation R = Rotation::Identity();
    Vec3 Pi = Vec3::Zero();
};

struct RelativeRotationSolution {
    Rotation F = Rotation::Identity();
    UnitQuaternion q;
    int newton_iters = 0;
    double residual_norm = 0.0;
};

struct RelativeRotationOptions {
    double tol = 1e-12;
    int max_iter = 50;
};

// Residual of the quaternion form of the implicit momentum equation: three
// momentum-matching rows and the unit-norm row.
Vec4 implicit_residual(const Vec4& q, const Vec3& Pi, double h, const InertiaModel& inertia);

// Jacobian of implicit_residual with respect to q.
Eigen::Matrix4d implicit_residual_jacobian(const Vec4& q, const InertiaModel& inertia);

// Newton solve for F(Pi) starting from `guess`. Throws NewtonDiverged or
// SingularNewtonStep.
RelativeRotationSolution solve_relative_rotation(const Vec3& Pi, double h,
                                                 const InertiaModel& inertia,
                                                 const UnitQuaternion& guess = {},
                                                 const RelativeRotationOptions& options = {});

using QuaternionSensitivity = Eigen::Matrix<double, 4, 3>;
using RotationSensitivity = std::array<Mat3, 3>;

// dq/dPi from the linearized implicit equation.
QuaternionSensitivity quaternion_sensitivity(const RelativeRotationSolution& sol, double h,
                                             const InertiaModel& inertia);

// dF/dPi^i, i = 0..2, by the chain rule through the quaternion.
RotationSensitivity rotation_sensitivity(const RelativeRotationSolution& sol,
                                         const QuaternionSensitivity& dq_dPi);

DynamicsState step_forward(const DynamicsState& state, const Vec3& u, double h,
                           const InertiaModel& inertia, const UnitQuaternion& guess = {});

// Forward propagation over `controls.size()` steps with the relative-rotation
// solve warm-started from the previous step. Returns N+1 states.
std::vector<DynamicsState> propagate(const DynamicsState& initial, std::span<const Vec3> controls,
                                     double h, const InertiaModel& inertia);

// trace(F Jd) I - F Jd
Mat3 trace_operator(const Rotation& F, const InertiaModel& inertia);

struct SensitivityMatrices {
    Mat3 B;  // xi = B dPi, B = h F^T T^{-1}
    Mat3 N;  // N = B^T / h
};

inline constexpr double kTraceOperatorMaxCondition = 1e12;

// 2-norm condition number of a 3x3 matrix (infinity when singular).
double condition_number(const Mat3& m);

// Throws SingularTraceOperator when cond(trace_operator(F)) >= 1e12.
SensitivityMatrices sensitivity_matrices(const Rotation& F, const InertiaModel& inertia, double h);

// F - h N hat(F^T Pi): the matrix multiplying the scaled costate in the
// comomentum recursion, and the transpose of -dSigma/dPi.
Mat3 costate_transition(const Rotation& F, const Mat3& N, const Vec3& Pi, double h);

// Cosine threshold sqrt((2 d3 + d2 - d1) / (2 (d3 + d2))) over the Jd entries
// sorted ascending.
double lemma1_threshold(const InertiaModel& inertia);

// cos(|xi|/2) < lemma1_threshold(inertia). Diagnostic only.
bool lemma1_sufficient_condition(const Vec3& xi, const InertiaModel& inertia);

}  // namespace attitude

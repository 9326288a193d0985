#pragma once

// First-order optimality conditions of the energy-optimal maneuver in the
// reduced, step-scaled variables:
//
//   lambda_bar_k = h lambda_k     (momentum costate)
//   mu_bar_0                      (rotation costate; mu_bar_k = Q_k^T mu_bar_0)
//   Q_k = F_1 F_2 ... F_k
//
//   Sigma_{k+1} = Pi_{k+1} - F_k^T Pi_k - h u*(lambda_bar_k)
//   Xi_{k+1}    = h beta (.) Pi_{k+1} - lambda_bar_k
//                 + (F - h N hat(F^T Pi)) lambda_bar_{k+1} + N Q^T mu_bar_0
//
// where F, N, Pi, Q carry index k+1 in the last line.

#include <array>
#include <span>

#include "attitude/dynamics.hpp"

namespace attitude {

struct Bounds {
    Vec3 c = Vec3::Constant(1.0);  // torque bound per axis, N m
    Vec3 b = Vec3::Constant(1.0);  // momentum bound per axis, N m s

    bool valid() const { return (c.array() > 0.0).all() && (b.array() > 0.0).all(); }
};

// u*^i = -min(c^i, |lambda_bar^i|) sgn(lambda_bar^i), with sgn(0) = 0.
Vec3 optimal_control(const Vec3& lambda_bar, const Bounds& bounds);

// Diagonal selection from the generalized gradient of optimal_control:
// -1 where |lambda_bar^i| <= c^i, 0 otherwise.
Mat3 control_generalized_gradient(const Vec3& lambda_bar, const Bounds& bounds);

// Everything the residuals and their derivatives need at one momentum sample.
struct StepModel {
    RelativeRotationSolution sol;
    RotationSensitivity dF;   // dF/dPi^i
    Mat3 N;                   // T^{-T} F
    Mat3 A;                   // F - h N hat(F^T Pi)
    std::array<Mat3, 3> dN;   // dN/dPi^i
    std::array<Mat3, 3> dA;   // dA/dPi^i
    std::array<Vec3, 3> W;    // (F^T dF/dPi^i)^vee

    const Rotation& F() const { return sol.F; }
};

// Solves the implicit rotation at Pi and differentiates everything once.
StepModel evaluate_step(const Vec3& Pi, double h, const InertiaModel& inertia,
                        const UnitQuaternion& guess = {});

Vec3 sigma_residual(const Vec3& Pi_k, const Vec3& Pi_k1, const Vec3& lambda_bar_k, double h,
                    const InertiaModel& inertia, const Bounds& bounds);

// Same residual with F_k already known.
Vec3 sigma_residual(const Rotation& F_k, const Vec3& Pi_k, const Vec3& Pi_k1,
                    const Vec3& lambda_bar_k, double h, const Bounds& bounds);

Vec3 xi_residual(const Vec3& Pi_k1, const Vec3& lambda_bar_k, const Vec3& lambda_bar_k1,
                 const Vec3& mu_bar0, const Rotation& Q_k1, const Vec3& beta_k1, double h,
                 const InertiaModel& inertia);

// Same residual from a precomputed step model at Pi_k1.
Vec3 xi_residual(const StepModel& step_k1, const Vec3& Pi_k1, const Vec3& lambda_bar_k,
                 const Vec3& lambda_bar_k1, const Vec3& mu_bar0, const Rotation& Q_k1,
                 const Vec3& beta_k1, double h);

// (log(R_f^T R_i F_0 ... F_{N-1}))^vee. Throws AngleNearPi.
Vec3 orientation_constraint(const Rotation& R_i, const Rotation& R_f,
                            std::span<const Rotation> F_seq);

// dC_ornt/dPi_k. Column i is F_{N-1}^T ... F_{k+1}^T (F_k^T dF_k/dPi_k^i)^vee,
// premultiplied by the inverse right Jacobian of log at `constraint_value`.
// With the default zero value this is the gradient at closure.
Mat3 orientation_constraint_gradient(int k, std::span<const Rotation> F_seq,
                                     const RotationSensitivity& dF_k,
                                     const Vec3& constraint_value = Vec3::Zero());

// (Pi_N - Pi_f, Pi_0 - Pi_i)
Eigen::Matrix<double, 6, 1> momentum_boundary_residual(const Vec3& Pi_0, const Vec3& Pi_N,
                                                       const Vec3& Pi_i, const Vec3& Pi_f);

// Momentum multipliers beta_k^i that make row i of Xi_k vanish, computed for
// components flagged in `active`; other components are zero. Throws
// DivisionByZeroMomentum if a flagged component has Pi_k^i = 0.
Vec3 compute_slack_beta(const StepModel& step_k, const Vec3& Pi_k, const Vec3& lambda_bar_km1,
                        const Vec3& lambda_bar_k, const Vec3& mu_bar0, const Rotation& Q_k,
                        double h, const std::array<bool, 3>& active);

Vec3 compute_slack_beta(const Vec3& Pi_k, const Vec3& lambda_bar_km1, const Vec3& lambda_bar_k,
                        const Vec3& mu_bar0, const Rotation& Q_k, double h,
                        const InertiaModel& inertia, const std::array<bool, 3>& active);

}  // namespace attitude

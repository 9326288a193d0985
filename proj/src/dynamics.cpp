#include "attitude/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace attitude {

InertiaModel::InertiaModel(double jx, double jy, double jz) : j_(jx, jy, jz) {
    if (!(jx > 0.0 && jy > 0.0 && jz > 0.0) || !j_.allFinite()) {
        throw InvalidInertia("principal moments must be positive and finite");
    }
    if (!(jx + jy > jz && jy + jz > jx && jz + jx > jy)) {
        throw InvalidInertia("principal moments violate the triangle inequality");
    }
    d_ = 0.5 * Vec3(-jx + jy + jz, jx - jy + jz, jx + jy - jz);
}

Vec4 implicit_residual(const Vec4& q, const Vec3& Pi, double h, const InertiaModel& inertia) {
    const double q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
    const double jx = inertia.jx(), jy = inertia.jy(), jz = inertia.jz();
    return Vec4(2 * q2 * q3 * (jz - jy) + 2 * q0 * q1 * jx - h * Pi[0],
                2 * q1 * q3 * (jx - jz) + 2 * q0 * q2 * jy - h * Pi[1],
                2 * q1 * q2 * (jy - jx) + 2 * q0 * q3 * jz - h * Pi[2],
                q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3 - 1.0);
}

Eigen::Matrix4d implicit_residual_jacobian(const Vec4& q, const InertiaModel& inertia) {
    const double q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
    const double jx = inertia.jx(), jy = inertia.jy(), jz = inertia.jz();
    Eigen::Matrix4d dg;
    dg << 2 * q1 * jx, 2 * q0 * jx, 2 * q3 * (jz - jy), 2 * q2 * (jz - jy),
          2 * q2 * jy, 2 * q3 * (jx - jz), 2 * q0 * jy, 2 * q1 * (jx - jz),
          2 * q3 * jz, 2 * q2 * (jy - jx), 2 * q1 * (jy - jx), 2 * q0 * jz,
          2 * q0, 2 * q1, 2 * q2, 2 * q3;
    return dg;
}

namespace {

Eigen::FullPivLU<Eigen::Matrix4d> factor_implicit_jacobian(const Vec4& q,
                                                           const InertiaModel& inertia) {
    Eigen::FullPivLU<Eigen::Matrix4d> lu(implicit_residual_jacobian(q, inertia));
    if (!lu.isInvertible()) {
        throw SingularNewtonStep("implicit rotation solve: singular quaternion Jacobian");
    }
    return lu;
}

}  // namespace

RelativeRotationSolution solve_relative_rotation(const Vec3& Pi, double h,
                                                 const InertiaModel& inertia,
                                                 const UnitQuaternion& guess,
                                                 const RelativeRotationOptions& options) {
    if (!(h > 0.0)) {
        throw NewtonDiverged("implicit rotation solve: step length must be positive");
    }
    Vec4 q = guess.coeffs;
    Vec4 g = implicit_residual(q, Pi, h, inertia);
    double res = g.cwiseAbs().maxCoeff();
    int iters = 0;
    while (!(res <= options.tol)) {
        if (iters >= options.max_iter || !std::isfinite(res)) {
            throw NewtonDiverged("implicit rotation solve: residual " + std::to_string(res) +
                                 " after " + std::to_string(iters) + " iterations");
        }
        q -= factor_implicit_jacobian(q, inertia).solve(g);
        g = implicit_residual(q, Pi, h, inertia);
        res = g.cwiseAbs().maxCoeff();
        ++iters;
    }
    // One polishing step: the tolerance is near the rounding floor of the
    // larger momentum rows, and downstream finite differences want the root
    // to full precision.
    const Vec4 polished = q - factor_implicit_jacobian(q, inertia).solve(g);
    const Vec4 g_polished = implicit_residual(polished, Pi, h, inertia);
    if (g_polished.cwiseAbs().maxCoeff() <= res) {
        q = polished;
        res = g_polished.cwiseAbs().maxCoeff();
    }

    RelativeRotationSolution sol;
    sol.q = UnitQuaternion::canonical(q);
    sol.F = quat_matrix(sol.q.coeffs);
    sol.newton_iters = iters;
    sol.residual_norm = res;
    return sol;
}

QuaternionSensitivity quaternion_sensitivity(const RelativeRotationSolution& sol, double h,
                                             const InertiaModel& inertia) {
    Eigen::Matrix<double, 4, 3> rhs = Eigen::Matrix<double, 4, 3>::Zero();
    rhs.topRows<3>() = h * Mat3::Identity();
    return factor_implicit_jacobian(sol.q.coeffs, inertia).solve(rhs);
}

RotationSensitivity rotation_sensitivity(const RelativeRotationSolution& sol,
                                         const QuaternionSensitivity& dq_dPi) {
    const auto dF_dq = quat_matrix_derivatives(sol.q.coeffs);
    RotationSensitivity out;
    for (int i = 0; i < 3; ++i) {
        out[i].setZero();
        for (int n = 0; n < 4; ++n) {
            out[i] += dF_dq[n] * dq_dPi(n, i);
        }
    }
    return out;
}

DynamicsState step_forward(const DynamicsState& state, const Vec3& u, double h,
                           const InertiaModel& inertia, const UnitQuaternion& guess) {
    const RelativeRotationSolution sol = solve_relative_rotation(state.Pi, h, inertia, guess);
    return DynamicsState{state.R * sol.F, sol.F.transpose() * state.Pi + h * u};
}

std::vector<DynamicsState> propagate(const DynamicsState& initial, std::span<const Vec3> controls,
                                     double h, const InertiaModel& inertia) {
    std::vector<DynamicsState> states;
    states.reserve(controls.size() + 1);
    states.push_back(initial);
    UnitQuaternion guess;
    for (const Vec3& u : controls) {
        const DynamicsState& s = states.back();
        const RelativeRotationSolution sol = solve_relative_rotation(s.Pi, h, inertia, guess);
        guess = sol.q;
        states.push_back(DynamicsState{s.R * sol.F, sol.F.transpose() * s.Pi + h * u});
    }
    return states;
}

Mat3 trace_operator(const Rotation& F, const InertiaModel& inertia) {
    const Mat3 fjd = F * inertia.jd();
    return fjd.trace() * Mat3::Identity() - fjd;
}

double condition_number(const Mat3& m) {
    const Eigen::JacobiSVD<Mat3> svd(m);
    const Vec3 s = svd.singularValues();
    if (s[2] == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s[0] / s[2];
}

SensitivityMatrices sensitivity_matrices(const Rotation& F, const InertiaModel& inertia, double h) {
    const Mat3 t = trace_operator(F, inertia);
    if (!(condition_number(t) < kTraceOperatorMaxCondition)) {
        throw SingularTraceOperator("trace operator is numerically singular");
    }
    const Mat3 t_inv = t.fullPivLu().inverse();
    SensitivityMatrices out;
    out.B = h * F.transpose() * t_inv;
    out.N = out.B.transpose() / h;
    return out;
}

Mat3 costate_transition(const Rotation& F, const Mat3& N, const Vec3& Pi, double h) {
    return F - h * N * hat(Vec3(F.transpose() * Pi));
}

double lemma1_threshold(const InertiaModel& inertia) {
    std::array<double, 3> d{inertia.jd_diagonal()[0], inertia.jd_diagonal()[1],
                            inertia.jd_diagonal()[2]};
    std::sort(d.begin(), d.end());
    return std::sqrt((2.0 * d[2] + d[1] - d[0]) / (2.0 * (d[2] + d[1])));
}

bool lemma1_sufficient_condition(const Vec3& xi, const InertiaModel& inertia) {
    return std::cos(xi.norm() / 2.0) < lemma1_threshold(inertia);
}

}  // namespace attitude

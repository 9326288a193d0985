#include "attitude/optimality.hpp"

#include <cmath>

namespace attitude {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Vec3 optimal_control(const Vec3& lambda_bar, const Bounds& bounds) {
    Vec3 u;
    for (int i = 0; i < 3; ++i) {
        u[i] = -std::min(bounds.c[i], std::abs(lambda_bar[i])) * sgn(lambda_bar[i]);
    }
    return u;
}

Mat3 control_generalized_gradient(const Vec3& lambda_bar, const Bounds& bounds) {
    Mat3 g = Mat3::Zero();
    for (int i = 0; i < 3; ++i) {
        g(i, i) = std::abs(lambda_bar[i]) <= bounds.c[i] ? -1.0 : 0.0;
    }
    return g;
}

StepModel evaluate_step(const Vec3& Pi, double h, const InertiaModel& inertia,
                        const UnitQuaternion& guess) {
    StepModel m;
    m.sol = solve_relative_rotation(Pi, h, inertia, guess);
    m.dF = rotation_sensitivity(m.sol, quaternion_sensitivity(m.sol, h, inertia));

    const Rotation& F = m.sol.F;
    const Mat3 jd = inertia.jd();
    m.N = sensitivity_matrices(F, inertia, h).N;
    // N = T^{-T} F, so T^{-T} = N F^T.
    const Mat3 t_inv_t = m.N * F.transpose();
    const Vec3 body = F.transpose() * Pi;
    m.A = F - h * m.N * hat(body);

    for (int i = 0; i < 3; ++i) {
        const Mat3& dF = m.dF[i];
        const Mat3 dT = (dF * jd).trace() * Mat3::Identity() - dF * jd;
        m.dN[i] = -t_inv_t * dT.transpose() * m.N + t_inv_t * dF;
        const Vec3 d_body = dF.transpose() * Pi + F.transpose().col(i);
        m.dA[i] = dF - h * m.dN[i] * hat(body) - h * m.N * hat(d_body);
        m.W[i] = skew_vee(Mat3(F.transpose() * dF));
    }
    return m;
}

Vec3 sigma_residual(const Rotation& F_k, const Vec3& Pi_k, const Vec3& Pi_k1,
                    const Vec3& lambda_bar_k, double h, const Bounds& bounds) {
    return Pi_k1 - F_k.transpose() * Pi_k - h * optimal_control(lambda_bar_k, bounds);
}

Vec3 sigma_residual(const Vec3& Pi_k, const Vec3& Pi_k1, const Vec3& lambda_bar_k, double h,
                    const InertiaModel& inertia, const Bounds& bounds) {
    const RelativeRotationSolution sol = solve_relative_rotation(Pi_k, h, inertia);
    return sigma_residual(sol.F, Pi_k, Pi_k1, lambda_bar_k, h, bounds);
}

Vec3 xi_residual(const StepModel& step_k1, const Vec3& Pi_k1, const Vec3& lambda_bar_k,
                 const Vec3& lambda_bar_k1, const Vec3& mu_bar0, const Rotation& Q_k1,
                 const Vec3& beta_k1, double h) {
    return h * beta_k1.cwiseProduct(Pi_k1) - lambda_bar_k + step_k1.A * lambda_bar_k1 +
           step_k1.N * (Q_k1.transpose() * mu_bar0);
}

Vec3 xi_residual(const Vec3& Pi_k1, const Vec3& lambda_bar_k, const Vec3& lambda_bar_k1,
                 const Vec3& mu_bar0, const Rotation& Q_k1, const Vec3& beta_k1, double h,
                 const InertiaModel& inertia) {
    const RelativeRotationSolution sol = solve_relative_rotation(Pi_k1, h, inertia);
    const Mat3 N = sensitivity_matrices(sol.F, inertia, h).N;
    const Mat3 A = costate_transition(sol.F, N, Pi_k1, h);
    return h * beta_k1.cwiseProduct(Pi_k1) - lambda_bar_k + A * lambda_bar_k1 +
           N * (Q_k1.transpose() * mu_bar0);
}

Vec3 orientation_constraint(const Rotation& R_i, const Rotation& R_f,
                            std::span<const Rotation> F_seq) {
    Rotation p = R_f.transpose() * R_i;
    for (const Rotation& F : F_seq) {
        p = p * F;
    }
    return log_map(p);
}

Mat3 orientation_constraint_gradient(int k, std::span<const Rotation> F_seq,
                                     const RotationSensitivity& dF_k,
                                     const Vec3& constraint_value) {
    const Rotation& F = F_seq[static_cast<std::size_t>(k)];
    // S^T with S = F_{k+1} ... F_{N-1}
    Rotation trailing_t = Rotation::Identity();
    for (std::size_t j = static_cast<std::size_t>(k) + 1; j < F_seq.size(); ++j) {
        trailing_t = F_seq[j].transpose() * trailing_t;
    }
    const Mat3 jr_inv = right_jacobian_inverse(constraint_value);
    Mat3 grad;
    for (int i = 0; i < 3; ++i) {
        grad.col(i) = jr_inv * trailing_t * skew_vee(Mat3(F.transpose() * dF_k[i]));
    }
    return grad;
}

Eigen::Matrix<double, 6, 1> momentum_boundary_residual(const Vec3& Pi_0, const Vec3& Pi_N,
                                                       const Vec3& Pi_i, const Vec3& Pi_f) {
    Eigen::Matrix<double, 6, 1> r;
    r << Pi_N - Pi_f, Pi_0 - Pi_i;
    return r;
}

Vec3 compute_slack_beta(const StepModel& step_k, const Vec3& Pi_k, const Vec3& lambda_bar_km1,
                        const Vec3& lambda_bar_k, const Vec3& mu_bar0, const Rotation& Q_k,
                        double h, const std::array<bool, 3>& active) {
    const Vec3 xi0 = xi_residual(step_k, Pi_k, lambda_bar_km1, lambda_bar_k, mu_bar0, Q_k,
                                 Vec3::Zero(), h);
    Vec3 beta = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        if (!active[i]) {
            continue;
        }
        if (Pi_k[i] == 0.0) {
            throw DivisionByZeroMomentum("slack multiplier requested at zero momentum component");
        }
        beta[i] = -xi0[i] / (h * Pi_k[i]);
    }
    return beta;
}

Vec3 compute_slack_beta(const Vec3& Pi_k, const Vec3& lambda_bar_km1, const Vec3& lambda_bar_k,
                        const Vec3& mu_bar0, const Rotation& Q_k, double h,
                        const InertiaModel& inertia, const std::array<bool, 3>& active) {
    return compute_slack_beta(evaluate_step(Pi_k, h, inertia), Pi_k, lambda_bar_km1, lambda_bar_k,
                              mu_bar0, Q_k, h, active);
}

}  // namespace attitude

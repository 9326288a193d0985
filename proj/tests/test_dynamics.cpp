#include <gtest/gtest.h>

#include "attitude/dynamics.hpp"
#include "support.hpp"

using namespace attitude;
using attitude::testing::reference_inertia;
using attitude::testing::Sampler;

namespace {

Mat3 inv(const Mat3& m) { return m.fullPivLu().inverse(); }

}  // namespace

TEST(Inertia, NonstandardInertiaOfReferenceBody) {
    const InertiaModel in = reference_inertia();
    EXPECT_EQ(in.jd_diagonal(), Vec3(700, 300, 500));
}

TEST(Inertia, RejectsInvalidMoments) {
    EXPECT_THROW(InertiaModel(-1, 2, 2), InvalidInertia);
    EXPECT_THROW(InertiaModel(1, 1, 3), InvalidInertia);
    EXPECT_THROW(InertiaModel(1, 1, 2), InvalidInertia);  // degenerate: a zero Jd entry
    EXPECT_NO_THROW(InertiaModel(1, 1, 1.9));
}

TEST(RelativeRotation, ZeroMomentumGivesIdentity) {
    const auto sol = solve_relative_rotation(Vec3::Zero(), 0.1, reference_inertia());
    EXPECT_EQ(sol.q.coeffs, Vec4(1, 0, 0, 0));
    EXPECT_EQ(sol.F, Mat3::Identity());
}

TEST(RelativeRotation, MatchesMultiStartOracle) {
    // Root near the identity among the four found by 40-digit Newton from 40
    // random starts; the other three are rotations by nearly pi.
    const Vec4 oracle(0.99999803037882019301, 0.0018749515964219240595, -0.00041651114314677002259,
                      0.0005003133607209000391);
    const auto sol = solve_relative_rotation(Vec3(30, -10, 10), 0.1, reference_inertia());
    EXPECT_LT((sol.q.coeffs - oracle).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(sol.residual_norm, 1e-12);
}

TEST(RelativeRotation, SatisfiesImplicitEquation) {
    const InertiaModel in = reference_inertia();
    Sampler s(20);
    for (int n = 0; n < 100; ++n) {
        const Vec3 pi = s.vec(-80, 80);
        const auto sol = solve_relative_rotation(pi, 0.1, in);
        const Mat3 lhs = sol.F * in.jd() - in.jd() * sol.F.transpose();
        EXPECT_LT((lhs - hat(Vec3(0.1 * pi))).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_TRUE(is_rotation(sol.F, 1e-12));
    }
}

TEST(RelativeRotation, FirstOrderExpansion) {
    const InertiaModel in = reference_inertia();
    const double h = 1e-4;
    const Vec3 pi(30, -10, 10);
    const Vec3 xi = log_map(solve_relative_rotation(pi, h, in).F);
    const Vec3 first = h * in.j().inverse() * pi;
    EXPECT_LT((xi - first).norm(), 1e-6);
    // trace(Jd) I - Jd = J
    EXPECT_EQ(Mat3(in.jd().trace() * Mat3::Identity() - in.jd()), in.j());
}

TEST(RelativeRotation, FailsLoudlyWithoutRoot) {
    // |h Pi| beyond what any rotation can produce
    EXPECT_THROW(solve_relative_rotation(Vec3(1e6, 0, 0), 0.1, reference_inertia()), Error);
    EXPECT_THROW(solve_relative_rotation(Vec3(1, 0, 0), 0.0, reference_inertia()), NewtonDiverged);
}

TEST(QuaternionSensitivity, MatchesFiniteDifferences) {
    const InertiaModel in = reference_inertia();
    Sampler s(21);
    for (int n = 0; n < 20; ++n) {
        const Vec3 pi = s.vec(-60, 60);
        const auto sol = solve_relative_rotation(pi, 0.1, in);
        const QuaternionSensitivity dq = quaternion_sensitivity(sol, 0.1, in);
        for (int i = 0; i < 3; ++i) {
            // 1e-6 would sit on the rounding floor of q (|dq| ~ 5e-5)
            const double eps = 1e-4;
            const Vec3 e = Vec3::Unit(i) * eps;
            const Vec4 fd = (solve_relative_rotation(Vec3(pi + e), 0.1, in).q.coeffs -
                             solve_relative_rotation(Vec3(pi - e), 0.1, in).q.coeffs) /
                            (2 * eps);
            EXPECT_LT((fd - dq.col(i)).norm(), 1e-6 * dq.col(i).norm());
        }
    }
}

TEST(QuaternionSensitivity, AtZeroMomentum) {
    const InertiaModel in = reference_inertia();
    const auto sol = solve_relative_rotation(Vec3::Zero(), 0.1, in);
    const QuaternionSensitivity dq1 = quaternion_sensitivity(sol, 0.1, in);
    EXPECT_EQ(dq1.row(0), Eigen::RowVector3d::Zero());
    // dq/dPi = (h/2) J^{-1} on the vector part
    EXPECT_LT((dq1.bottomRows<3>() - 0.05 * in.j().inverse()).cwiseAbs().maxCoeff(), 1e-16);
    const QuaternionSensitivity dq2 =
        quaternion_sensitivity(solve_relative_rotation(Vec3::Zero(), 0.2, in), 0.2, in);
    EXPECT_LT((dq2 - 2.0 * dq1).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(RotationSensitivity, MatchesFiniteDifferencesAndIsTangent) {
    const InertiaModel in = reference_inertia();
    Sampler s(22);
    for (int n = 0; n < 20; ++n) {
        const Vec3 pi = s.vec(-60, 60);
        const auto sol = solve_relative_rotation(pi, 0.1, in);
        const RotationSensitivity dF = rotation_sensitivity(sol, quaternion_sensitivity(sol, 0.1, in));
        for (int i = 0; i < 3; ++i) {
            const double eps = 1e-4;
            const Vec3 e = Vec3::Unit(i) * eps;
            const Mat3 fd = (solve_relative_rotation(Vec3(pi + e), 0.1, in).F -
                             solve_relative_rotation(Vec3(pi - e), 0.1, in).F) /
                            (2 * eps);
            EXPECT_LT((fd - dF[i]).norm(), 1e-6 * dF[i].norm());
            const Mat3 d_orth = dF[i].transpose() * sol.F + sol.F.transpose() * dF[i];
            EXPECT_LT(d_orth.cwiseAbs().maxCoeff(), 1e-8);
        }
    }
    const auto sol0 = solve_relative_rotation(Vec3::Zero(), 0.1, in);
    const RotationSensitivity dF0 = rotation_sensitivity(sol0, quaternion_sensitivity(sol0, 0.1, in));
    for (const Mat3& d : dF0) {
        const Mat3 t = sol0.F.transpose() * d;
        EXPECT_LT((t + t.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(StepForward, FreeStepConservesSpatialMomentum) {
    const InertiaModel in = reference_inertia();
    const DynamicsState s0{exp_rodrigues(Vec3(0.3, 0.1, -0.2)), Vec3(30, -10, 10)};
    const DynamicsState s1 = step_forward(s0, Vec3::Zero(), 0.1, in);
    EXPECT_LT((s1.R * s1.Pi - s0.R * s0.Pi).norm(), 1e-12);
}

TEST(StepForward, TorqueFromRest) {
    const DynamicsState s1 = step_forward(DynamicsState{}, Vec3(1, 2, 3), 0.1, reference_inertia());
    EXPECT_LT((s1.Pi - Vec3(0.1, 0.2, 0.3)).norm(), 1e-16);
    EXPECT_EQ(s1.R, Mat3::Identity());
}

TEST(Propagate, LongFreeMotionConservesMomentum) {
    const InertiaModel in = reference_inertia();
    const std::vector<Vec3> u(1000, Vec3::Zero());
    const auto states = propagate(DynamicsState{Rotation::Identity(), Vec3(30, -10, 10)}, u, 0.1, in);
    ASSERT_EQ(states.size(), 1001u);
    const Vec3 m0 = states.front().R * states.front().Pi;
    for (const DynamicsState& st : states) {
        EXPECT_LT((st.R * st.Pi - m0).norm(), 1e-10);
        EXPECT_LT((st.R.transpose() * st.R - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(TraceOperator, IdentityGivesFullInertia) {
    const InertiaModel in = reference_inertia();
    const Mat3 t = trace_operator(Rotation::Identity(), in);
    EXPECT_EQ(t, in.j());
    EXPECT_EQ(t, t.transpose());
}

TEST(SensitivityMatrices, AtIdentity) {
    const InertiaModel in = reference_inertia();
    const SensitivityMatrices m = sensitivity_matrices(Rotation::Identity(), in, 0.1);
    EXPECT_LT((m.B - 0.1 * in.j().inverse()).cwiseAbs().maxCoeff(), 1e-18);
    EXPECT_LT((m.N - in.j().inverse()).cwiseAbs().maxCoeff(), 1e-18);
}

TEST(SensitivityMatrices, NTimesHIsBTranspose) {
    const InertiaModel in = reference_inertia();
    Sampler s(23);
    for (int n = 0; n < 20; ++n) {
        const auto sol = solve_relative_rotation(s.vec(-60, 60), 0.1, in);
        const SensitivityMatrices m = sensitivity_matrices(sol.F, in, 0.1);
        EXPECT_LT((m.N * 0.1 - m.B.transpose()).cwiseAbs().maxCoeff(), 1e-18);
    }
}

TEST(SensitivityMatrices, BMapsMomentumPerturbationToRotationIncrement) {
    // F(Pi + d) ~ F(Pi) exp(B d)
    const InertiaModel in = reference_inertia();
    const Vec3 pi(30, -10, 10), d(1e-6, -2e-6, 5e-7);
    const auto s0 = solve_relative_rotation(pi, 0.1, in);
    const auto s1 = solve_relative_rotation(Vec3(pi + d), 0.1, in);
    const Vec3 xi = log_map(Mat3(s0.F.transpose() * s1.F));
    const Vec3 predicted = sensitivity_matrices(s0.F, in, 0.1).B * d;
    EXPECT_LT((xi - predicted).norm(), 1e-6 * predicted.norm());
}

TEST(SensitivityMatrices, ThrowsWhenTraceOperatorSingular) {
    // det T changes sign along the half-turns between the y and z axes;
    // bisect to a singular point.
    const InertiaModel in = reference_inertia();
    auto det_at = [&](double s) {
        return trace_operator(exp_rodrigues(Vec3(0, std::cos(s), std::sin(s)) * std::numbers::pi), in).determinant();
    };
    double lo = 0.0, hi = std::numbers::pi / 2;
    ASSERT_LT(det_at(lo) * det_at(hi), 0.0);
    for (int n = 0; n < 200; ++n) {
        const double mid = 0.5 * (lo + hi);
        (det_at(lo) * det_at(mid) <= 0.0 ? hi : lo) = mid;
    }
    const Rotation F = exp_rodrigues(Vec3(0, std::cos(lo), std::sin(lo)) * std::numbers::pi);
    EXPECT_THROW(sensitivity_matrices(F, in, 0.1), SingularTraceOperator);
}

TEST(CostateTransition, FactorizedForm) {
    // F - h N hat(F^T Pi) = (tr(Jd F^T) I - Jd F^T)^{-1} (tr(F Jd) I - F Jd) F
    const InertiaModel in = reference_inertia();
    const Mat3 jd = in.jd();
    Sampler s(24);
    for (int n = 0; n < 100; ++n) {
        const Vec3 pi = s.vec(-80, 80);
        const double h = s.uniform(0.01, 0.2);
        const Rotation F = solve_relative_rotation(pi, h, in).F;
        const Mat3 A = costate_transition(F, sensitivity_matrices(F, in, h).N, pi, h);
        const Mat3 jdft = jd * F.transpose();
        const Mat3 oracle = inv(Mat3(jdft.trace() * Mat3::Identity() - jdft)) * trace_operator(F, in) * F;
        EXPECT_LT((A - oracle).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(TraceOperatorCondition, ThresholdOfReferenceBody) {
    EXPECT_NEAR(lemma1_threshold(reference_inertia()), std::sqrt(1600.0 / 2400.0), 1e-15);
}

TEST(TraceOperatorCondition, CosineBoundIsOnlySufficient) {
    const InertiaModel in = reference_inertia();
    EXPECT_FALSE(lemma1_sufficient_condition(Vec3::Zero(), in));
    EXPECT_EQ(Eigen::FullPivLU<Mat3>(trace_operator(Rotation::Identity(), in)).rank(), 3);
    const double edge = 2.0 * std::acos(lemma1_threshold(in));
    EXPECT_FALSE(lemma1_sufficient_condition(Vec3(edge - 1e-9, 0, 0), in));
    EXPECT_TRUE(lemma1_sufficient_condition(Vec3(edge + 1e-9, 0, 0), in));
}

TEST(ConditionNumber, SingularAndIdentity) {
    EXPECT_EQ(condition_number(Mat3::Identity()), 1.0);
    EXPECT_TRUE(std::isinf(condition_number(Mat3::Zero())));
    EXPECT_NEAR(condition_number(reference_inertia().j()), 1.5, 1e-15);
}

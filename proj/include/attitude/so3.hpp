#pragma once

// Rotation-group primitives. Everything here is a pure function of Eigen
// fixed-size values, templated on the scalar type.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numbers>

#include "attitude/errors.hpp"

namespace attitude {

template <typename Scalar> using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vec4T = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Vec4 = Vec4T<double>;
using Mat3 = Mat3T<double>;

// A rotation is stored as a plain 3x3 matrix; `is_rotation` states the
// invariant and callers check it at the boundaries where drift would matter.
using Rotation = Mat3;

namespace so3 {

inline constexpr double kSmallAngle = 1e-8;
inline constexpr double kNearPiMargin = 1e-6;
inline constexpr double kSkewTolerance = 1e-8;
inline constexpr double kQuaternionNormTolerance = 1e-12;
inline constexpr double kOrthogonalityTolerance = 1e-9;

}  // namespace so3

template <typename Scalar>
Mat3T<Scalar> hat(const Vec3T<Scalar>& v) {
    Mat3T<Scalar> s;
    s << Scalar(0), -v.z(), v.y(),
         v.z(), Scalar(0), -v.x(),
         -v.y(), v.x(), Scalar(0);
    return s;
}

template <typename Derived>
auto hat(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    return hat(Vec3T<Scalar>(v));
}

template <typename Scalar>
Vec3T<Scalar> vee(const Mat3T<Scalar>& s) {
    using std::abs;
    if ((s + s.transpose()).cwiseAbs().maxCoeff() > Scalar(so3::kSkewTolerance)) {
        throw NotSkewSymmetric("vee: argument is not skew-symmetric");
    }
    return Vec3T<Scalar>(s(2, 1), s(0, 2), s(1, 0));
}

template <typename Scalar>
Mat3T<Scalar> skew_part(const Mat3T<Scalar>& a) {
    return (a - a.transpose()) / Scalar(2);
}

// vee of the skew-symmetric part; never throws.
template <typename Scalar>
Vec3T<Scalar> skew_vee(const Mat3T<Scalar>& a) {
    return Vec3T<Scalar>(a(2, 1) - a(1, 2), a(0, 2) - a(2, 0), a(1, 0) - a(0, 1)) / Scalar(2);
}

template <typename Scalar>
bool is_rotation(const Mat3T<Scalar>& r, Scalar tol = Scalar(so3::kOrthogonalityTolerance)) {
    const Mat3T<Scalar> defect = r.transpose() * r - Mat3T<Scalar>::Identity();
    return defect.cwiseAbs().maxCoeff() <= tol && r.determinant() > Scalar(0);
}

// Rodrigues' formula I + sin|xi| K + K K^T (cos|xi| - 1) with K = hat(xi/|xi|).
template <typename Scalar>
Mat3T<Scalar> exp_rodrigues(const Vec3T<Scalar>& xi) {
    using std::cos;
    using std::sin;
    const Scalar theta = xi.norm();
    const Mat3T<Scalar> id = Mat3T<Scalar>::Identity();
    if (theta < Scalar(so3::kSmallAngle)) {
        const Mat3T<Scalar> k = hat(xi);
        return id + k + Scalar(0.5) * k * k;
    }
    const Mat3T<Scalar> k = hat(Vec3T<Scalar>(xi / theta));
    return id + sin(theta) * k + k * k.transpose() * (cos(theta) - Scalar(1));
}

template <typename Derived>
auto exp_rodrigues(const Eigen::MatrixBase<Derived>& xi) {
    return exp_rodrigues(Vec3T<typename Derived::Scalar>(xi));
}

// Principal logarithm as an axis-angle vector. Angles within kNearPiMargin of
// pi are refused because the axis is ill-conditioned there.
template <typename Scalar>
Vec3T<Scalar> log_map(const Mat3T<Scalar>& r) {
    using std::atan2;
    const Vec3T<Scalar> s = skew_vee(r);
    const Scalar sin_theta = s.norm();
    const Scalar cos_theta = (r.trace() - Scalar(1)) / Scalar(2);
    const Scalar theta = atan2(sin_theta, cos_theta);
    if (theta >= Scalar(std::numbers::pi - so3::kNearPiMargin)) {
        throw AngleNearPi("log_map: rotation angle too close to pi");
    }
    if (theta < Scalar(so3::kSmallAngle)) {
        return s;
    }
    return (theta / sin_theta) * s;
}

// Inverse of the right Jacobian of exp: log(exp(v) exp(d)) = v + Jr^{-1}(v) d + O(d^2).
template <typename Scalar>
Mat3T<Scalar> right_jacobian_inverse(const Vec3T<Scalar>& v) {
    using std::cos;
    using std::sin;
    const Scalar theta = v.norm();
    const Mat3T<Scalar> k = hat(v);
    Scalar coeff;
    if (theta < Scalar(1e-4)) {
        coeff = Scalar(1) / Scalar(12) + theta * theta / Scalar(720);
    } else {
        coeff = Scalar(1) / (theta * theta) -
                (Scalar(1) + cos(theta)) / (Scalar(2) * theta * sin(theta));
    }
    return Mat3T<Scalar>::Identity() + Scalar(0.5) * k + coeff * k * k;
}

// Unit quaternion (q0, q1, q2, q3) with scalar part first, canonical sign q0 >= 0.
template <typename Scalar>
struct UnitQuaternionT {
    Vec4T<Scalar> coeffs{Scalar(1), Scalar(0), Scalar(0), Scalar(0)};

    Scalar q0() const { return coeffs[0]; }
    Scalar q1() const { return coeffs[1]; }
    Scalar q2() const { return coeffs[2]; }
    Scalar q3() const { return coeffs[3]; }

    Scalar norm_defect() const {
        using std::abs;
        return abs(coeffs.squaredNorm() - Scalar(1));
    }

    static UnitQuaternionT canonical(const Vec4T<Scalar>& q) {
        UnitQuaternionT out;
        out.coeffs = q[0] < Scalar(0) ? Vec4T<Scalar>(-q) : q;
        return out;
    }
};

using UnitQuaternion = UnitQuaternionT<double>;

// Rotation matrix of a quaternion with the entries written out explicitly.
// Does not check normalization; see quat_to_rotation.
template <typename Scalar>
Mat3T<Scalar> quat_matrix(const Vec4T<Scalar>& q) {
    const Scalar q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
    Mat3T<Scalar> f;
    f << q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * q1 * q2 - 2 * q0 * q3, 2 * q1 * q3 + 2 * q0 * q2,
         2 * q1 * q2 + 2 * q0 * q3, q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2 * q2 * q3 - 2 * q0 * q1,
         2 * q1 * q3 - 2 * q0 * q2, 2 * q2 * q3 + 2 * q0 * q1, q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;
    return f;
}

template <typename Scalar>
Mat3T<Scalar> quat_to_rotation(const UnitQuaternionT<Scalar>& q) {
    if (!(q.norm_defect() <= Scalar(so3::kQuaternionNormTolerance))) {
        throw NotNormalized("quat_to_rotation: quaternion is not unit norm");
    }
    return quat_matrix(q.coeffs);
}

// Partial derivatives dF/dq_n of quat_matrix, n = 0..3.
template <typename Scalar>
std::array<Mat3T<Scalar>, 4> quat_matrix_derivatives(const Vec4T<Scalar>& q) {
    const Scalar q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
    std::array<Mat3T<Scalar>, 4> d;
    d[0] << 2 * q0, -2 * q3, 2 * q2,
            2 * q3, 2 * q0, -2 * q1,
            -2 * q2, 2 * q1, 2 * q0;
    d[1] << 2 * q1, 2 * q2, 2 * q3,
            2 * q2, -2 * q1, -2 * q0,
            2 * q3, 2 * q0, -2 * q1;
    d[2] << -2 * q2, 2 * q1, 2 * q0,
            2 * q1, 2 * q2, 2 * q3,
            -2 * q0, 2 * q3, -2 * q2;
    d[3] << -2 * q3, -2 * q0, 2 * q1,
            2 * q0, -2 * q3, 2 * q2,
            2 * q1, 2 * q2, 2 * q3;
    return d;
}

template <typename Scalar>
UnitQuaternionT<Scalar> rotation_to_quat(const Mat3T<Scalar>& r) {
    const Eigen::Quaternion<Scalar> e(r);
    Vec4T<Scalar> q(e.w(), e.x(), e.y(), e.z());
    return UnitQuaternionT<Scalar>::canonical(q.normalized());
}

template <typename Scalar>
UnitQuaternionT<Scalar> axis_angle_to_quat(const Vec3T<Scalar>& unit_axis, Scalar angle) {
    using std::cos;
    using std::sin;
    Vec4T<Scalar> q;
    q << cos(angle / 2), sin(angle / 2) * unit_axis;
    return UnitQuaternionT<Scalar>::canonical(q);
}

// Rotation angle of r in [0, pi].
template <typename Scalar>
Scalar rotation_angle(const Mat3T<Scalar>& r) {
    using std::atan2;
    return atan2(skew_vee(r).norm(), (r.trace() - Scalar(1)) / Scalar(2));
}

}  // namespace attitude

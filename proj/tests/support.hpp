#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "attitude/shooting.hpp"

namespace attitude::testing {

inline InertiaModel reference_inertia() { return InertiaModel(800.0, 1200.0, 1000.0); }

inline Rotation reference_target() {
    return exp_rodrigues(Vec3(Vec3(1.0, 1.0, 1.0).normalized() * (std::numbers::pi / 2.0)));
}

// The 90-degree reference maneuver: 19 s at h = 0.1.
inline ManeuverProblem reference_problem(const Vec3& b = Vec3::Constant(70.0)) {
    ManeuverProblem p;
    p.inertia = reference_inertia();
    p.h = 0.1;
    p.N = 190;
    p.R_f = reference_target();
    p.Pi_i = Vec3(30.0, -10.0, 10.0);
    p.Pi_f = Vec3::Zero();
    p.bounds.c = Vec3::Constant(20.0);
    p.bounds.b = b;
    return p;
}

class Sampler {
public:
    explicit Sampler(unsigned seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Vec3 vec(double lo, double hi) { return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)); }

    Vec3 unit() {
        std::normal_distribution<double> n;
        Vec3 v(n(rng_), n(rng_), n(rng_));
        return v.normalized();
    }

    // Rotation vector with norm uniform in [0, max_angle).
    Vec3 rotvec(double max_angle) { return uniform(0.0, max_angle) * unit(); }

    Mat3 matrix(double scale = 1.0) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m(i) = uniform(-scale, scale);
        return m;
    }

    Vec4 unit_quaternion() {
        std::normal_distribution<double> n;
        return Vec4(n(rng_), n(rng_), n(rng_), n(rng_)).normalized();
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Central difference of a vector function along one coordinate.
template <typename F>
Eigen::VectorXd central_difference(F&& f, Eigen::VectorXd x, Eigen::Index j, double step) {
    const double x0 = x[j];
    x[j] = x0 + step;
    const Eigen::VectorXd plus = f(x);
    x[j] = x0 - step;
    const Eigen::VectorXd minus = f(x);
    return (plus - minus) / (2.0 * step);
}

// Small problem with random data around which the full Jacobian is
// well-defined: bounded momenta, costates kept 1e-3 away from clamp kinks and
// a target a modest rotation away from the free-motion endpoint.
struct RandomInstance {
    ManeuverProblem problem;
    ShootingVector X;
};

inline RandomInstance random_instance(Sampler& s, int N = 10, bool interior_controls = false,
                                      double mu_scale = 5.0) {
    ManeuverProblem p;
    p.inertia = reference_inertia();
    p.h = 0.1;
    p.N = N;
    p.bounds.c = Vec3::Constant(20.0);
    p.bounds.b = Vec3::Constant(70.0);
    p.Pi_i = s.vec(-40.0, 40.0);
    p.Pi_f = s.vec(-10.0, 10.0);
    ShootingVector X(N);
    Rotation prod = p.R_i;
    for (int k = 0; k <= N; ++k) {
        X.pi(k) = s.vec(-60.0, 60.0);
        for (int i = 0; i < 3; ++i) {
            double l;
            do {
                l = interior_controls ? s.uniform(-19.0, 19.0) : s.uniform(-40.0, 40.0);
            } while (std::abs(std::abs(l) - p.bounds.c[i]) < 1e-3);
            X.lambda_bar(k)[i] = l;
        }
        if (k < N) prod = prod * solve_relative_rotation(X.pi(k), p.h, p.inertia).F;
    }
    X.mu_bar0() = s.vec(-mu_scale, mu_scale);
    p.R_f = prod * exp_rodrigues(s.rotvec(0.5));
    return {p, X};
}

}  // namespace attitude::testing

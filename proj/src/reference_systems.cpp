#include "satbasin/reference_systems.hpp"

#include "satbasin/json_io.hpp"

namespace satbasin {

const SystemSpec& counterexample_3d() {
    static const SystemSpec spec = [] {
        Eigen::Matrix3d A;
        A << 1.0, -3.0, 0.0,
             3.0,  1.0, 0.0,
             0.0,  0.0, 4.0;
        Eigen::Vector3d b(1.0, 2.0, 4.0);
        Eigen::RowVector3d k(7.0 / 3.0, -4.0 / 3.0, -35.0 / 12.0);
        return SystemSpec(A, b, k, 1.0);
    }();
    return spec;
}

std::string counterexample_3d_json() {
    return to_json(counterexample_3d()).dump(2) + "\n";
}

const CounterexamplePoints& counterexample_points() {
    static const CounterexamplePoints points = {
        {-1.080860, -0.487008, -0.804244},
        {0.514148, -0.183494, 0.797384},
        {-0.283356, -0.335251, -0.003430},
    };
    return points;
}

bool is_counterexample_3d(const SystemSpec& spec) {
    const SystemSpec& ref = counterexample_3d();
    if (spec.n != ref.n || spec.m != ref.m) return false;
    const double tol = 1e-12;
    return (spec.A - ref.A).cwiseAbs().maxCoeff() <= tol &&
           (spec.B - ref.B).cwiseAbs().maxCoeff() <= tol &&
           (spec.K - ref.K).cwiseAbs().maxCoeff() <= tol && std::abs(spec.M - ref.M) <= tol;
}

}  // namespace satbasin

#pragma once

#include <string>

#include "satbasin/system.hpp"

namespace satbasin {

/// Bundled 3-D single-input system whose attraction basin is non-convex.
/// A has eigenvalues {1 +- 3i, 4}; the gain places A + b k at {-1, -2, -3};
/// M = 1.
const SystemSpec& counterexample_3d();

/// The same system serialized in the standard system-file schema.
std::string counterexample_3d_json();

/// Probe points bundled with the counterexample: p1 and p2 converge to the
/// origin while their midpoint p3 does not, falsifying basin convexity.
struct CounterexamplePoints {
    Eigen::Vector3d p1;
    Eigen::Vector3d p2;
    Eigen::Vector3d p3;  // (p1 + p2) / 2
};

const CounterexamplePoints& counterexample_points();

/// True when spec matches counterexample_3d() entrywise within 1e-12.
bool is_counterexample_3d(const SystemSpec& spec);

}  // namespace satbasin

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "satbasin/system.hpp"

namespace satbasin {

enum class DegreeMethod : std::uint8_t { Winding2D, PiecewiseAffinePreimage };

struct DegreeContribution {
    Eigen::VectorXd x;        // preimage of the regular value
    int sign = 0;             // sign(det region Jacobian)
    RegionSignature signature;
};

struct DegreeReport {
    int value = 0;
    DegreeMethod method = DegreeMethod::PiecewiseAffinePreimage;
    double radius = 0.0;
    Eigen::VectorXd regular_value;
    std::vector<DegreeContribution> solutions;
    bool margin_ok = false;  // no accepted preimage within 1e-9 of a plane or of the sphere
};

/// Radius beyond which ||A x|| dominates the bounded saturation term:
///   r* = ||B||_2 M sqrt(m) / sigma_min(A).
/// Throws SingularEquationError for singular A.
double safe_radius(const SystemSpec& spec);

/// Winding number of a planar field around the circle of radius r,
/// by accumulating wrapped angle increments, refined until every
/// increment is below pi/2. Sample budget 2^20, then ResolutionError.
int winding_number_2d(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field,
                      double radius, int min_samples = 4096);
int winding_number_2d(const SystemSpec& spec, double radius, int min_samples = 4096);

/// Brouwer degree over B(r) as the signed count of preimages of a small
/// regular value c (auto: ||c|| = 1e-6 x min field norm sampled on the
/// sphere, seeded random direction, redrawn up to 16 times if a preimage
/// lands within 1e-9 of a switching plane or of the sphere).
DegreeReport piecewise_affine_degree(const SystemSpec& spec, double radius,
                                     std::optional<Eigen::VectorXd> regular_value = std::nullopt,
                                     std::uint64_t seed = 0);

struct IndexSumReport {
    int lhs = 0;       // sum of equilibrium indices inside B(r)
    int rhs = 0;       // piecewise-affine degree over B(r)
    bool pass = false;
    double radius = 0.0;
    DegreeReport degree;
};

/// Checks sum of equilibrium indices == ball degree. Auto radius is
/// 1.1 x max(safe_radius, largest equilibrium norm + 1). For validated
/// specs with r >= safe_radius the degree must additionally equal +1.
IndexSumReport index_sum_check(const SystemSpec& spec,
                               std::optional<double> radius = std::nullopt,
                               std::uint64_t seed = 0);

}  // namespace satbasin

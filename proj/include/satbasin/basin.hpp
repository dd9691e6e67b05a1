#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "satbasin/dynamics.hpp"
#include "satbasin/system.hpp"

namespace satbasin {

enum class BasinMembership : std::uint8_t { In, Out, Undecided };

const char* membership_name(BasinMembership m);

BasinMembership in_basin(const SystemSpec& spec, const Eigen::VectorXd& x,
                         double t_max = 100.0);
BasinMembership in_basin(const SystemSpec& spec, const FateCertificates& certs,
                         const Eigen::VectorXd& x, double t_max = 100.0);

struct RayScanResult {
    Eigen::VectorXd direction;  // unit vector
    double r_lo = 0.0;          // certified In
    double r_hi = 0.0;          // certified Out
    int iterations = 0;
    int undecided_hits = 0;
    double tol = 0.0;
    bool width_ok() const { return r_hi - r_lo <= tol; }
};

struct ScanOptions {
    double tol = 1e-3;
    double t_max = 100.0;
    int max_iterations = 200;
};

/// Bisects the innermost In/Out crossing along a ray from the origin.
/// Seeds: r_lo on the Lyapunov ellipsoid, r_hi = 2 max(safe_radius,
/// divergence_radius); wrong seed fates raise GeometryError. Undecided
/// probes shrink the bracket from both sides and are counted; the bracket
/// endpoints always keep certified fates.
RayScanResult boundary_ray_scan(const SystemSpec& spec, const Eigen::VectorXd& direction,
                                const ScanOptions& opts = {});
RayScanResult boundary_ray_scan(const SystemSpec& spec, const FateCertificates& certs,
                                const Eigen::VectorXd& direction, const ScanOptions& opts = {});

struct ConvexityViolation {
    Eigen::VectorXd p, q, midpoint;
    BasinMembership fate_p = BasinMembership::In;
    BasinMembership fate_q = BasinMembership::In;
    BasinMembership fate_midpoint = BasinMembership::Out;
};

struct ConvexityReport {
    int trials = 0;
    std::vector<ConvexityViolation> violations;
    bool contains_reference_triple = false;
};

/// Midpoint convexity probe: for every pair with both endpoints In, tests
/// the midpoint and records In/In/Out triples as violations. When the spec
/// is the bundled 3-D counterexample system the bundled point pair is
/// always tested too.
ConvexityReport convexity_probe(const SystemSpec& spec,
                                const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
                                double t_max = 100.0);
ConvexityReport convexity_probe_random(const SystemSpec& spec, int num_pairs, std::uint64_t seed,
                                       double t_max = 100.0);

enum class RayFlag : std::uint8_t { Ok, Undecided, Error };

const char* ray_flag_name(RayFlag f);

struct RayRecord {
    int dir_index = 0;
    Eigen::VectorXd direction;
    double r_lo = 0.0;
    double r_hi = 0.0;
    RayFlag flag = RayFlag::Ok;
};

struct BasinPointCloud {
    std::vector<RayRecord> rays;  // sorted by dir_index
    int num_rays = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
};

/// Boundary brackets along quasi-uniform directions (Fibonacci sphere for
/// n = 3, uniform angles for n = 2), scanned in parallel, deterministic in
/// seed. Rays that stop early or hit geometry errors are flagged, not dropped.
BasinPointCloud basin_point_cloud(const SystemSpec& spec, int num_rays, std::uint64_t seed,
                                  double tol = 1e-3);

/// Header dir_index,vx1..vxn,r_lo,r_hi,flag; 17 significant digits.
void write_point_cloud_csv(std::ostream& out, const BasinPointCloud& cloud);

struct SymmetryMismatch {
    Eigen::VectorXd x;
    BasinMembership fate_x = BasinMembership::Undecided;
    BasinMembership fate_neg = BasinMembership::Undecided;
};

struct SymmetryReport {
    int num_points = 0;
    int decided_pairs = 0;
    int undecided_pairs = 0;
    std::vector<SymmetryMismatch> mismatches;
    bool pass = false;  // no decided pair with fate(x) != fate(-x)
};

/// Samples seeded points in a box of half-width 2 max ||equilibria|| and
/// checks fate(x) == fate(-x) for every decided pair. Undecided pairs are
/// reported, not failed.
SymmetryReport symmetry_check(const SystemSpec& spec, int num_points, std::uint64_t seed,
                              double t_max = 100.0);

}  // namespace satbasin

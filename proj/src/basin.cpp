#include "satbasin/basin.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "satbasin/degree.hpp"
#include "satbasin/equilibria.hpp"
#include "satbasin/errors.hpp"
#include "satbasin/reference_systems.hpp"
#include "satbasin/rng.hpp"

namespace satbasin {

const char* membership_name(BasinMembership m) {
    switch (m) {
        case BasinMembership::In: return "in";
        case BasinMembership::Out: return "out";
        case BasinMembership::Undecided: return "undecided";
    }
    return "?";
}

const char* ray_flag_name(RayFlag f) {
    switch (f) {
        case RayFlag::Ok: return "ok";
        case RayFlag::Undecided: return "undecided";
        case RayFlag::Error: return "error";
    }
    return "?";
}

namespace {

BasinMembership to_membership(FateVerdict v) {
    switch (v) {
        case FateVerdict::ConvergedToOrigin: return BasinMembership::In;
        case FateVerdict::NotConverged: return BasinMembership::Out;
        case FateVerdict::Undecided: return BasinMembership::Undecided;
    }
    return BasinMembership::Undecided;
}

}  // namespace

BasinMembership in_basin(const SystemSpec& spec, const Eigen::VectorXd& x, double t_max) {
    return in_basin(spec, make_fate_certificates(spec), x, t_max);
}

BasinMembership in_basin(const SystemSpec& spec, const FateCertificates& certs,
                         const Eigen::VectorXd& x, double t_max) {
    return to_membership(classify_fate(spec, certs, x, t_max).verdict);
}

RayScanResult boundary_ray_scan(const SystemSpec& spec, const Eigen::VectorXd& direction,
                                const ScanOptions& opts) {
    return boundary_ray_scan(spec, make_fate_certificates(spec), direction, opts);
}

RayScanResult boundary_ray_scan(const SystemSpec& spec, const FateCertificates& certs,
                                const Eigen::VectorXd& direction, const ScanOptions& opts) {
    if (direction.size() != spec.n) throw std::invalid_argument("direction dimension mismatch");
    const double dir_norm = direction.norm();
    if (dir_norm < 1e-12) throw std::invalid_argument("direction must be nonzero");
    const Eigen::VectorXd v = direction / dir_norm;

    auto fate_at = [&](double r) {
        return in_basin(spec, certs, Eigen::VectorXd(r * v), opts.t_max);
    };

    RayScanResult result;
    result.direction = v;
    result.tol = opts.tol;

    // Inner seed just inside the certified ellipsoid, outer seed well past
    // both the index-safe radius and the escape radius.
    const double ellipsoid_r = std::sqrt(certs.lyapunov.level / v.dot(certs.lyapunov.P * v));
    double r_lo = 0.99 * ellipsoid_r;
    double r_hi = 2.0 * std::max(safe_radius(spec), certs.escape.divergence_radius);
    if (r_hi <= r_lo) r_hi = 2.0 * r_lo;

    const BasinMembership lo_fate = fate_at(r_lo);
    const BasinMembership hi_fate = fate_at(r_hi);
    result.iterations = 2;
    if (lo_fate != BasinMembership::In || hi_fate != BasinMembership::Out) {
        std::ostringstream msg;
        msg << "scan seeds do not bracket the boundary: fate(" << r_lo
            << ") = " << membership_name(lo_fate) << ", fate(" << r_hi
            << ") = " << membership_name(hi_fate);
        throw GeometryError(msg.str());
    }

    // Rays may cross the boundary several times; a fixed-resolution sweep
    // pins the bracket to the innermost certified In -> Out transition
    // before bisection refines it.
    constexpr int kSweepSegments = 16;
    {
        double known_in = r_lo;
        for (int k = 1; k < kSweepSegments; ++k) {
            const double r = r_lo + (r_hi - r_lo) * k / kSweepSegments;
            const BasinMembership f = fate_at(r);
            ++result.iterations;
            if (f == BasinMembership::In) {
                known_in = r;
            } else if (f == BasinMembership::Out) {
                r_hi = r;
                break;
            } else {
                ++result.undecided_hits;
            }
        }
        r_lo = known_in;
    }

    while (r_hi - r_lo > opts.tol && result.iterations < opts.max_iterations) {
        const double mid = 0.5 * (r_lo + r_hi);
        const BasinMembership mid_fate = fate_at(mid);
        ++result.iterations;
        if (mid_fate == BasinMembership::In) {
            r_lo = mid;
            continue;
        }
        if (mid_fate == BasinMembership::Out) {
            r_hi = mid;
            continue;
        }

        // Undecided band: shrink toward it from both sides without ever
        // moving a certified endpoint past an undecided radius.
        ++result.undecided_hits;
        bool moved = false;
        const double lo_probe = 0.5 * (r_lo + mid);
        const BasinMembership lo_probe_fate = fate_at(lo_probe);
        ++result.iterations;
        if (lo_probe_fate == BasinMembership::Out) {
            r_hi = lo_probe;
            continue;
        }
        if (lo_probe_fate == BasinMembership::In) {
            r_lo = lo_probe;
            moved = true;
        } else {
            ++result.undecided_hits;
        }

        const double hi_probe = 0.5 * (mid + r_hi);
        const BasinMembership hi_probe_fate = fate_at(hi_probe);
        ++result.iterations;
        if (hi_probe_fate == BasinMembership::In) {
            r_lo = hi_probe;
            moved = true;
        } else if (hi_probe_fate == BasinMembership::Out) {
            r_hi = hi_probe;
            moved = true;
        } else {
            ++result.undecided_hits;
        }
        if (!moved) break;  // undecided band wider than the remaining bracket
    }

    result.r_lo = r_lo;
    result.r_hi = r_hi;
    return result;
}

ConvexityReport convexity_probe(const SystemSpec& spec,
                                const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
                                double t_max) {
    const FateCertificates certs = make_fate_certificates(spec);
    ConvexityReport report;

    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> all_pairs = pairs;
    std::ptrdiff_t reference_idx = -1;
    if (spec.n == 3 && is_counterexample_3d(spec)) {
        const auto& pts = counterexample_points();
        reference_idx = static_cast<std::ptrdiff_t>(all_pairs.size());
        all_pairs.emplace_back(pts.p1, pts.p2);
    }

    for (std::size_t idx = 0; idx < all_pairs.size(); ++idx) {
        const auto& [p, q] = all_pairs[idx];
        ++report.trials;
        const BasinMembership fate_p = in_basin(spec, certs, p, t_max);
        if (fate_p != BasinMembership::In) continue;
        const BasinMembership fate_q = in_basin(spec, certs, q, t_max);
        if (fate_q != BasinMembership::In) continue;
        const Eigen::VectorXd midpoint = 0.5 * (p + q);
        const BasinMembership fate_mid = in_basin(spec, certs, midpoint, t_max);
        if (fate_mid != BasinMembership::Out) continue;
        report.violations.push_back({p, q, midpoint, fate_p, fate_q, fate_mid});
        if (static_cast<std::ptrdiff_t>(idx) == reference_idx) report.contains_reference_triple = true;
    }
    return report;
}

ConvexityReport convexity_probe_random(const SystemSpec& spec, int num_pairs, std::uint64_t seed,
                                       double t_max) {
    double box = 0.0;
    for (const Equilibrium& eq : enumerate_equilibria(spec).equilibria)
        box = std::max(box, eq.x.norm());
    if (box == 0.0) box = safe_radius(spec);
    box *= 2.0;

    Rng rng(seed);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    pairs.reserve(static_cast<std::size_t>(num_pairs));
    for (int i = 0; i < num_pairs; ++i)
        pairs.emplace_back(rng.uniform_vector(spec.n, -box, box),
                           rng.uniform_vector(spec.n, -box, box));
    return convexity_probe(spec, pairs, t_max);
}

BasinPointCloud basin_point_cloud(const SystemSpec& spec, int num_rays, std::uint64_t seed,
                                  double tol) {
    if (spec.n != 2 && spec.n != 3)
        throw std::invalid_argument("point cloud directions are generated for n = 2 or 3 only");
    if (num_rays <= 0) throw std::invalid_argument("num_rays must be positive");

    Rng rng(seed);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    std::vector<Eigen::VectorXd> directions;
    directions.reserve(static_cast<std::size_t>(num_rays));
    if (spec.n == 2) {
        for (int i = 0; i < num_rays; ++i) {
            const double theta = phase + 2.0 * M_PI * i / num_rays;
            directions.push_back(Eigen::Vector2d(std::cos(theta), std::sin(theta)));
        }
    } else {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < num_rays; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / num_rays;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = phase + golden * i;
            directions.push_back(Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z));
        }
    }

    const FateCertificates certs = make_fate_certificates(spec);
    ScanOptions scan_opts;
    scan_opts.tol = tol;

    BasinPointCloud cloud;
    cloud.num_rays = num_rays;
    cloud.seed = seed;
    cloud.tol = tol;
    cloud.rays.resize(static_cast<std::size_t>(num_rays));

    detail::parallel_for_index(static_cast<std::size_t>(num_rays), [&](std::size_t i) {
        RayRecord& rec = cloud.rays[i];
        rec.dir_index = static_cast<int>(i);
        rec.direction = directions[i];
        try {
            const RayScanResult scan = boundary_ray_scan(spec, certs, directions[i], scan_opts);
            rec.r_lo = scan.r_lo;
            rec.r_hi = scan.r_hi;
            rec.flag = scan.width_ok() ? RayFlag::Ok : RayFlag::Undecided;
        } catch (const GeometryError&) {
            rec.r_lo = 0.0;
            rec.r_hi = 0.0;
            rec.flag = RayFlag::Error;
        }
    });
    return cloud;
}

void write_point_cloud_csv(std::ostream& out, const BasinPointCloud& cloud) {
    const Eigen::Index n = cloud.rays.empty() ? 0 : cloud.rays.front().direction.size();
    out << "dir_index";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",vx" << i;
    out << ",r_lo,r_hi,flag\n";
    char buf[64];
    for (const RayRecord& rec : cloud.rays) {
        out << rec.dir_index;
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", rec.direction(i));
            out << ',' << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", rec.r_lo);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", rec.r_hi);
        out << ',' << buf << ',' << ray_flag_name(rec.flag) << "\n";
    }
}

SymmetryReport symmetry_check(const SystemSpec& spec, int num_points, std::uint64_t seed,
                              double t_max) {
    double box = 0.0;
    for (const Equilibrium& eq : enumerate_equilibria(spec).equilibria)
        box = std::max(box, eq.x.norm());
    if (box == 0.0) box = safe_radius(spec);
    box *= 2.0;

    Rng rng(seed);
    std::vector<Eigen::VectorXd> points;
    points.reserve(static_cast<std::size_t>(num_points));
    for (int i = 0; i < num_points; ++i) points.push_back(rng.uniform_vector(spec.n, -box, box));

    const FateCertificates certs = make_fate_certificates(spec);
    std::vector<BasinMembership> fate_pos(points.size()), fate_neg(points.size());
    detail::parallel_for_index(points.size(), [&](std::size_t i) {
        fate_pos[i] = in_basin(spec, certs, points[i], t_max);
        fate_neg[i] = in_basin(spec, certs, Eigen::VectorXd(-points[i]), t_max);
    });

    SymmetryReport report;
    report.num_points = num_points;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (fate_pos[i] == BasinMembership::Undecided || fate_neg[i] == BasinMembership::Undecided) {
            ++report.undecided_pairs;
            continue;
        }
        ++report.decided_pairs;
        if (fate_pos[i] != fate_neg[i]) report.mismatches.push_back({points[i], fate_pos[i], fate_neg[i]});
    }
    report.pass = report.mismatches.empty();
    return report;
}

}  // namespace satbasin

#include "satbasin/degree.hpp"

#include <cmath>
#include <limits>
#include <stack>
#include <stdexcept>

#include "satbasin/equilibria.hpp"
#include "satbasin/errors.hpp"
#include "satbasin/rng.hpp"

namespace satbasin {

namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr int kWindingBudget = 1 << 20;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

std::vector<Eigen::VectorXd> sphere_directions(int n, int count, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double theta = 2.0 * M_PI * i / count;
            dirs.push_back(Eigen::Vector2d(std::cos(theta), std::sin(theta)));
        }
    } else if (n == 3) {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * i;
            dirs.push_back(Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z));
        }
    } else {
        Rng rng(seed);
        for (int i = 0; i < count; ++i) dirs.push_back(rng.unit_vector(n));
    }
    return dirs;
}

// Minimum field norm over a dense sphere sample; the piecewise-affine
// structure keeps the true minimum non-pathological away from switching
// planes, so sampling stands in for certified optimization at desk scale.
double min_field_norm_on_sphere(const SystemSpec& spec, double radius, std::uint64_t seed) {
    const int count = spec.n <= 3 ? 10000 : 100000;
    double min_norm = std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& dir : sphere_directions(spec.n, count, seed)) {
        min_norm = std::min(min_norm, closed_loop_field(spec, radius * dir).norm());
        if (min_norm < 1e-12)
            throw ZeroOnSphereError("field vanishes on the sampling sphere");
    }
    return min_norm;
}

}  // namespace

double safe_radius(const SystemSpec& spec) {
    spec.check_well_formed();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_A(spec.A);
    const double sigma_min = svd_A.singularValues()(spec.n - 1);
    if (sigma_min <= 1e-12 * svd_A.singularValues()(0))
        throw SingularEquationError("safe radius undefined for singular A");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_B(spec.B);
    const double b_norm = svd_B.singularValues()(0);
    return b_norm * spec.M * std::sqrt(static_cast<double>(spec.m)) / sigma_min;
}

int winding_number_2d(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field,
                      double radius, int min_samples) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (min_samples < 4) min_samples = 4;

    long evals = 0;
    auto field_angle = [&](double theta) {
        const Eigen::Vector2d p(radius * std::cos(theta), radius * std::sin(theta));
        const Eigen::Vector2d f = field(p);
        ++evals;
        if (f.norm() < 1e-12) throw ZeroOnSphereError("field vanishes on the circle");
        return std::atan2(f.y(), f.x());
    };

    struct Segment {
        double ta, pa, tb, pb;
    };

    std::vector<double> grid_theta(static_cast<std::size_t>(min_samples) + 1);
    std::vector<double> grid_phi(static_cast<std::size_t>(min_samples) + 1);
    for (int i = 0; i <= min_samples; ++i) {
        grid_theta[static_cast<std::size_t>(i)] = 2.0 * M_PI * i / min_samples;
        grid_phi[static_cast<std::size_t>(i)] =
            i == min_samples ? grid_phi[0] : field_angle(grid_theta[static_cast<std::size_t>(i)]);
    }

    double total = 0.0;
    std::stack<Segment> pending;
    for (int i = min_samples - 1; i >= 0; --i)
        pending.push({grid_theta[static_cast<std::size_t>(i)], grid_phi[static_cast<std::size_t>(i)],
                      grid_theta[static_cast<std::size_t>(i) + 1],
                      grid_phi[static_cast<std::size_t>(i) + 1]});

    while (!pending.empty()) {
        const Segment seg = pending.top();
        pending.pop();
        const double delta = std::remainder(seg.pb - seg.pa, 2.0 * M_PI);
        if (std::abs(delta) < M_PI / 2.0) {
            total += delta;
            continue;
        }
        if (evals >= kWindingBudget)
            throw ResolutionError("winding refinement exceeded its sample budget");
        const double tm = 0.5 * (seg.ta + seg.tb);
        const double pm = field_angle(tm);
        pending.push({tm, pm, seg.tb, seg.pb});
        pending.push({seg.ta, seg.pa, tm, pm});
    }

    const double turns = total / (2.0 * M_PI);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) >= 0.01)
        throw ResolutionError("winding total did not round cleanly to an integer");
    return static_cast<int>(rounded);
}

int winding_number_2d(const SystemSpec& spec, double radius, int min_samples) {
    if (spec.n != 2) throw std::invalid_argument("winding number needs a planar system");
    return winding_number_2d(
        [&spec](const Eigen::Vector2d& p) -> Eigen::Vector2d {
            return closed_loop_field(spec, p);
        },
        radius, min_samples);
}

DegreeReport piecewise_affine_degree(const SystemSpec& spec, double radius,
                                     std::optional<Eigen::VectorXd> regular_value,
                                     std::uint64_t seed) {
    spec.check_well_formed();
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (regular_value && regular_value->size() != spec.n)
        throw std::invalid_argument("regular value dimension mismatch");

    const double min_norm = min_field_norm_on_sphere(spec, radius, seed);
    const double c_magnitude = 1e-6 * min_norm;
    Rng rng(seed);

    const auto signatures = all_signatures(spec.m);
    const int max_attempts = regular_value ? 1 : 16;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const Eigen::VectorXd c =
            regular_value ? *regular_value : Eigen::VectorXd(c_magnitude * rng.unit_vector(spec.n));

        std::vector<DegreeContribution> accepted;
        bool margins_clear = true;
        for (const RegionSignature& sig : signatures) {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(region_jacobian(spec, sig));
            lu.setThreshold(1e-10);
            if (!lu.isInvertible()) continue;  // measure-zero region image; a regular value misses it
            const Eigen::VectorXd x = lu.solve(c - region_offset(spec, sig));
            const Eigen::VectorXd u = spec.K * x;

            // Positive violation means the constraint fails; tolerances in u units
            // for planes, state units for the sphere.
            double region_viol = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < spec.m; ++i) {
                double v = 0.0;
                switch (sig.channels[static_cast<std::size_t>(i)]) {
                    case SatState::PosSat: v = spec.M - u(i); break;
                    case SatState::NegSat: v = u(i) + spec.M; break;
                    case SatState::Linear: v = std::abs(u(i)) - spec.M; break;
                }
                region_viol = std::max(region_viol, v);
            }
            const double ball_viol = x.norm() - radius;

            const bool near_region = region_viol < kBoundaryTol;
            const bool near_ball = ball_viol < kBoundaryTol;
            if (near_region && near_ball &&
                (region_viol > -kBoundaryTol || ball_viol > -kBoundaryTol))
                margins_clear = false;  // within 1e-9 of a plane or of the sphere

            if (region_viol < 0.0 && ball_viol < 0.0)
                accepted.push_back({x, sign_of(lu.determinant()), sig});
        }

        if (margins_clear || regular_value) {
            DegreeReport report;
            report.method = DegreeMethod::PiecewiseAffinePreimage;
            report.radius = radius;
            report.regular_value = c;
            report.solutions = std::move(accepted);
            report.margin_ok = margins_clear;
            report.value = 0;
            for (const auto& sol : report.solutions) report.value += sol.sign;
            return report;
        }
    }
    throw DegenerateValueError("every regular-value draw produced a boundary-adjacent preimage");
}

IndexSumReport index_sum_check(const SystemSpec& spec, std::optional<double> radius,
                               std::uint64_t seed) {
    const EnumerationResult enumeration = enumerate_equilibria(spec);
    double max_norm = 0.0;
    for (const Equilibrium& eq : enumeration.equilibria) max_norm = std::max(max_norm, eq.x.norm());

    const double r_star = safe_radius(spec);
    IndexSumReport report;
    report.radius = radius ? *radius : 1.1 * std::max(r_star, max_norm + 1.0);

    for (const Equilibrium& eq : enumeration.equilibria) {
        if (eq.x.norm() >= report.radius) continue;
        if (!eq.index)
            throw DegenerateEquilibriumError("index sum undefined: degenerate equilibrium inside the ball");
        report.lhs += *eq.index;
    }

    report.degree = piecewise_affine_degree(spec, report.radius, std::nullopt, seed);
    report.rhs = report.degree.value;
    report.pass = report.lhs == report.rhs;
    if (report.radius >= r_star && validate_spec(spec).all_ok())
        report.pass = report.pass && report.rhs == 1;
    return report;
}

}  // namespace satbasin

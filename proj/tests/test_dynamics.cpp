#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "satbasin/dynamics.hpp"
#include "satbasin/errors.hpp"
#include "satbasin/reference_systems.hpp"
#include "satbasin/rng.hpp"
#include "support/test_support.hpp"

using namespace satbasin;
using doctest::Approx;

TEST_CASE("Lyapunov solver") {
    const Eigen::Matrix2d F = -Eigen::Matrix2d::Identity();
    const Eigen::MatrixXd P = solve_lyapunov(F, Eigen::Matrix2d::Identity());
    CHECK((P - 0.5 * Eigen::Matrix2d::Identity()).norm() <= 1e-12);

    const SystemSpec& spec = counterexample_3d();
    const Eigen::MatrixXd closed = spec.A + spec.B * spec.K;
    const Eigen::MatrixXd P2 = solve_lyapunov(closed, Eigen::Matrix3d::Identity());
    CHECK((closed.transpose() * P2 + P2 * closed + Eigen::Matrix3d::Identity()).norm() <= 1e-10);
    CHECK((P2 - P2.transpose()).norm() == 0.0);
    Eigen::LLT<Eigen::MatrixXd> llt(P2);
    CHECK(llt.info() == Eigen::Success);  // positive definite for Hurwitz input

    Eigen::Matrix2d resonant;
    resonant << 0.0, 1.0, -1.0, 0.0;  // eigenvalues +-i sum to zero
    CHECK_THROWS_AS(solve_lyapunov(resonant, Eigen::Matrix2d::Identity()), SingularEquationError);
}

TEST_CASE("convergence certificate keeps the ellipsoid inside the linear slab") {
    const SystemSpec& spec = counterexample_3d();
    const LyapunovCertificate cert = convergence_certificate(spec);
    CHECK(cert.level > 0.0);
    CHECK(cert.residual <= 1e-8);

    // Surface points x with x'Px = level: |kx| <= M and V strictly decreasing.
    Eigen::LLT<Eigen::MatrixXd> llt(cert.P);
    Rng rng(21);
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd z = rng.unit_vector(spec.n);
        const Eigen::VectorXd x =
            std::sqrt(cert.level) * llt.matrixL().transpose().solve(z);
        CHECK(x.dot(cert.P * x) == Approx(cert.level).epsilon(1e-9));
        CHECK((spec.K * x).cwiseAbs().maxCoeff() <= spec.M + 1e-9);
        const double v_dot = 2.0 * x.dot(cert.P * closed_loop_field(spec, x));
        CHECK(v_dot == Approx(-x.squaredNorm()).epsilon(1e-9));
        CHECK(v_dot < 0.0);
    }

    // Doubling M quadruples the level and leaves P unchanged.
    SystemSpec doubled(spec.A, spec.B, spec.K, 2.0 * spec.M);
    const LyapunovCertificate cert2 = convergence_certificate(doubled);
    CHECK((cert2.P - cert.P).norm() <= 1e-12);
    CHECK(cert2.level == Approx(4.0 * cert.level).epsilon(1e-12));

    SystemSpec unstable(spec.A, spec.B, Eigen::RowVector3d::Zero(), 1.0);
    CHECK_THROWS_AS(convergence_certificate(unstable), std::invalid_argument);
}

TEST_CASE("escape certificate") {
    const SystemSpec& spec = counterexample_3d();
    const EscapeCertificate cert = escape_certificate(spec);
    CHECK(cert.divergence_radius > 0.0);
    CHECK(cert.w_max > 0.0);

    // Solving A'Q + QA = I for this A gives Q = diag(1/2, 1/2, 1/8).
    Eigen::Matrix3d expected_q = Eigen::Vector3d(0.5, 0.5, 0.125).asDiagonal();
    CHECK((cert.Q - expected_q).norm() <= 1e-10);
    CHECK(cert.divergence_radius == Approx(2.0 * std::sqrt(1.5)).epsilon(1e-10));
    CHECK(cert.w_max == Approx(3.0).epsilon(1e-10));

    // W grows along the field outside the divergence ball.
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd x = 1.1 * cert.divergence_radius * rng.unit_vector(spec.n);
        CHECK(2.0 * x.dot(cert.Q * closed_loop_field(spec, x)) > 0.0);
    }

    SystemSpec no_input(spec.A, Eigen::Vector3d::Zero(), Eigen::RowVector3d::Zero(), 1.0);
    const EscapeCertificate empty = escape_certificate(no_input);
    CHECK(empty.divergence_radius == 0.0);
    CHECK(empty.w_max == 0.0);

    SystemSpec doubled(spec.A, spec.B, spec.K, 2.0 * spec.M);
    const EscapeCertificate scaled = escape_certificate(doubled);
    CHECK(scaled.divergence_radius == Approx(2.0 * cert.divergence_radius).epsilon(1e-12));
    CHECK(scaled.w_max == Approx(4.0 * cert.w_max).epsilon(1e-12));

    SystemSpec stable(-spec.A, spec.B, spec.K, 1.0);
    CHECK_THROWS_AS(escape_certificate(stable), std::invalid_argument);
}

TEST_CASE("integrator basics") {
    const SystemSpec& spec = counterexample_3d();

    const Trajectory rest = integrate_adaptive(spec, Eigen::Vector3d::Zero(), 2.0);
    for (const auto& x : rest.states) CHECK(x.norm() == 0.0);
    CHECK(rest.times.front() == 0.0);

    // The saturated equilibrium is an exact fixed point; drift measures
    // integrator quality.
    const Eigen::Vector3d x_plus = -spec.A.partialPivLu().solve(spec.B.col(0));
    const Trajectory frozen = integrate_adaptive(spec, x_plus, 1.0);
    for (const auto& x : frozen.states) CHECK((x - x_plus).norm() <= 1e-6);

    // Samples: start at zero, strictly increasing, never more than max_step apart.
    const Trajectory traj = integrate_adaptive(spec, counterexample_points().p1, 5.0);
    CHECK(traj.times.front() == 0.0);
    CHECK((traj.states.front() - counterexample_points().p1.eval()).norm() == 0.0);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        CHECK(traj.times[i] > traj.times[i - 1]);
        CHECK(traj.times[i] - traj.times[i - 1] <= 0.05 + 1e-12);
    }
    CHECK(traj.times.back() == Approx(5.0));
    CHECK(traj.accepted_steps + 1 == static_cast<long>(traj.times.size()));

    CHECK_THROWS_AS(integrate_adaptive(spec, Eigen::Vector3d::Zero(), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_adaptive(spec, Eigen::Vector2d::Zero(), 1.0), std::invalid_argument);
}

TEST_CASE("probe point p1 settles by t = 40") {
    const SystemSpec& spec = counterexample_3d();
    const Trajectory traj = integrate_adaptive(spec, counterexample_points().p1, 40.0);
    CHECK(traj.states.back().norm() < 1e-3);
}

TEST_CASE("escape overflow is flagged") {
    const SystemSpec& spec = counterexample_3d();
    const Trajectory traj = integrate_adaptive(spec, counterexample_points().p3, 50.0);
    CHECK(traj.overflow_escape);
    CHECK(traj.states.back().norm() > 1e12);
    CHECK(traj.times.back() < 50.0);
}

TEST_CASE("forced step underflow reports stiffness") {
    const SystemSpec& spec = counterexample_3d();
    IntegratorOptions opts;
    opts.rel_tol = 1e-13;
    opts.abs_tol = 1e-15;
    opts.min_step = 1e-2;  // unreachable accuracy at this floor
    CHECK_THROWS_AS(integrate_adaptive(spec, counterexample_points().p1, 1.0, opts), StiffnessError);
}

TEST_CASE("trajectory oddness under state negation") {
    const SystemSpec& spec = counterexample_3d();
    Rng rng(17);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd x0 = rng.uniform_vector(3, -1.0, 1.0);
        const Trajectory fwd = integrate_adaptive(spec, x0, 3.0);
        const Trajectory neg = integrate_adaptive(spec, Eigen::VectorXd(-x0), 3.0);
        REQUIRE(fwd.times.size() == neg.times.size());
        for (std::size_t s = 0; s < fwd.times.size(); ++s) {
            REQUIRE(fwd.times[s] == neg.times[s]);
            CHECK((fwd.states[s] + neg.states[s]).norm() <= 1e-9 * (1.0 + fwd.states[s].norm()));
        }
    }
}

TEST_CASE("tolerance tightening shrinks the endpoint error at integrator order") {
    const SystemSpec& spec = counterexample_3d();
    const Eigen::Vector3d x0 = counterexample_points().p1;

    IntegratorOptions ref_opts;
    ref_opts.rel_tol = 1e-12;
    ref_opts.abs_tol = 1e-14;
    const Eigen::VectorXd reference = integrate_adaptive(spec, x0, 1.0, ref_opts).states.back();

    IntegratorOptions loose;
    loose.rel_tol = 1e-6;
    loose.abs_tol = 1e-8;
    IntegratorOptions tight;
    tight.rel_tol = 1e-7;
    tight.abs_tol = 1e-9;
    const double err_loose = (integrate_adaptive(spec, x0, 1.0, loose).states.back() - reference).norm();
    const double err_tight = (integrate_adaptive(spec, x0, 1.0, tight).states.back() - reference).norm();
    CHECK(err_loose >= 16.0 * err_tight);
}

TEST_CASE("fates of the bundled probe points") {
    const SystemSpec& spec = counterexample_3d();
    const auto& pts = counterexample_points();

    const FateReport f1 = classify_fate(spec, pts.p1);
    CHECK(f1.verdict == FateVerdict::ConvergedToOrigin);
    CHECK(f1.certificate == "lyapunov-ellipsoid");

    const FateReport f2 = classify_fate(spec, pts.p2);
    CHECK(f2.verdict == FateVerdict::ConvergedToOrigin);

    const FateReport f3 = classify_fate(spec, pts.p3);
    CHECK(f3.verdict == FateVerdict::NotConverged);
    CHECK(f3.certificate == "escape-quadratic");

    const FateReport origin = classify_fate(spec, Eigen::Vector3d::Zero());
    CHECK(origin.verdict == FateVerdict::ConvergedToOrigin);
    CHECK(origin.t_decided == 0.0);
}

TEST_CASE("verdict soundness under re-integration") {
    const SystemSpec& spec = counterexample_3d();
    const FateCertificates certs = make_fate_certificates(spec);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(certs.lyapunov.P);
    const double ellipsoid_radius = std::sqrt(certs.lyapunov.level / pe.eigenvalues().minCoeff());

    Rng rng(41);
    int converged_checked = 0, escaped_checked = 0;
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd x0 = rng.uniform_vector(3, -1.5, 1.5);
        const FateReport fate = classify_fate(spec, certs, x0);
        if (fate.verdict == FateVerdict::ConvergedToOrigin) {
            const double horizon = std::max(2.0 * fate.t_decided, 1.0);
            const Trajectory traj = integrate_adaptive(spec, x0, horizon);
            CHECK(traj.states.back().norm() <= ellipsoid_radius);
            ++converged_checked;
        } else if (fate.verdict == FateVerdict::NotConverged) {
            const Trajectory traj = integrate_adaptive(spec, x0, 2.0 * std::max(fate.t_decided, 0.5));
            for (std::size_t s = 0; s < traj.times.size(); ++s)
                if (traj.times[s] >= fate.t_decided)
                    CHECK(traj.states[s].norm() >= certs.escape.divergence_radius * (1.0 - 1e-9));
            ++escaped_checked;
        }
    }
    CHECK(converged_checked > 0);
    CHECK(escaped_checked > 0);
}

TEST_CASE("certificate consistency at the certified sets") {
    const SystemSpec& spec = counterexample_3d();
    const FateCertificates certs = make_fate_certificates(spec);
    Eigen::LLT<Eigen::MatrixXd> llt(certs.lyapunov.P);

    Rng rng(51);
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd z = rng.unit_vector(3);
        const Eigen::VectorXd x =
            std::sqrt(certs.lyapunov.level) * llt.matrixL().transpose().solve(z);
        CHECK(classify_fate(spec, certs, x).verdict == FateVerdict::ConvergedToOrigin);
    }
    int outside_checked = 0;
    for (int i = 0; outside_checked < 20 && i < 200; ++i) {
        const Eigen::VectorXd x = 1.5 * certs.escape.divergence_radius * rng.unit_vector(3);
        if (x.dot(certs.escape.Q * x) <= certs.escape.w_max) continue;
        CHECK(classify_fate(spec, certs, x).verdict == FateVerdict::NotConverged);
        ++outside_checked;
    }
    CHECK(outside_checked == 20);
}

TEST_CASE("trajectory CSV format") {
    const SystemSpec& spec = counterexample_3d();
    Trajectory traj = integrate_adaptive(spec, counterexample_points().p1, 0.2);
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x1,x2,x3");
    std::string first_row;
    std::getline(in, first_row);
    CHECK(first_row.substr(0, 2) == "0,");
    // 17 significant digits round-trip the stored doubles.
    const std::string p1_x = first_row.substr(2, first_row.find(',', 2) - 2);
    CHECK(std::stod(p1_x) == counterexample_points().p1(0));
}

#include "satbasin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "satbasin/errors.hpp"
#include "satbasin/rng.hpp"

namespace satbasin {

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& R) {
    const Eigen::Index n = F.rows();
    if (F.cols() != n) throw std::invalid_argument("F must be square");
    if (R.rows() != n || R.cols() != n) throw std::invalid_argument("R must match F");

    // vec(F'P + PF) = (I (x) F' + F' (x) I) vec(P)
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n * n, n * n);
    const Eigen::MatrixXd Ft = F.transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
        op.block(j * n, j * n, n, n) += Ft;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < n; ++k) op(j * n + i, k * n + i) += Ft(j, k);
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
    if (!lu.isInvertible())
        throw SingularEquationError("Lyapunov operator singular: eigenvalues of F sum to zero in pairs");

    const Eigen::VectorXd vec_r = Eigen::Map<const Eigen::VectorXd>(R.data(), n * n);
    const Eigen::VectorXd vec_p = lu.solve(-vec_r);
    Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), n, n);
    P = 0.5 * (P + P.transpose()).eval();

    const double residual = (Ft * P + P * F + R).norm();
    if (residual > 1e-10 * std::max(1.0, R.norm()))
        throw SingularEquationError("Lyapunov solve residual too large");
    return P;
}

LyapunovCertificate convergence_certificate(const SystemSpec& spec) {
    spec.check_well_formed();
    const Eigen::MatrixXd F = spec.A + spec.B * spec.K;
    for (const auto& lambda : eigenvalues(F))
        if (!(lambda.real() < 0.0))
            throw std::invalid_argument("closed loop is not Hurwitz; no inner certificate exists");

    LyapunovCertificate cert;
    cert.P = solve_lyapunov(F, Eigen::MatrixXd::Identity(spec.n, spec.n));
    cert.residual = (F.transpose() * cert.P + cert.P * F +
                     Eigen::MatrixXd::Identity(spec.n, spec.n))
                        .norm();

    // Largest level set of x'Px inside the slab |k_i x| <= M:
    // max over the ellipsoid of k_i x is sqrt(c * k_i P^-1 k_i').
    Eigen::LLT<Eigen::MatrixXd> llt(cert.P);
    if (llt.info() != Eigen::Success)
        throw SingularEquationError("Lyapunov matrix is not positive definite");
    double level = std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec.m; ++i) {
        const Eigen::VectorXd ki = spec.K.row(i).transpose();
        const double gain = ki.dot(llt.solve(ki));
        if (gain > 0.0) level = std::min(level, spec.M * spec.M / gain);
    }
    if (!std::isfinite(level))
        throw std::invalid_argument("feedback gain is zero; ellipsoid level is unbounded");
    cert.level = level;
    return cert;
}

EscapeCertificate escape_certificate(const SystemSpec& spec) {
    spec.check_well_formed();
    for (const auto& lambda : eigenvalues(spec.A))
        if (!(lambda.real() > 0.0))
            throw std::invalid_argument("escape certificate needs an anti-stable A");

    EscapeCertificate cert;
    // A'Q + QA = I, positive definite because -A is Hurwitz.
    cert.Q = solve_lyapunov(-spec.A, Eigen::MatrixXd::Identity(spec.n, spec.n));

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cert.Q * spec.B);
    const double qb_norm = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    cert.divergence_radius = 2.0 * qb_norm * spec.M * std::sqrt(static_cast<double>(spec.m));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(cert.Q);
    cert.w_max = qe.eigenvalues().maxCoeff() * cert.divergence_radius * cert.divergence_radius;

    // d/dt x'Qx = ||x||^2 + 2 x'QB sat(Kx) must be positive outside the
    // divergence ball; spot-check on a deterministic sample ring.
    if (cert.divergence_radius > 0.0) {
        Rng rng(0x5eedu);
        for (int i = 0; i < 100; ++i) {
            const Eigen::VectorXd x = 1.1 * cert.divergence_radius * rng.unit_vector(spec.n);
            const double growth = 2.0 * x.dot(cert.Q * closed_loop_field(spec, x));
            if (!(growth > 0.0))
                throw Error("escape certificate sanity check failed");
        }
    }
    return cert;
}

FateCertificates make_fate_certificates(const SystemSpec& spec) {
    return {convergence_certificate(spec), escape_certificate(spec)};
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Field evaluator with preallocated scratch; the integrator is the hot path.
class FieldEval {
   public:
    explicit FieldEval(const SystemSpec& spec) : spec_(spec), u_(spec.m) {}

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        u_.noalias() = spec_.K * x;
        for (Eigen::Index i = 0; i < u_.size(); ++i)
            u_(i) = std::copysign(std::min(spec_.M, std::abs(u_(i))), u_(i));
        out.noalias() = spec_.A * x;
        out.noalias() += spec_.B * u_;
    }

   private:
    const SystemSpec& spec_;
    Eigen::VectorXd u_;
};

double scaled_rms(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  double rel_tol, double abs_tol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = abs_tol + rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double q = err(i) / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step(FieldEval& field, const Eigen::VectorXd& x0, double rel_tol, double abs_tol,
                    double max_step, double t_end) {
    const Eigen::Index n = x0.size();
    Eigen::VectorXd f0(n), f1(n);
    field(x0, f0);
    const double d0 = scaled_rms(x0, x0, x0, rel_tol, abs_tol);
    const double d1 = scaled_rms(f0, x0, x0, rel_tol, abs_tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, max_step, t_end});
    const Eigen::VectorXd x1 = x0 + h0 * f0;
    field(x1, f1);
    const double d2 = scaled_rms(f1 - f0, x0, x0, rel_tol, abs_tol) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15)
        h1 = std::max(1e-6, h0 * 1e-3);
    else
        h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100.0 * h0, h1, max_step, t_end});
}

Trajectory integrate_core(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                          const IntegratorOptions& opts, bool record_samples,
                          const std::function<bool(double, const Eigen::VectorXd&)>* observer) {
    if (x0.size() != spec.n) throw std::invalid_argument("state dimension mismatch");
    if (!x0.allFinite()) throw std::invalid_argument("initial state must be finite");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    FieldEval field(spec);
    Trajectory traj;
    const Eigen::Index n = spec.n;

    Eigen::VectorXd x = x0;
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    Eigen::VectorXd xs(n), x_new(n), err(n);

    double t = 0.0;
    if (record_samples) {
        traj.times.push_back(t);
        traj.states.push_back(x);
    }
    if (observer && !(*observer)(t, x)) {
        if (!record_samples) {
            traj.times.push_back(t);
            traj.states.push_back(x);
        }
        return traj;
    }

    field(x, k1);
    double h = initial_step(field, x, opts.rel_tol, opts.abs_tol, opts.max_step, t_end);

    while (t < t_end) {
        const double remaining = t_end - t;
        if (remaining <= opts.min_step) break;  // within rounding of the horizon
        h = std::min({h, opts.max_step, remaining});
        if (h < opts.min_step) throw StiffnessError("step size underflow; system too stiff at this tolerance");

        xs = x + h * (a21 * k1);
        field(xs, k2);
        xs = x + h * (a31 * k1 + a32 * k2);
        field(xs, k3);
        xs = x + h * (a41 * k1 + a42 * k2 + a43 * k3);
        field(xs, k4);
        xs = x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        field(xs, k5);
        xs = x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        field(xs, k6);
        x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        field(x_new, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        if (!x_new.allFinite()) {
            ++traj.rejected_steps;
            h *= 0.25;
            continue;
        }

        // Error per unit step: local error estimates accumulate roughly
        // additively, so controlling err/h tracks the global error.
        const double quality = scaled_rms(err, x, x_new, opts.rel_tol, opts.abs_tol) / h;
        if (quality <= 1.0) {
            t += h;
            x.swap(x_new);
            k1.swap(k7);  // FSAL
            ++traj.accepted_steps;
            traj.max_error_estimate = std::max(traj.max_error_estimate, err.norm());
            if (record_samples) {
                traj.times.push_back(t);
                traj.states.push_back(x);
            }
            if (observer && !(*observer)(t, x)) break;
            if (x.norm() > opts.overflow_norm) {
                traj.overflow_escape = true;
                break;
            }
            h *= std::clamp(0.9 * std::pow(quality, -0.25), 0.2, 5.0);
        } else {
            ++traj.rejected_steps;
            h *= std::clamp(0.9 * std::pow(quality, -0.25), 0.2, 1.0);
        }
    }

    if (!record_samples) {
        traj.times.push_back(t);
        traj.states.push_back(x);
    }
    return traj;
}

}  // namespace

Trajectory integrate_adaptive(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                              const IntegratorOptions& opts) {
    return integrate_core(spec, x0, t_end, opts, /*record_samples=*/true, nullptr);
}

Trajectory integrate_adaptive(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                              double rel_tol, double abs_tol) {
    IntegratorOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = abs_tol;
    return integrate_core(spec, x0, t_end, opts, /*record_samples=*/true, nullptr);
}

Trajectory integrate_observed(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                              const IntegratorOptions& opts,
                              const std::function<bool(double, const Eigen::VectorXd&)>& observer) {
    return integrate_core(spec, x0, t_end, opts, /*record_samples=*/false, &observer);
}

const char* fate_verdict_name(FateVerdict v) {
    switch (v) {
        case FateVerdict::ConvergedToOrigin: return "converged_to_origin";
        case FateVerdict::NotConverged: return "not_converged";
        case FateVerdict::Undecided: return "undecided";
    }
    return "?";
}

FateReport classify_fate(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_max,
                         const IntegratorOptions& opts) {
    return classify_fate(spec, make_fate_certificates(spec), x0, t_max, opts);
}

FateReport classify_fate(const SystemSpec& spec, const FateCertificates& certs,
                         const Eigen::VectorXd& x0, double t_max, const IntegratorOptions& opts) {
    if (x0.size() != spec.n) throw std::invalid_argument("state dimension mismatch");

    FateReport report;
    report.certificate = "none";
    const double escape_level = (1.0 + 1e-6) * certs.escape.w_max;

    bool decided = false;
    auto monitor = [&](double t, const Eigen::VectorXd& x) {
        if (x.dot(certs.lyapunov.P * x) <= certs.lyapunov.level) {
            report.verdict = FateVerdict::ConvergedToOrigin;
            report.certificate = "lyapunov-ellipsoid";
            report.t_decided = t;
            report.final_state = x;
            decided = true;
            return false;
        }
        if (x.dot(certs.escape.Q * x) >= escape_level && x.norm() > certs.escape.divergence_radius) {
            report.verdict = FateVerdict::NotConverged;
            report.certificate = "escape-quadratic";
            report.t_decided = t;
            report.final_state = x;
            decided = true;
            return false;
        }
        return true;
    };

    Trajectory traj;
    try {
        traj = integrate_observed(spec, x0, t_max, opts, monitor);
    } catch (const StiffnessError& e) {
        report.verdict = FateVerdict::Undecided;
        report.t_decided = 0.0;
        report.final_state = x0;
        report.diagnostic = e.what();
        return report;
    }

    if (!decided) {
        report.verdict = FateVerdict::Undecided;
        report.t_decided = traj.times.back();
        report.final_state = traj.states.back();
        if (traj.overflow_escape) report.diagnostic = "state norm overflow before a certificate fired";
    }
    return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
    out << "\n";
    char buf[64];
    for (std::size_t row = 0; row < traj.times.size(); ++row) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times[row]);
        out << buf;
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", traj.states[row](i));
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace satbasin

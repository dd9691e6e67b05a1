#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "satbasin/system.hpp"

namespace satbasin {

/// Solves F'P + P F = -R (direct solve over the n^2 unknowns; desk scale).
/// Throws SingularEquationError when eigenvalues of F sum to zero in pairs.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& R);

/// Quadratic inner basin estimate: V(x) = x'Px with (A+BK)'P + P(A+BK) = -I,
/// level chosen so the ellipsoid {V <= level} fits inside the linear slab
/// |k_i x| <= M. Inside it the dynamics are exactly linear and V decreases,
/// so every point of the ellipsoid converges to the origin.
struct LyapunovCertificate {
    Eigen::MatrixXd P;
    double level = 0.0;     // max_i-safe c with c * k_i P^-1 k_i' <= M^2
    double residual = 0.0;  // ||(A+BK)'P + P(A+BK) + I||_F
};

/// Quadratic escape witness: W(x) = x'Qx with A'Q + QA = I. W strictly
/// increases whenever ||x|| > divergence_radius, and every x with
/// W(x) > w_max stays outside the divergence ball forever.
struct EscapeCertificate {
    Eigen::MatrixXd Q;
    double divergence_radius = 0.0;  // 2 ||QB||_2 M sqrt(m)
    double w_max = 0.0;              // lambda_max(Q) * divergence_radius^2
};

LyapunovCertificate convergence_certificate(const SystemSpec& spec);
EscapeCertificate escape_certificate(const SystemSpec& spec);

struct FateCertificates {
    LyapunovCertificate lyapunov;
    EscapeCertificate escape;
};

FateCertificates make_fate_certificates(const SystemSpec& spec);

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.05;   // dense-output spacing bound for downstream monitors
    double min_step = 1e-14;
    double overflow_norm = 1e12;
};

struct Trajectory {
    std::vector<double> times;               // strictly increasing, starts at 0
    std::vector<Eigen::VectorXd> states;
    long accepted_steps = 0;
    long rejected_steps = 0;
    double max_error_estimate = 0.0;         // max accepted local error estimate, 2-norm
    bool overflow_escape = false;            // stopped early after ||x|| exceeded overflow_norm
};

/// Dormand-Prince 5(4) with error-per-unit-step control and local
/// extrapolation; accepted steps never exceed max_step. Throws
/// StiffnessError on step underflow.
Trajectory integrate_adaptive(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                              const IntegratorOptions& opts = {});
Trajectory integrate_adaptive(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                              double rel_tol, double abs_tol);

/// Like integrate_adaptive but invokes observer(t, x) at t = 0 and after
/// every accepted step; integration stops when the observer returns false.
Trajectory integrate_observed(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_end,
                              const IntegratorOptions& opts,
                              const std::function<bool(double, const Eigen::VectorXd&)>& observer);

enum class FateVerdict : std::uint8_t { ConvergedToOrigin, NotConverged, Undecided };

const char* fate_verdict_name(FateVerdict v);

struct FateReport {
    FateVerdict verdict = FateVerdict::Undecided;
    double t_decided = 0.0;
    std::string certificate;  // "lyapunov-ellipsoid", "escape-quadratic" or "none"
    Eigen::VectorXd final_state;
    std::string diagnostic;
};

/// Certificate-backed trajectory verdict: ConvergedToOrigin once x'Px <= level,
/// NotConverged once x'Qx >= (1 + 1e-6) w_max, Undecided at t_max. Heuristics
/// such as "||x|| small" are never used; near-boundary states stay Undecided.
FateReport classify_fate(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_max = 100.0,
                         const IntegratorOptions& opts = {});
FateReport classify_fate(const SystemSpec& spec, const FateCertificates& certs,
                         const Eigen::VectorXd& x0, double t_max = 100.0,
                         const IntegratorOptions& opts = {});

/// Header t,x1,...,xn; one row per sample; 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace satbasin

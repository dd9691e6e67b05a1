#include "satbasin/system.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "satbasin/errors.hpp"
#include "satbasin/rng.hpp"

namespace satbasin {

char sat_state_code(SatState s) {
    switch (s) {
        case SatState::NegSat: return 'N';
        case SatState::Linear: return 'L';
        case SatState::PosSat: return 'P';
    }
    return '?';
}

std::string RegionSignature::to_string() const {
    std::string out;
    out.reserve(channels.size());
    for (SatState s : channels) out.push_back(sat_state_code(s));
    return out;
}

RegionSignature RegionSignature::from_string(const std::string& codes) {
    RegionSignature sig;
    sig.channels.reserve(codes.size());
    for (char c : codes) {
        switch (c) {
            case 'N': sig.channels.push_back(SatState::NegSat); break;
            case 'L': sig.channels.push_back(SatState::Linear); break;
            case 'P': sig.channels.push_back(SatState::PosSat); break;
            default: throw std::invalid_argument("signature code must be one of N, L, P");
        }
    }
    return sig;
}

bool RegionSignature::operator<(const RegionSignature& other) const {
    return channels < other.channels;
}

std::vector<RegionSignature> all_signatures(int m) {
    if (m < 0) throw std::invalid_argument("m must be non-negative");
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) total *= 3;
    std::vector<RegionSignature> sigs;
    sigs.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<SatState> channels(static_cast<std::size_t>(m));
        std::size_t rem = code;
        for (int i = m - 1; i >= 0; --i) {
            channels[static_cast<std::size_t>(i)] = static_cast<SatState>(rem % 3);
            rem /= 3;
        }
        sigs.emplace_back(std::move(channels));
    }
    return sigs;
}

SystemSpec::SystemSpec(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd K_, double M_)
    : n(static_cast<int>(A_.rows())),
      m(static_cast<int>(B_.cols())),
      A(std::move(A_)),
      B(std::move(B_)),
      K(std::move(K_)),
      M(M_) {
    check_well_formed();
}

void SystemSpec::check_well_formed() const {
    if (n <= 0 || m <= 0) throw std::invalid_argument("state and input dimensions must be positive");
    if (A.rows() != n || A.cols() != n) throw std::invalid_argument("A must be n x n");
    if (B.rows() != n || B.cols() != m) throw std::invalid_argument("B must be n x m");
    if (K.rows() != m || K.cols() != n) throw std::invalid_argument("K must be m x n");
    if (!(M > 0.0)) throw std::invalid_argument("saturation bound M must be positive");
    if (!A.allFinite() || !B.allFinite() || !K.allFinite() || !std::isfinite(M))
        throw std::invalid_argument("system entries must be finite");
}

double saturate(double s, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("saturation bound M must be positive");
    return std::copysign(std::min(M, std::abs(s)), s);
}

Eigen::VectorXd saturate(const Eigen::VectorXd& u, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("saturation bound M must be positive");
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = std::copysign(std::min(M, std::abs(u(i))), u(i));
    return out;
}

Eigen::VectorXd closed_loop_field(const SystemSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.n) throw std::invalid_argument("state dimension mismatch");
    return spec.A * x + spec.B * saturate(spec.K * x, spec.M);
}

RegionInfo region_info(const SystemSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.n) throw std::invalid_argument("state dimension mismatch");
    RegionInfo info;
    info.signature.channels.resize(static_cast<std::size_t>(spec.m));
    info.margins.resize(spec.m);
    const Eigen::VectorXd u = spec.K * x;
    for (int i = 0; i < spec.m; ++i) {
        const double ui = u(i);
        info.margins(i) = spec.M - std::abs(ui);
        SatState state = SatState::Linear;
        if (ui >= spec.M) state = SatState::PosSat;
        else if (ui <= -spec.M) state = SatState::NegSat;
        info.signature.channels[static_cast<std::size_t>(i)] = state;
    }
    info.min_margin = info.margins.minCoeff();
    return info;
}

RegionSignature region_signature(const SystemSpec& spec, const Eigen::VectorXd& x) {
    return region_info(spec, x).signature;
}

Eigen::MatrixXd region_jacobian(const SystemSpec& spec, const RegionSignature& sig) {
    if (static_cast<int>(sig.size()) != spec.m) throw std::invalid_argument("signature length mismatch");
    Eigen::MatrixXd F = spec.A;
    for (int i = 0; i < spec.m; ++i)
        if (sig.channels[static_cast<std::size_t>(i)] == SatState::Linear)
            F.noalias() += spec.B.col(i) * spec.K.row(i);
    return F;
}

Eigen::VectorXd region_offset(const SystemSpec& spec, const RegionSignature& sig) {
    if (static_cast<int>(sig.size()) != spec.m) throw std::invalid_argument("signature length mismatch");
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(spec.n);
    for (int i = 0; i < spec.m; ++i) {
        switch (sig.channels[static_cast<std::size_t>(i)]) {
            case SatState::PosSat: offset += spec.B.col(i) * spec.M; break;
            case SatState::NegSat: offset -= spec.B.col(i) * spec.M; break;
            case SatState::Linear: break;
        }
    }
    return offset;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& F) {
    if (F.rows() != F.cols()) throw std::invalid_argument("eigenvalues need a square matrix");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(F, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw Error("eigenvalue iteration failed to converge");
    Eigen::VectorXcd eigs = solver.eigenvalues();
    std::vector<std::complex<double>> sorted(eigs.data(), eigs.data() + eigs.size());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    for (Eigen::Index i = 0; i < eigs.size(); ++i) eigs(i) = sorted[static_cast<std::size_t>(i)];
    return eigs;
}

namespace {

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    Eigen::MatrixXd C(n, n * m);
    Eigen::MatrixXd block = B;
    for (Eigen::Index k = 0; k < n; ++k) {
        C.block(0, k * m, n, m) = block;
        block = A * block;
    }
    return C;
}

int numeric_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-9) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = rel_tol * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

}  // namespace

ValidationReport validate_spec(const SystemSpec& spec) {
    spec.check_well_formed();
    ValidationReport report;
    report.eig_A = eigenvalues(spec.A);
    report.anti_stable = true;
    for (Eigen::Index i = 0; i < report.eig_A.size(); ++i)
        if (!(report.eig_A(i).real() > 0.0)) report.anti_stable = false;

    report.controllability_rank = numeric_rank(controllability_matrix(spec.A, spec.B));
    report.controllable = report.controllability_rank == spec.n;

    report.eig_closed_loop = eigenvalues(spec.A + spec.B * spec.K);
    report.closed_loop_hurwitz = true;
    for (Eigen::Index i = 0; i < report.eig_closed_loop.size(); ++i)
        if (!(report.eig_closed_loop(i).real() < 0.0)) report.closed_loop_hurwitz = false;
    return report;
}

namespace {

// Real coefficients of prod (s - p_i), constant term first.
Eigen::VectorXd real_poly_from_roots(const Eigen::VectorXcd& roots) {
    std::vector<std::complex<double>> coeffs{1.0};
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
        for (std::size_t j = 0; j < coeffs.size(); ++j) {
            next[j + 1] += coeffs[j];
            next[j] -= coeffs[j] * roots(i);
        }
        coeffs = std::move(next);
    }
    Eigen::VectorXd real_coeffs(static_cast<Eigen::Index>(coeffs.size()));
    double max_mag = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) max_mag = std::max(max_mag, std::abs(coeffs[j]));
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (std::abs(coeffs[j].imag()) > 1e-9 * std::max(1.0, max_mag))
            throw std::invalid_argument("pole list is not closed under conjugation");
        real_coeffs(static_cast<Eigen::Index>(j)) = coeffs[j].real();
    }
    return real_coeffs;
}

void require_conjugate_closed(const Eigen::VectorXcd& poles) {
    std::vector<bool> used(static_cast<std::size_t>(poles.size()), false);
    for (Eigen::Index i = 0; i < poles.size(); ++i) {
        if (std::abs(poles(i).imag()) <= 1e-12 * (1.0 + std::abs(poles(i)))) continue;
        bool found = false;
        for (Eigen::Index j = 0; j < poles.size(); ++j) {
            if (used[static_cast<std::size_t>(j)] || j == i) continue;
            if (std::abs(poles(j) - std::conj(poles(i))) <= 1e-9 * (1.0 + std::abs(poles(i)))) {
                used[static_cast<std::size_t>(j)] = true;
                used[static_cast<std::size_t>(i)] = true;
                found = true;
                break;
            }
        }
        if (!found && !used[static_cast<std::size_t>(i)])
            throw std::invalid_argument("pole list is not closed under conjugation");
    }
}

// Max distance from each requested pole to its nearest achieved one, greedy.
double pole_mismatch(const Eigen::VectorXcd& requested, const Eigen::VectorXcd& achieved) {
    std::vector<bool> used(static_cast<std::size_t>(achieved.size()), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < requested.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index best_j = -1;
        for (Eigen::Index j = 0; j < achieved.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(requested(i) - achieved(j));
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j >= 0) used[static_cast<std::size_t>(best_j)] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

Eigen::RowVectorXd place_poles_single_input(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                            const Eigen::VectorXcd& poles) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("A must be square");
    if (b.size() != n) throw std::invalid_argument("b length must match A");
    if (poles.size() != n) throw std::invalid_argument("need exactly n poles");
    require_conjugate_closed(poles);

    const Eigen::MatrixXd C = controllability_matrix(A, b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * sv(0))
        throw SingularControllabilityError("(A, b) is not controllable; pole placement is impossible");

    // phi(A) by Horner; coefficients constant-term first, leading coeff 1.
    const Eigen::VectorXd coeffs = real_poly_from_roots(poles);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index j = n - 1; j >= 0; --j) phi = phi * A + coeffs(j) * Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
    en(n - 1) = 1.0;
    const Eigen::RowVectorXd k = -(C.transpose().partialPivLu().solve(en)).transpose() * phi;

    const double mismatch = pole_mismatch(poles, eigenvalues(A + b * k));
    if (!(mismatch <= 1e-6))
        throw SingularControllabilityError("pole placement verification failed; pair is numerically uncontrollable");
    return k;
}

SystemSpec random_antistable_system(int n, std::uint64_t seed) {
    if (n < 2 || n > 8) throw std::invalid_argument("n must be in [2, 8]");
    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Eigen::MatrixXd A = rng.uniform_matrix(n, n, -1.0, 1.0);
        double min_re = std::numeric_limits<double>::infinity();
        for (const auto& lambda : eigenvalues(A)) min_re = std::min(min_re, lambda.real());
        A += (0.1 - min_re) * Eigen::MatrixXd::Identity(n, n);

        const Eigen::VectorXd b = rng.uniform_vector(n, -1.0, 1.0);

        Eigen::VectorXcd poles(n);
        Eigen::Index filled = 0;
        while (filled < n) {
            if (n - filled >= 2 && rng.uniform01() < 0.5) {
                const double re = rng.uniform(-3.0, -0.5);
                const double im = rng.uniform(0.2, 2.0);
                poles(filled) = {re, im};
                poles(filled + 1) = {re, -im};
                filled += 2;
            } else {
                poles(filled) = {rng.uniform(-3.0, -0.5), 0.0};
                filled += 1;
            }
        }

        try {
            const Eigen::RowVectorXd k = place_poles_single_input(A, b, poles);
            SystemSpec spec(A, b, k, 1.0);
            if (validate_spec(spec).all_ok()) return spec;
        } catch (const SingularControllabilityError&) {
            // redraw
        }
    }
    std::ostringstream msg;
    msg << "failed to draw a controllable anti-stable system after 100 attempts (n=" << n
        << ", seed=" << seed << ")";
    throw GeneratorError(msg.str());
}

}  // namespace satbasin

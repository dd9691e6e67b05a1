#include "satbasin/equilibria.hpp"

#include <cmath>
#include <stdexcept>

#include "satbasin/errors.hpp"

namespace satbasin {

const char* stability_name(Stability s) {
    switch (s) {
        case Stability::AsymptoticallyStable: return "asymptotically_stable";
        case Stability::Repelling: return "repelling";
        case Stability::Saddle: return "saddle";
        case Stability::Marginal: return "marginal";
    }
    return "?";
}

Stability classify_stability(const Eigen::VectorXcd& jac_eigs, double tol) {
    bool any_negative = false, any_positive = false, any_marginal = false;
    for (Eigen::Index i = 0; i < jac_eigs.size(); ++i) {
        const double re = jac_eigs(i).real();
        if (re < -tol) any_negative = true;
        else if (re > tol) any_positive = true;
        else any_marginal = true;
    }
    if (any_marginal) return Stability::Marginal;
    if (any_negative && any_positive) return Stability::Saddle;
    if (any_negative) return Stability::AsymptoticallyStable;
    return Stability::Repelling;
}

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Accepts x as a member of region sig if every channel inequality holds with
// gp_tol slack, so plane-adjacent roots are kept (and flagged downstream).
bool signature_matches(const SystemSpec& spec, const RegionSignature& sig,
                       const Eigen::VectorXd& u, double gp_tol) {
    for (int i = 0; i < spec.m; ++i) {
        const double ui = u(i);
        switch (sig.channels[static_cast<std::size_t>(i)]) {
            case SatState::PosSat:
                if (!(ui >= spec.M - gp_tol)) return false;
                break;
            case SatState::NegSat:
                if (!(ui <= -spec.M + gp_tol)) return false;
                break;
            case SatState::Linear:
                if (!(std::abs(ui) <= spec.M + gp_tol)) return false;
                break;
        }
    }
    return true;
}

}  // namespace

// Pivots below 1e-10 of the largest mark a region matrix as singular; an
// ill-conditioned solve past that would emit meaningless coordinates.
constexpr double kRegionRankThreshold = 1e-10;

EnumerationResult enumerate_equilibria(const SystemSpec& spec, double gp_tol) {
    spec.check_well_formed();
    EnumerationResult result;
    for (const RegionSignature& sig : all_signatures(spec.m)) {
        const Eigen::MatrixXd F = region_jacobian(spec, sig);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(F);
        lu.setThreshold(kRegionRankThreshold);
        if (!lu.isInvertible()) {
            result.degenerate_regions.push_back(sig);
            continue;
        }
        const Eigen::VectorXd x = lu.solve(-region_offset(spec, sig));
        const Eigen::VectorXd u = spec.K * x;
        if (!signature_matches(spec, sig, u, gp_tol)) continue;

        bool duplicate = false;
        for (const Equilibrium& eq : result.equilibria)
            if ((eq.x - x).norm() <= 1e-8) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;

        Equilibrium eq;
        eq.x = x;
        eq.signature = sig;
        eq.margin = (spec.M - u.cwiseAbs().array()).abs().minCoeff();
        eq.general_position = eq.margin > gp_tol;
        if (eq.general_position) {
            const int s = sign_of(lu.determinant());
            if (s != 0) eq.index = s;
        }
        eq.jac_eigs = eigenvalues(F);
        eq.stability = classify_stability(eq.jac_eigs);
        result.equilibria.push_back(std::move(eq));
    }
    return result;
}

int equilibrium_index(const SystemSpec& spec, const Equilibrium& eq) {
    if (!eq.general_position)
        throw DegenerateEquilibriumError("index undefined on a switching plane");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(region_jacobian(spec, eq.signature));
    lu.setThreshold(kRegionRankThreshold);
    if (!lu.isInvertible())
        throw DegenerateEquilibriumError("index undefined for singular region Jacobian");
    return sign_of(lu.determinant());
}

ParityReport parity_check(const SystemSpec& spec, double gp_tol) {
    if (spec.m != 1)
        throw std::invalid_argument("parity check applies to single-input systems only");
    const EnumerationResult enumeration = enumerate_equilibria(spec, gp_tol);

    ParityReport report;
    report.count = static_cast<int>(enumeration.equilibria.size());
    report.expected_count = (spec.n % 2 == 0) ? 1 : 3;
    report.generic = enumeration.degenerate_regions.empty();
    for (const Equilibrium& eq : enumeration.equilibria) {
        if (!eq.general_position || !eq.index) report.generic = false;
        if (eq.index) report.index_sum += *eq.index;
    }
    report.pass = !report.generic ||
                  (report.count == report.expected_count && report.index_sum == 1);
    return report;
}

}  // namespace satbasin

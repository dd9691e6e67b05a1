#pragma once

#include <optional>
#include <vector>

#include "satbasin/system.hpp"

namespace satbasin {

enum class Stability : std::uint8_t { AsymptoticallyStable, Repelling, Saddle, Marginal };

const char* stability_name(Stability s);

struct Equilibrium {
    Eigen::VectorXd x;
    RegionSignature signature;
    bool general_position = false;
    double margin = 0.0;            // min_i |M - |k_i x||, distance to nearest switching plane
    std::optional<int> index;       // sign(det region Jacobian); absent when degenerate
    Eigen::VectorXcd jac_eigs;
    Stability stability = Stability::Marginal;
};

struct EnumerationResult {
    std::vector<Equilibrium> equilibria;            // canonical signature order
    std::vector<RegionSignature> degenerate_regions; // singular region matrices, no isolated candidate
};

struct ParityReport {
    int count = 0;
    int expected_count = 0;  // 1 for even n, 3 for odd n
    int index_sum = 0;
    bool generic = false;    // all equilibria in general position
    bool pass = false;       // (not generic) or (count == expected and index_sum == 1)
};

/// Solves the affine equilibrium equation on each of the 3^m regions and
/// keeps solutions whose actual signature matches, with gp_tol slack so
/// switching-plane-adjacent roots are retained but flagged non-generic.
/// Duplicate hits within 1e-8 of each other are merged.
EnumerationResult enumerate_equilibria(const SystemSpec& spec, double gp_tol = 1e-9);

/// sign(det region_jacobian(eq.signature)).
/// Throws DegenerateEquilibriumError off general position or at det == 0.
int equilibrium_index(const SystemSpec& spec, const Equilibrium& eq);

Stability classify_stability(const Eigen::VectorXcd& jac_eigs, double tol = 1e-9);

/// Generic single-input systems have one equilibrium (n even) or three
/// (n odd) with indices summing to +1. Throws std::invalid_argument for m != 1.
ParityReport parity_check(const SystemSpec& spec, double gp_tol = 1e-9);

}  // namespace satbasin

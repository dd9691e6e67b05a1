#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace satbasin {

/// Saturation state of one input channel.
enum class SatState : std::uint8_t { NegSat = 0, Linear = 1, PosSat = 2 };

char sat_state_code(SatState s);  // 'N', 'L' or 'P'

/// Per-channel saturation assignment. Partitions state space into 3^m
/// polyhedral regions on which the closed-loop field is affine.
struct RegionSignature {
    std::vector<SatState> channels;

    RegionSignature() = default;
    explicit RegionSignature(std::vector<SatState> ch) : channels(std::move(ch)) {}

    std::size_t size() const { return channels.size(); }
    std::string to_string() const;
    static RegionSignature from_string(const std::string& codes);

    bool operator==(const RegionSignature& other) const = default;
    /// Lexicographic with NegSat < Linear < PosSat; canonical enumeration order.
    bool operator<(const RegionSignature& other) const;
};

/// Enumerates all 3^m signatures in canonical (lexicographic) order.
std::vector<RegionSignature> all_signatures(int m);

/// Plant, feedback gain and saturation bound for
///   x' = A x + B sat(K x),   sat clamping each channel to [-M, M].
struct SystemSpec {
    int n = 0;           // state dimension
    int m = 0;           // input dimension
    Eigen::MatrixXd A;   // n x n
    Eigen::MatrixXd B;   // n x m
    Eigen::MatrixXd K;   // m x n, u = K x
    double M = 1.0;      // saturation bound, > 0

    SystemSpec() = default;
    SystemSpec(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd K_, double M_);

    /// Throws std::invalid_argument on inconsistent dimensions, non-finite
    /// entries or M <= 0. Called by the constructor above.
    void check_well_formed() const;
};

struct ValidationReport {
    bool anti_stable = false;         // all Re eig(A) > 0
    bool controllable = false;        // rank [B, AB, ..., A^{n-1}B] == n
    bool closed_loop_hurwitz = false; // all Re eig(A + BK) < 0
    Eigen::VectorXcd eig_A;
    Eigen::VectorXcd eig_closed_loop;
    int controllability_rank = 0;

    bool all_ok() const { return anti_stable && controllable && closed_loop_hurwitz; }
};

/// sign(s) * min(M, |s|). Throws std::invalid_argument if M <= 0.
double saturate(double s, double M);

/// Per-channel saturation of u.
Eigen::VectorXd saturate(const Eigen::VectorXd& u, double M);

/// A x + B sat(K x). Continuous, piecewise affine and odd in x.
Eigen::VectorXd closed_loop_field(const SystemSpec& spec, const Eigen::VectorXd& x);

struct RegionInfo {
    RegionSignature signature;
    Eigen::VectorXd margins;  // M - |k_i x| per channel, negative when saturated
    double min_margin = 0.0;  // min_i margins(i)
};

/// Channel i is PosSat if k_i x >= M, NegSat if k_i x <= -M, Linear otherwise
/// (boundary points count as saturated, keeping the assignment total).
RegionInfo region_info(const SystemSpec& spec, const Eigen::VectorXd& x);
RegionSignature region_signature(const SystemSpec& spec, const Eigen::VectorXd& x);

/// A + sum over Linear channels of B_col_i K_row_i. Equals A + BK on the
/// all-Linear region and A on fully saturated ones.
Eigen::MatrixXd region_jacobian(const SystemSpec& spec, const RegionSignature& sig);

/// Constant part of the field on a region:
///   sum_{PosSat} B_col_i M - sum_{NegSat} B_col_i M.
Eigen::VectorXd region_offset(const SystemSpec& spec, const RegionSignature& sig);

/// Spectrum with algebraic multiplicity, sorted by (Re, Im).
/// Throws std::invalid_argument for non-square input.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& F);

ValidationReport validate_spec(const SystemSpec& spec);

/// Unique single-input gain k with spectrum(A + b k) equal to the requested
/// poles (Ackermann construction). Poles must be closed under conjugation.
/// The placement is re-verified against eigenvalues(); mismatch above 1e-6
/// raises SingularControllabilityError.
Eigen::RowVectorXd place_poles_single_input(const Eigen::MatrixXd& A,
                                            const Eigen::VectorXd& b,
                                            const Eigen::VectorXcd& poles);

/// Deterministic-in-seed single-input spec passing validate_spec:
/// A uniform [-1,1] entries shifted so min Re eig(A) = 0.1, b uniform,
/// K placing random Hurwitz poles with real parts in [-3, -0.5], M = 1.
/// Throws GeneratorError after 100 failed redraws.
SystemSpec random_antistable_system(int n, std::uint64_t seed);

}  // namespace satbasin

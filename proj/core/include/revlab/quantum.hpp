#pragma once

#include "revlab/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace revlab {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Largest absolute entry; the norm used by every tolerance in this module.
double max_abs(const ComplexMatrix& m);

/// Finite-dimensional Hamiltonian with a cached eigendecomposition. Time reversal is complex
/// conjugation in the standard basis, so tr_symmetric means the matrix is real.
class QuantumSystem {
public:
    static constexpr std::size_t max_dimension = 512;

    /// Throws ContractViolation if H is not self-adjoint to 1e-12, if tr_symmetric and some
    /// imaginary part exceeds 1e-14, or if the dimension is 0 or above max_dimension.
    QuantumSystem(ComplexMatrix hamiltonian, bool tr_symmetric);
    explicit QuantumSystem(const RealMatrix& hamiltonian);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(h_.rows()); }
    const ComplexMatrix& hamiltonian() const noexcept { return h_; }
    bool tr_symmetric() const noexcept { return tr_symmetric_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return evals_; }
    const ComplexMatrix& eigenvectors() const noexcept { return evecs_; }

    /// exp(-i tau H).
    ComplexMatrix propagator(double tau) const;
    /// exp(-beta (H - shift)); pass the ground energy as shift to avoid overflow.
    ComplexMatrix gibbs(double beta, double shift = 0.0) const;

private:
    ComplexMatrix h_;
    bool tr_symmetric_;
    Eigen::VectorXd evals_;
    ComplexMatrix evecs_;
};

/// Macrostate projections P^I, P^II with their commutators against H recorded.
class ProjectionPair {
public:
    /// Each must satisfy P^2 = P and P = P^T to 1e-12, and P^I P^II = 0 to 1e-12.
    ProjectionPair(const QuantumSystem& sys, RealMatrix p_i, RealMatrix p_ii);

    const RealMatrix& p_i() const noexcept { return p_i_; }
    const RealMatrix& p_ii() const noexcept { return p_ii_; }
    double commutator_i() const noexcept { return comm_i_; }
    double commutator_ii() const noexcept { return comm_ii_; }
    double rank_i() const noexcept { return p_i_.trace(); }
    double rank_ii() const noexcept { return p_ii_.trace(); }

private:
    RealMatrix p_i_;
    RealMatrix p_ii_;
    double comm_i_;
    double comm_ii_;
};

/// Spectral projection of H onto eigenvalues in [E - width/2, E + width/2].
struct EnergyShellProjection {
    double energy = 0.0;
    double width = 0.0;
    ComplexMatrix projection;
    std::size_t rank = 0;
};

/// Throws ContractViolation for an empty shell.
EnergyShellProjection energy_shell(const QuantumSystem& sys, double energy, double width);
/// The shell covering the whole spectrum.
EnergyShellProjection full_shell(const QuantumSystem& sys);

/// Tr(shell from e^{i tau H} to e^{-i tau H} from) / Tr(shell from).
/// Throws ContractViolation when Tr(shell from) <= 0.
double transition_probability(const QuantumSystem& sys, const EnergyShellProjection& shell,
                              const ComplexMatrix& from, const ComplexMatrix& to, double tau);

struct QuantumRatioReport {
    double pi_forward = 0.0;  ///< I -> II
    double pi_reverse = 0.0;  ///< II -> I
    double lhs = 0.0;         ///< pi_reverse / pi_forward
    double rhs = 0.0;         ///< Tr(P_E P^I) / Tr(P_E P^II)
    double deviation = 0.0;
    double tolerance = 1e-10;
    bool satisfied = false;
};

void to_json(nlohmann::json& j, const QuantumRatioReport& r);

/// Both sides of the ratio identity with no symmetry precondition (used for broken controls).
QuantumRatioReport compare_quantum_ratio(const QuantumSystem& sys, const EnergyShellProjection& shell,
                                         const ProjectionPair& pair, double tau, double tolerance = 1e-10);

/// As compare_quantum_ratio; requires a time-reversal-symmetric system.
QuantumRatioReport verify_quantum_ratio(const QuantumSystem& sys, const EnergyShellProjection& shell,
                                        const ProjectionPair& pair, double tau, double tolerance = 1e-10);

/// Tr(e^{-beta H} P^I) / Tr(e^{-beta H} P^II).
double canonical_ratio(const QuantumSystem& sys, double beta, const ProjectionPair& pair);

struct QuantumEntropyReport {
    double s_i = 0.0;
    double s_ii = 0.0;
    double energy_i = 0.0;  ///< Tr(rho^I H)
    double energy_ii = 0.0;
    /// |S - (ln Tr(e^{-beta H} P) + beta Tr(rho H))| for each side.
    double identity_defect_i = 0.0;
    double identity_defect_ii = 0.0;
    double lhs = 0.0;  ///< ln canonical_ratio
    double rhs = 0.0;  ///< S^I - S^II - beta (Tr rho^I H - Tr rho^II H)
    double deviation = 0.0;
    double tolerance = 1e-10;
    bool satisfied = false;
};

void to_json(nlohmann::json& j, const QuantumEntropyReport& r);

/// Restricted Gibbs states rho = e^{-beta H} P / Tr(e^{-beta H} P). Requires [H, P] = 0 to 1e-10
/// for both projections (ContractViolation naming the offending one).
QuantumEntropyReport verify_quantum_entropy_identity(const QuantumSystem& sys, double beta,
                                                     const ProjectionPair& pair, double tolerance = 1e-10);

/// -Tr rho ln rho from the eigenvalues of rho.
double von_neumann_entropy(const ComplexMatrix& rho);

/// ||U U^dagger - 1|| for U = exp(-i tau H).
double unitarity_defect(const QuantumSystem& sys, double tau);

// Random instances.

/// Real symmetric Gaussian matrix (GOE), entries scaled by 1/sqrt(d).
RealMatrix random_symmetric(std::size_t d, Philox4x32& rng);
/// Hermitian A + iB with A real symmetric and B real antisymmetric, both Gaussian.
ComplexMatrix random_hermitian_broken(std::size_t d, Philox4x32& rng);
/// Mutually orthogonal real projections of the given ranks (span of disjoint columns of a random
/// orthogonal matrix).
std::pair<RealMatrix, RealMatrix> random_orthogonal_projections(std::size_t d, std::size_t rank_i,
                                                                std::size_t rank_ii, Philox4x32& rng);
/// Projections onto disjoint random subsets of the eigenvectors of a real system; they commute with H.
std::pair<RealMatrix, RealMatrix> random_spectral_projections(const QuantumSystem& sys, std::size_t rank_i,
                                                              std::size_t rank_ii, Philox4x32& rng);

}  // namespace revlab

#include "revlab/errors.hpp"
#include "revlab/quantum.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>

namespace revlab {
namespace {

using cd = std::complex<double>;

RealMatrix basis_projection(std::size_t d, std::initializer_list<std::size_t> states) {
    RealMatrix p = RealMatrix::Zero(d, d);
    for (auto s : states) p(s, s) = 1.0;
    return p;
}

QuantumSystem pauli_x() {
    RealMatrix h(2, 2);
    h << 0, 1, 1, 0;
    return QuantumSystem(h);
}

QuantumSystem two_level() {
    RealMatrix h(2, 2);
    h << 0, 0, 0, 1;
    return QuantumSystem(h);
}

/// Brute force: propagator by the scaling-and-squaring matrix exponential, trace formula by hand.
double brute_force_probability(const ComplexMatrix& h, const ComplexMatrix& from, const ComplexMatrix& to,
                               double tau) {
    const ComplexMatrix x = (cd(0.0, -tau) * h).eval();
    const ComplexMatrix u = x.exp();
    const ComplexMatrix ud = (cd(0.0, tau) * h).eval().exp();
    double num = 0.0;
    const ComplexMatrix m = from * ud * to * u * from;
    for (Eigen::Index k = 0; k < m.rows(); ++k) num += m(k, k).real();
    return num / from.trace().real();
}

}  // namespace

TEST(QuantumSystem, Validation) {
    ComplexMatrix nonherm(2, 2);
    nonherm << 0, 1, 2, 0;
    EXPECT_THROW(QuantumSystem(nonherm, false), ContractViolation);
    ComplexMatrix complex_h(2, 2);
    complex_h << cd(0, 0), cd(0, 1), cd(0, -1), cd(0, 0);
    EXPECT_THROW(QuantumSystem(complex_h, true), ContractViolation);
    EXPECT_NO_THROW(QuantumSystem(complex_h, false));
    EXPECT_THROW(QuantumSystem(RealMatrix::Zero(513, 513)), ContractViolation);
}

TEST(ProjectionPair, Validation) {
    const auto sys = pauli_x();
    EXPECT_THROW(ProjectionPair(sys, 2.0 * basis_projection(2, {0}), basis_projection(2, {1})), ContractViolation);
    EXPECT_THROW(ProjectionPair(sys, basis_projection(2, {0}), basis_projection(2, {0})), ContractViolation);
    RealMatrix skew(2, 2);
    skew << 1, 1, 0, 0;  // idempotent, not symmetric
    EXPECT_THROW(ProjectionPair(sys, skew, RealMatrix::Zero(2, 2)), ContractViolation);
    const ProjectionPair ok(sys, basis_projection(2, {0}), basis_projection(2, {1}));
    EXPECT_GT(ok.commutator_i(), 0.5);
}

TEST(EnergyShell, CommutesWithHamiltonian) {
    Philox4x32 rng(101, 0);
    const QuantumSystem sys(random_symmetric(32, rng));
    const auto shell = energy_shell(sys, 0.0, 0.8);
    EXPECT_GE(shell.rank, 1u);
    EXPECT_LE(max_abs(sys.hamiltonian() * shell.projection - shell.projection * sys.hamiltonian()), 1e-10);
    EXPECT_THROW(energy_shell(sys, 100.0, 0.1), ContractViolation);
}

TEST(TransitionProbability, TwoLevelRabi) {
    const auto sys = pauli_x();
    const ComplexMatrix from = basis_projection(2, {0}).cast<cd>();
    const ComplexMatrix to = basis_projection(2, {1}).cast<cd>();
    const auto shell = full_shell(sys);
    for (double tau : {0.0, 0.3, 1.0, 2.2, 7.5}) {
        EXPECT_NEAR(transition_probability(sys, shell, from, to, tau), std::pow(std::sin(tau), 2), 1e-12);
        EXPECT_NEAR(brute_force_probability(sys.hamiltonian(), from, to, tau), std::pow(std::sin(tau), 2), 1e-12);
    }
    EXPECT_NEAR(transition_probability(sys, shell, from, from, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(transition_probability(sys, shell, from, to, 0.0), 0.0, 1e-15);
}

TEST(TransitionProbability, ZeroWeightIsAnError) {
    const auto sys = two_level();
    const auto shell = energy_shell(sys, 0.0, 0.5);  // ground state only
    EXPECT_THROW(transition_probability(sys, shell, basis_projection(2, {1}).cast<cd>(),
                                        basis_projection(2, {0}).cast<cd>(), 1.0),
                 ContractViolation);
}

TEST(TransitionProbability, MatchesBruteForceAtSmallDimension) {
    Philox4x32 rng(102, 0);
    const RealMatrix h = random_symmetric(6, rng);
    const QuantumSystem sys(h);
    const auto [a, b] = random_orthogonal_projections(6, 2, 3, rng);
    for (double tau : {0.4, 1.7, 5.3}) {
        EXPECT_NEAR(transition_probability(sys, full_shell(sys), a.cast<cd>(), b.cast<cd>(), tau),
                    brute_force_probability(h.cast<cd>(), a.cast<cd>(), b.cast<cd>(), tau), 1e-12);
    }
}

TEST(TransitionProbability, ConservedOverCompleteFamily) {
    Philox4x32 rng(103, 0);
    const std::size_t d = 20;
    const QuantumSystem sys(random_symmetric(d, rng));
    const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(RealMatrix::Random(d, d)).householderQ();
    std::vector<ComplexMatrix> family;
    for (Eigen::Index start : {0, 5, 12}) {
        const Eigen::Index n = start == 0 ? 5 : (start == 5 ? 7 : 8);
        const RealMatrix cols = q.middleCols(start, n);
        family.push_back((cols * cols.transpose()).cast<cd>());
    }
    for (const auto& from : family) {
        double total = 0.0;
        for (const auto& to : family) total += transition_probability(sys, full_shell(sys), from, to, 2.3);
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(Propagator, Unitary) {
    Philox4x32 rng(104, 0);
    const QuantumSystem real_sys(random_symmetric(64, rng));
    const QuantumSystem broken(random_hermitian_broken(64, rng), false);
    for (double tau : {0.1, 3.0, 40.0}) {
        EXPECT_LE(unitarity_defect(real_sys, tau), 1e-10);
        EXPECT_LE(unitarity_defect(broken, tau), 1e-10);
    }
}

TEST(QuantumRatio, SameProjectionGivesOne) {
    Philox4x32 rng(105, 0);
    const QuantumSystem sys(random_symmetric(8, rng));
    const auto [a, b] = random_orthogonal_projections(8, 3, 3, rng);
    // P^I == P^II violates orthogonality, so compare equal-rank projections instead: rhs is 1 exactly.
    const ProjectionPair pair(sys, a, b);
    const auto r = verify_quantum_ratio(sys, full_shell(sys), pair, 1.1);
    EXPECT_NEAR(r.rhs, 1.0, 1e-12);
    EXPECT_NEAR(r.lhs, 1.0, 1e-10);
}

TEST(QuantumRatio, RandomRealInstanceD64) {
    Philox4x32 rng(106, 0);
    const QuantumSystem sys(random_symmetric(64, rng));
    const auto [a, b] = random_orthogonal_projections(64, 10, 30, rng);
    const ProjectionPair pair(sys, a, b);
    const auto r = verify_quantum_ratio(sys, full_shell(sys), pair, 1.3);
    EXPECT_NEAR(r.rhs, 10.0 / 30.0, 1e-12);
    EXPECT_TRUE(r.satisfied) << r.deviation;
}

TEST(QuantumRatio, BrokenSymmetryViolatesIdentity) {
    Philox4x32 rng(107, 0);
    const QuantumSystem sys(random_hermitian_broken(64, rng), false);
    const auto [a, b] = random_orthogonal_projections(64, 10, 30, rng);
    const ProjectionPair pair(sys, a, b);
    const auto r = compare_quantum_ratio(sys, full_shell(sys), pair, 1.3);
    EXPECT_GT(r.deviation, 1e-3);
    EXPECT_FALSE(r.satisfied);
    EXPECT_THROW(verify_quantum_ratio(sys, full_shell(sys), pair, 1.3), ContractViolation);
}

TEST(CanonicalRatio, Examples) {
    Philox4x32 rng(108, 0);
    const QuantumSystem sys(random_symmetric(12, rng));
    const auto [a, b] = random_orthogonal_projections(12, 4, 6, rng);
    const ProjectionPair pair(sys, a, b);
    EXPECT_NEAR(canonical_ratio(sys, 0.0, pair), 4.0 / 6.0, 1e-12);
    const ProjectionPair levels(two_level(), basis_projection(2, {0}), basis_projection(2, {1}));
    EXPECT_NEAR(canonical_ratio(two_level(), 1.0, levels), std::exp(1.0), 1e-12);
    // Shift-invariant: adding a large constant changes nothing.
    RealMatrix shifted = two_level().hamiltonian().real();
    shifted += 800.0 * RealMatrix::Identity(2, 2);
    const QuantumSystem far(shifted);
    EXPECT_NEAR(canonical_ratio(far, 1.0, ProjectionPair(far, basis_projection(2, {0}), basis_projection(2, {1}))),
                std::exp(1.0), 1e-9);
}

TEST(QuantumEntropy, TwoLevelHandComputation) {
    const auto sys = two_level();
    const ProjectionPair pair(sys, basis_projection(2, {0}), basis_projection(2, {1}));
    const auto r = verify_quantum_entropy_identity(sys, 1.0, pair);
    EXPECT_NEAR(r.s_i, 0.0, 1e-15);
    EXPECT_NEAR(r.s_ii, 0.0, 1e-15);
    EXPECT_NEAR(r.lhs, 1.0, 1e-12);
    EXPECT_NEAR(r.rhs, 1.0, 1e-12);
    EXPECT_TRUE(r.satisfied);
}

TEST(QuantumEntropy, DiagonalInstanceAgainstHandTraceSums) {
    // d = 4: S_P = -sum_{k in P} p_k ln p_k with p_k = e^{-beta E_k} / sum_{j in P} e^{-beta E_j}.
    RealMatrix h = RealMatrix::Zero(4, 4);
    const double e[4] = {0.3, -1.1, 0.7, 2.0};
    for (int k = 0; k < 4; ++k) h(k, k) = e[k];
    const QuantumSystem sys(h);
    const double beta = 0.7;
    const ProjectionPair pair(sys, basis_projection(4, {0, 1}), basis_projection(4, {2, 3}));
    auto hand = [&](int a, int b) {
        const double za = std::exp(-beta * e[a]) + std::exp(-beta * e[b]);
        const double pa = std::exp(-beta * e[a]) / za;
        const double pb = std::exp(-beta * e[b]) / za;
        return std::pair{-pa * std::log(pa) - pb * std::log(pb), za};
    };
    const auto [s_i, z_i] = hand(0, 1);
    const auto [s_ii, z_ii] = hand(2, 3);
    const auto r = verify_quantum_entropy_identity(sys, beta, pair);
    EXPECT_NEAR(r.s_i, s_i, 1e-12);
    EXPECT_NEAR(r.s_ii, s_ii, 1e-12);
    EXPECT_NEAR(r.lhs, std::log(z_i / z_ii), 1e-12);
    EXPECT_TRUE(r.satisfied);
}

TEST(QuantumEntropy, RandomDiagonalD16) {
    Philox4x32 rng(109, 0);
    RealMatrix h = RealMatrix::Zero(16, 16);
    for (int k = 0; k < 16; ++k) h(k, k) = 2.0 * standard_normal(rng);
    const QuantumSystem sys(h);
    const auto [a, b] = random_spectral_projections(sys, 5, 7, rng);
    const auto r = verify_quantum_entropy_identity(sys, 0.7, ProjectionPair(sys, a, b));
    EXPECT_LE(r.deviation, 1e-10);
    EXPECT_TRUE(r.satisfied);
}

TEST(QuantumEntropy, BoundsAndPrecondition) {
    Philox4x32 rng(110, 0);
    const QuantumSystem sys(random_symmetric(24, rng));
    const auto [a, b] = random_spectral_projections(sys, 6, 9, rng);
    const ProjectionPair pair(sys, a, b);
    for (double beta : {0.0, 0.5, 3.0}) {
        const auto r = verify_quantum_entropy_identity(sys, beta, pair);
        EXPECT_GE(r.s_i, -1e-10);
        EXPECT_LE(r.s_i, std::log(6.0) + 1e-10);
        EXPECT_LE(r.s_ii, std::log(9.0) + 1e-10);
        EXPECT_TRUE(r.satisfied);
    }
    const auto [c, d] = random_orthogonal_projections(24, 6, 9, rng);
    try {
        verify_quantum_entropy_identity(sys, 1.0, ProjectionPair(sys, c, d));
        FAIL();
    } catch (const ContractViolation& e) {
        EXPECT_NE(std::string(e.what()).find("P^I"), std::string::npos);
    }
}

}  // namespace revlab

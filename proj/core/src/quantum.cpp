#include "revlab/quantum.hpp"

#include "revlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

namespace revlab {

using cd = std::complex<double>;

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

QuantumSystem::QuantumSystem(ComplexMatrix hamiltonian, bool tr_symmetric)
    : h_(std::move(hamiltonian)), tr_symmetric_(tr_symmetric) {
    if (h_.rows() == 0 || h_.rows() != h_.cols()) throw ContractViolation("Hamiltonian must be square and nonempty");
    if (dim() > max_dimension) {
        throw ContractViolation("dimension " + std::to_string(dim()) + " exceeds the cap of " +
                                std::to_string(max_dimension));
    }
    if (!h_.allFinite()) throw ContractViolation("Hamiltonian has non-finite entries");
    if (max_abs(h_ - h_.adjoint()) > 1e-12) throw ContractViolation("Hamiltonian is not self-adjoint");
    if (tr_symmetric_ && h_.imag().cwiseAbs().maxCoeff() > 1e-14) {
        throw ContractViolation("time-reversal-symmetric Hamiltonian must be real");
    }
    const ComplexMatrix sym = 0.5 * (h_ + h_.adjoint());
    if (tr_symmetric_) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym.real());
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors().cast<cd>();
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    }
}

QuantumSystem::QuantumSystem(const RealMatrix& hamiltonian) : QuantumSystem(hamiltonian.cast<cd>(), true) {}

ComplexMatrix QuantumSystem::propagator(double tau) const {
    Eigen::VectorXcd phase(evals_.size());
    for (Eigen::Index k = 0; k < evals_.size(); ++k) phase[k] = std::polar(1.0, -tau * evals_[k]);
    return evecs_ * phase.asDiagonal() * evecs_.adjoint();
}

ComplexMatrix QuantumSystem::gibbs(double beta, double shift) const {
    Eigen::VectorXcd w(evals_.size());
    for (Eigen::Index k = 0; k < evals_.size(); ++k) w[k] = std::exp(-beta * (evals_[k] - shift));
    return evecs_ * w.asDiagonal() * evecs_.adjoint();
}

namespace {

void check_projection(const RealMatrix& p, const char* name, Eigen::Index d) {
    if (p.rows() != d || p.cols() != d) throw ContractViolation(std::string(name) + " has the wrong dimension");
    if ((p * p - p).cwiseAbs().maxCoeff() > 1e-12) throw ContractViolation(std::string(name) + " is not idempotent");
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ContractViolation(std::string(name) + " is not symmetric");
    }
}

double commutator_norm(const ComplexMatrix& h, const ComplexMatrix& p) { return max_abs(h * p - p * h); }

}  // namespace

ProjectionPair::ProjectionPair(const QuantumSystem& sys, RealMatrix p_i, RealMatrix p_ii)
    : p_i_(std::move(p_i)), p_ii_(std::move(p_ii)) {
    const auto d = static_cast<Eigen::Index>(sys.dim());
    check_projection(p_i_, "P^I", d);
    check_projection(p_ii_, "P^II", d);
    if ((p_i_ * p_ii_).cwiseAbs().maxCoeff() > 1e-12) throw ContractViolation("P^I and P^II are not orthogonal");
    comm_i_ = commutator_norm(sys.hamiltonian(), p_i_.cast<cd>());
    comm_ii_ = commutator_norm(sys.hamiltonian(), p_ii_.cast<cd>());
}

EnergyShellProjection energy_shell(const QuantumSystem& sys, double energy, double width) {
    if (!(width > 0.0)) throw ContractViolation("energy shell width must be positive");
    EnergyShellProjection shell{energy, width, ComplexMatrix::Zero(sys.dim(), sys.dim()), 0};
    const auto& v = sys.eigenvectors();
    for (Eigen::Index k = 0; k < sys.eigenvalues().size(); ++k) {
        if (std::abs(sys.eigenvalues()[k] - energy) <= 0.5 * width) {
            shell.projection += v.col(k) * v.col(k).adjoint();
            ++shell.rank;
        }
    }
    if (shell.rank == 0) throw ContractViolation("energy shell contains no eigenvalue");
    return shell;
}

EnergyShellProjection full_shell(const QuantumSystem& sys) {
    const auto& e = sys.eigenvalues();
    const double lo = e.minCoeff();
    const double hi = e.maxCoeff();
    EnergyShellProjection shell{0.5 * (lo + hi), hi - lo, ComplexMatrix::Identity(sys.dim(), sys.dim()), sys.dim()};
    return shell;
}

double transition_probability(const QuantumSystem& sys, const EnergyShellProjection& shell,
                              const ComplexMatrix& from, const ComplexMatrix& to, double tau) {
    const ComplexMatrix sf = shell.projection * from;
    const double norm = sf.trace().real();
    if (!(norm > 0.0)) throw ContractViolation("initial projection has zero weight on the energy shell");
    const ComplexMatrix u = sys.propagator(tau);
    const ComplexMatrix moved = u.adjoint() * to * u;  // e^{i tau H} to e^{-i tau H}
    return (sf * moved * from).trace().real() / norm;
}

void to_json(nlohmann::json& j, const QuantumRatioReport& r) {
    j = nlohmann::json{{"pi_forward", r.pi_forward}, {"pi_reverse", r.pi_reverse}, {"lhs", r.lhs},
                       {"rhs", r.rhs},               {"deviation", r.deviation},   {"tolerance", r.tolerance},
                       {"satisfied", r.satisfied}};
}

QuantumRatioReport compare_quantum_ratio(const QuantumSystem& sys, const EnergyShellProjection& shell,
                                         const ProjectionPair& pair, double tau, double tolerance) {
    const ComplexMatrix pi = pair.p_i().cast<cd>();
    const ComplexMatrix pii = pair.p_ii().cast<cd>();
    QuantumRatioReport r;
    r.pi_forward = transition_probability(sys, shell, pi, pii, tau);
    r.pi_reverse = transition_probability(sys, shell, pii, pi, tau);
    r.lhs = r.pi_reverse / r.pi_forward;
    r.rhs = (shell.projection * pi).trace().real() / (shell.projection * pii).trace().real();
    r.deviation = std::abs(r.lhs - r.rhs);
    r.tolerance = tolerance;
    r.satisfied = r.deviation <= tolerance;
    return r;
}

QuantumRatioReport verify_quantum_ratio(const QuantumSystem& sys, const EnergyShellProjection& shell,
                                        const ProjectionPair& pair, double tau, double tolerance) {
    if (!sys.tr_symmetric()) throw ContractViolation("the ratio identity needs a time-reversal-symmetric system");
    return compare_quantum_ratio(sys, shell, pair, tau, tolerance);
}

double canonical_ratio(const QuantumSystem& sys, double beta, const ProjectionPair& pair) {
    const ComplexMatrix g = sys.gibbs(beta, sys.eigenvalues().minCoeff());
    const double den = (g * pair.p_ii().cast<cd>()).trace().real();
    if (!(den > 0.0)) throw ContractViolation("canonical weight of P^II is zero");
    return (g * pair.p_i().cast<cd>()).trace().real() / den;
}

double von_neumann_entropy(const ComplexMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double mu = es.eigenvalues()[k];
        if (mu > 0.0) s -= mu * std::log(mu);
    }
    return s;
}

void to_json(nlohmann::json& j, const QuantumEntropyReport& r) {
    j = nlohmann::json{{"s_i", r.s_i},
                       {"s_ii", r.s_ii},
                       {"energy_i", r.energy_i},
                       {"energy_ii", r.energy_ii},
                       {"identity_defect_i", r.identity_defect_i},
                       {"identity_defect_ii", r.identity_defect_ii},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"deviation", r.deviation},
                       {"tolerance", r.tolerance},
                       {"satisfied", r.satisfied}};
}

QuantumEntropyReport verify_quantum_entropy_identity(const QuantumSystem& sys, double beta,
                                                     const ProjectionPair& pair, double tolerance) {
    if (pair.commutator_i() > 1e-10) {
        throw ContractViolation("P^I does not commute with H (||[H, P]|| = " + std::to_string(pair.commutator_i()) +
                                ")");
    }
    if (pair.commutator_ii() > 1e-10) {
        throw ContractViolation("P^II does not commute with H (||[H, P]|| = " +
                                std::to_string(pair.commutator_ii()) + ")");
    }
    const double shift = sys.eigenvalues().minCoeff();
    const ComplexMatrix g = sys.gibbs(beta, shift);
    const auto& h = sys.hamiltonian();
    struct Side {
        double s;
        double energy;
        double defect;
        double log_z;
    };
    auto side = [&](const RealMatrix& p) {
        const ComplexMatrix w = g * p.cast<cd>();
        const double z = w.trace().real();
        if (!(z > 0.0)) throw ContractViolation("restricted canonical weight is zero");
        const ComplexMatrix rho = w / z;
        Side out;
        out.s = von_neumann_entropy(rho);
        out.energy = (rho * h).trace().real();
        out.log_z = std::log(z) - beta * shift;
        out.defect = std::abs(out.s - (out.log_z + beta * out.energy));
        return out;
    };
    const Side a = side(pair.p_i());
    const Side b = side(pair.p_ii());
    QuantumEntropyReport r;
    r.s_i = a.s;
    r.s_ii = b.s;
    r.energy_i = a.energy;
    r.energy_ii = b.energy;
    r.identity_defect_i = a.defect;
    r.identity_defect_ii = b.defect;
    r.lhs = a.log_z - b.log_z;
    r.rhs = a.s - b.s - beta * (a.energy - b.energy);
    r.deviation = std::abs(r.lhs - r.rhs);
    r.tolerance = tolerance;
    r.satisfied = r.deviation <= tolerance && a.defect <= tolerance && b.defect <= tolerance;
    return r;
}

double unitarity_defect(const QuantumSystem& sys, double tau) {
    const ComplexMatrix u = sys.propagator(tau);
    return max_abs(u * u.adjoint() - ComplexMatrix::Identity(sys.dim(), sys.dim()));
}

namespace {

RealMatrix gaussian_matrix(std::size_t d, Philox4x32& rng) {
    RealMatrix a(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) a(i, j) = standard_normal(rng);
    }
    return a;
}

}  // namespace

RealMatrix random_symmetric(std::size_t d, Philox4x32& rng) {
    const RealMatrix a = gaussian_matrix(d, rng);
    return (a + a.transpose()) / (2.0 * std::sqrt(static_cast<double>(d)));
}

ComplexMatrix random_hermitian_broken(std::size_t d, Philox4x32& rng) {
    const RealMatrix a = gaussian_matrix(d, rng);
    const RealMatrix b = gaussian_matrix(d, rng);
    const double s = 2.0 * std::sqrt(static_cast<double>(d));
    ComplexMatrix h(d, d);
    h.real() = (a + a.transpose()) / s;
    h.imag() = (b - b.transpose()) / s;
    return h;
}

std::pair<RealMatrix, RealMatrix> random_orthogonal_projections(std::size_t d, std::size_t rank_i,
                                                                std::size_t rank_ii, Philox4x32& rng) {
    if (rank_i == 0 || rank_ii == 0 || rank_i + rank_ii > d) {
        throw ContractViolation("projection ranks must be positive and fit in the dimension");
    }
    const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(gaussian_matrix(d, rng)).householderQ();
    const auto n1 = static_cast<Eigen::Index>(rank_i);
    const auto n2 = static_cast<Eigen::Index>(rank_ii);
    const RealMatrix a = q.leftCols(n1);
    const RealMatrix b = q.middleCols(n1, n2);
    return {a * a.transpose(), b * b.transpose()};
}

std::pair<RealMatrix, RealMatrix> random_spectral_projections(const QuantumSystem& sys, std::size_t rank_i,
                                                              std::size_t rank_ii, Philox4x32& rng) {
    if (!sys.tr_symmetric()) throw ContractViolation("spectral projections are built for real systems");
    const std::size_t d = sys.dim();
    if (rank_i == 0 || rank_ii == 0 || rank_i + rank_ii > d) {
        throw ContractViolation("projection ranks must be positive and fit in the dimension");
    }
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = d - 1; i > 0; --i) std::swap(idx[i], idx[uniform_index(rng, i + 1)]);
    const RealMatrix v = sys.eigenvectors().real();
    RealMatrix a = RealMatrix::Zero(d, d);
    RealMatrix b = RealMatrix::Zero(d, d);
    for (std::size_t k = 0; k < rank_i; ++k) a += v.col(idx[k]) * v.col(idx[k]).transpose();
    for (std::size_t k = rank_i; k < rank_i + rank_ii; ++k) b += v.col(idx[k]) * v.col(idx[k]).transpose();
    return {a, b};
}

}  // namespace revlab

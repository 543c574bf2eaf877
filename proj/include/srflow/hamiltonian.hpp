#pragma once

#include "srflow/models.hpp"
#include "srflow/phase.hpp"

namespace srflow {

// H = (1/2) sum_i <p, xi_i(q)>^2
CotangentScalar sr_hamiltonian(const Frame& frame);
CotangentScalar sr_hamiltonian(const ModelSpec& model);

struct HamiltonRhs {
    Vec qdot, pdot;
};

// (dH/dp, -dH/dq)
HamiltonRhs hamilton_rhs(const CotangentScalar& H, const PhasePoint& x);

// {F, G} = sum_j (dF/dq_j dG/dp_j - dF/dp_j dG/dq_j)
double poisson_bracket(const CotangentScalar& F, const CotangentScalar& G, const PhasePoint& x);

// Reduced Lie-Poisson flow of 2H = <m, xi1>^2 + <m, xi2>^2; the sign is the
// one realizing {L_v, L_w} = L_{[v,w]} and conserving every Casimir.
Eigen::Vector3d lie_poisson_rhs(const LiePoissonModel& model, const AlgebraPoint& m);

// I_g = (1/2) <p, nu(q)>^2. The 1/2 makes H_extended = H + I_g an identity
// for the frame extended by the Reeb field.
CotangentScalar reeb_momentum(const ModelSpec& model);

struct RiemannianExtension {
    CotangentScalar full;                                // H of (xi_1..xi_k, nu)
    std::function<CotangentScalar(double)> family;       // H + t I_g, t in (0, 1]
};

RiemannianExtension riemannian_extension(const ModelSpec& model);

// max |{I_g, H}| over fixed-seed energy-shell samples.
double reeb_symmetry_check(const ModelSpec& model, int samples, uint64_t seed = 12345);

}  // namespace srflow

#include "srflow/hamiltonian.hpp"

#include <cmath>

namespace srflow {

CotangentScalar sr_hamiltonian(const Frame& frame) {
    std::vector<std::pair<double, CotangentScalar>> terms;
    terms.reserve(static_cast<size_t>(frame.rank()));
    for (int i = 0; i < frame.rank(); ++i)
        terms.emplace_back(1.0, CotangentScalar::half_square(CotangentScalar::momentum(frame.field(i))));
    return CotangentScalar::linear_combination(terms);
}

CotangentScalar sr_hamiltonian(const ModelSpec& model) { return sr_hamiltonian(model.frame); }

HamiltonRhs hamilton_rhs(const CotangentScalar& H, const PhasePoint& x) {
    const int m = H.dim();
    if (x.dim() != m) throw domain_error("hamilton_rhs: dimension mismatch");
    double v;
    Vec g;
    H.eval_grad(x, v, g);
    return {g.tail(m), -g.head(m)};
}

double poisson_bracket(const CotangentScalar& F, const CotangentScalar& G, const PhasePoint& x) {
    if (F.dim() != G.dim()) throw domain_error("poisson_bracket: dimension mismatch");
    const int m = F.dim();
    double fv, gv;
    Vec fg, gg;
    F.eval_grad(x, fv, fg);
    G.eval_grad(x, gv, gg);
    return fg.head(m).dot(gg.tail(m)) - fg.tail(m).dot(gg.head(m));
}

Eigen::Vector3d lie_poisson_rhs(const LiePoissonModel& model, const AlgebraPoint& pt) {
    // dH = Q m for the quadratic Hamiltonian.
    const Eigen::Vector3d dH =
        model.xi1 * model.xi1.dot(pt.m) + model.xi2 * model.xi2.dot(pt.m);
    // mdot_a = {m_a, H} = sum_{j,k} c^k_{aj} m_k dH_j
    Eigen::Vector3d out;
    for (int a = 0; a < 3; ++a) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
            double cj = 0.0;
            for (int k = 0; k < 3; ++k) cj += model.structure[static_cast<size_t>(k)](a, j) * pt.m(k);
            s += cj * dH(j);
        }
        out(a) = s;
    }
    return out;
}

CotangentScalar reeb_momentum(const ModelSpec& model) {
    if (!model.reeb_field) throw domain_error("reeb_momentum: model has no Reeb field");
    return CotangentScalar::half_square(CotangentScalar::momentum(*model.reeb_field));
}

RiemannianExtension riemannian_extension(const ModelSpec& model) {
    if (!model.reeb_field) throw domain_error("riemannian_extension: model has no Reeb field");
    std::vector<VectorField> extended = model.frame.fields();
    extended.push_back(*model.reeb_field);
    RiemannianExtension ext;
    ext.full = sr_hamiltonian(Frame(extended));
    const CotangentScalar base = sr_hamiltonian(model);
    const CotangentScalar ig = reeb_momentum(model);
    ext.family = [base, ig](double t) {
        if (t <= 0.0 || t > 1.0)
            throw domain_error("riemannian_extension family: t must lie in (0, 1]");
        return CotangentScalar::linear_combination({{1.0, base}, {t, ig}});
    };
    return ext;
}

double reeb_symmetry_check(const ModelSpec& model, int samples, uint64_t seed) {
    const CotangentScalar H = sr_hamiltonian(model);
    const CotangentScalar ig = reeb_momentum(model);
    double worst = 0.0;
    for (const PhasePoint& x : sample_energy_shell(model, samples, seed))
        worst = std::max(worst, std::abs(poisson_bracket(ig, H, x)));
    return worst;
}

}  // namespace srflow

#pragma once

#include <random>

#include "srflow/fields.hpp"
#include "srflow/phase.hpp"

namespace srflow::testing {

// Central-difference cross-check of a scalar field's analytic derivatives.
inline void check_field_derivatives(const ScalarField& f, const Vec& q, double step = 1e-6,
                                    double rel = 1e-5) {
    const ScalarEval e = f.eval(q);
    const int m = f.dimension();
    for (int i = 0; i < m; ++i) {
        Vec qp = q, qm = q;
        qp(i) += step;
        qm(i) -= step;
        const double fd = (f.value(qp) - f.value(qm)) / (2.0 * step);
        const double scale = std::max({1.0, std::abs(fd), std::abs(e.grad(i))});
        if (std::abs(fd - e.grad(i)) > rel * scale)
            throw std::runtime_error("gradient cross-check failed");
        const Vec gp = f.eval(qp).grad, gm = f.eval(qm).grad;
        for (int j = 0; j < m; ++j) {
            const double fdh = (gp(j) - gm(j)) / (2.0 * step);
            const double hscale = std::max({1.0, std::abs(fdh), std::abs(e.hess(i, j))});
            if (std::abs(fdh - e.hess(i, j)) > rel * hscale)
                throw std::runtime_error("hessian cross-check failed");
        }
    }
    if ((e.hess - e.hess.transpose()).lpNorm<Eigen::Infinity>() >
        1e-12 * (1.0 + e.hess.lpNorm<Eigen::Infinity>()))
        throw std::runtime_error("hessian not symmetric");
}

inline void check_phase_derivatives(const CotangentScalar& f, const PhasePoint& x,
                                    double step = 1e-6, double rel = 1e-5) {
    const PhaseEval e = f.eval(x);
    const int d = 2 * f.dim();
    const Vec z = x.flat();
    auto value_at = [&](const Vec& w) { return f.value(PhasePoint::from_flat(w)); };
    for (int i = 0; i < d; ++i) {
        Vec zp = z, zm = z;
        zp(i) += step;
        zm(i) -= step;
        const double fd = (value_at(zp) - value_at(zm)) / (2.0 * step);
        const double scale = std::max({1.0, std::abs(fd), std::abs(e.grad(i))});
        if (std::abs(fd - e.grad(i)) > rel * scale)
            throw std::runtime_error("phase gradient cross-check failed");
        const Vec gp = f.eval(PhasePoint::from_flat(zp)).grad;
        const Vec gm = f.eval(PhasePoint::from_flat(zm)).grad;
        for (int j = 0; j < d; ++j) {
            const double fdh = (gp(j) - gm(j)) / (2.0 * step);
            const double hscale = std::max({1.0, std::abs(fdh), std::abs(e.hess(i, j))});
            if (std::abs(fdh - e.hess(i, j)) > rel * hscale)
                throw std::runtime_error("phase hessian cross-check failed");
        }
    }
    if ((e.hess - e.hess.transpose()).lpNorm<Eigen::Infinity>() >
        1e-12 * (1.0 + e.hess.lpNorm<Eigen::Infinity>()))
        throw std::runtime_error("phase hessian not symmetric");
}

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

}  // namespace srflow::testing

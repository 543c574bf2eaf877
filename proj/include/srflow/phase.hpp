#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "srflow/d2.hpp"
#include "srflow/fields.hpp"

namespace srflow {

// Cotangent-bundle state in covering-space coordinates.
struct PhasePoint {
    Vec q, p;

    PhasePoint() = default;
    PhasePoint(Vec q_, Vec p_) : q(std::move(q_)), p(std::move(p_)) {
        if (q.size() != p.size()) throw domain_error("PhasePoint: q/p size mismatch");
        if (!q.allFinite() || !p.allFinite()) throw domain_error("PhasePoint: non-finite entries");
    }

    int dim() const { return static_cast<int>(q.size()); }

    Vec flat() const {
        Vec x(2 * q.size());
        x << q, p;
        return x;
    }
    static PhasePoint from_flat(const Vec& x) {
        const int m = static_cast<int>(x.size()) / 2;
        return PhasePoint(x.head(m), x.tail(m));
    }
};

struct PhaseEval {
    double value = 0.0;
    Vec grad;  // length 2m, (d/dq, d/dp)
    Mat hess;  // 2m x 2m
};

// Direction of a phase gradient together with its log-magnitude. The two are
// reported separately so that gradients with flat (underflowing) prefactors
// still carry usable directions for rank computations.
struct ScaledGradient {
    Vec direction;   // unit or zero
    double log_norm; // -inf when the gradient vanishes identically
};

// Smooth function on T*M with exact phase gradient and Hessian.
class CotangentScalar {
public:
    class Impl {
    public:
        virtual ~Impl() = default;
        virtual int dim() const = 0;  // configuration dimension m
        virtual double value(const PhasePoint& x) const = 0;
        virtual void eval_grad(const PhasePoint& x, double& v, Vec& g) const;
        virtual void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const = 0;
        virtual ScaledGradient scaled_gradient(const PhasePoint& x) const;
    };

    CotangentScalar() = default;
    explicit CotangentScalar(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    bool valid() const { return impl_ != nullptr; }
    int dim() const { return impl_->dim(); }

    double value(const PhasePoint& x) const { return impl_->value(x); }
    void eval_grad(const PhasePoint& x, double& v, Vec& g) const { impl_->eval_grad(x, v, g); }
    PhaseEval eval(const PhasePoint& x) const {
        PhaseEval e;
        impl_->eval_full(x, e.value, e.grad, e.hess);
        return e;
    }
    Vec gradient(const PhasePoint& x) const {
        double v;
        Vec g;
        impl_->eval_grad(x, v, g);
        return g;
    }
    ScaledGradient scaled_gradient(const PhasePoint& x) const { return impl_->scaled_gradient(x); }

    // --- constructors -----------------------------------------------------
    static CotangentScalar constant(int m, double c);
    // q- or p-coordinate as a phase function; index in [0, 2m).
    static CotangentScalar phase_coordinate(int m, int index);
    // P_X(q, p) = <p, X(q)>
    static CotangentScalar momentum(const VectorField& X);
    // (1/2) F^2
    static CotangentScalar half_square(const CotangentScalar& F);
    static CotangentScalar linear_combination(
        const std::vector<std::pair<double, CotangentScalar>>& terms);
    // Generic D2-backed phase function over the 2m variables (q, p).
    static CotangentScalar from_d2(int m, std::function<D2(const std::vector<D2>&)> f);

    friend CotangentScalar operator+(const CotangentScalar& a, const CotangentScalar& b);
    friend CotangentScalar operator*(double c, const CotangentScalar& a);

private:
    std::shared_ptr<const Impl> impl_;
};

// <p, X(q)> as a phase-space function, with derivatives from the field's.
inline CotangentScalar momentum_function(const VectorField& X) {
    return CotangentScalar::momentum(X);
}

// Named first integral attached to a model.
struct NamedIntegral {
    std::string name;
    CotangentScalar function;
};

// Dual-algebra point for Lie-Poisson flows.
struct AlgebraPoint {
    Eigen::Vector3d m;
    AlgebraPoint() : m(Eigen::Vector3d::Zero()) {}
    explicit AlgebraPoint(const Eigen::Vector3d& v) : m(v) {
        if (!m.allFinite()) throw domain_error("AlgebraPoint: non-finite entries");
    }
};

}  // namespace srflow

#include "srflow/phase.hpp"

#include <cmath>
#include <limits>

namespace srflow {

void CotangentScalar::Impl::eval_grad(const PhasePoint& x, double& v, Vec& g) const {
    Mat h;
    eval_full(x, v, g, h);
}

ScaledGradient CotangentScalar::Impl::scaled_gradient(const PhasePoint& x) const {
    double v;
    Vec g;
    eval_grad(x, v, g);
    const double n = g.norm();
    if (n == 0.0)
        return {Vec::Zero(g.size()), -std::numeric_limits<double>::infinity()};
    return {g / n, std::log(n)};
}

namespace {

class ConstantImpl final : public CotangentScalar::Impl {
public:
    ConstantImpl(int m, double c) : m_(m), c_(c) {}
    int dim() const override { return m_; }
    double value(const PhasePoint&) const override { return c_; }
    void eval_grad(const PhasePoint&, double& v, Vec& g) const override {
        v = c_;
        g = Vec::Zero(2 * m_);
    }
    void eval_full(const PhasePoint&, double& v, Vec& g, Mat& h) const override {
        v = c_;
        g = Vec::Zero(2 * m_);
        h = Mat::Zero(2 * m_, 2 * m_);
    }

private:
    int m_;
    double c_;
};

class PhaseCoordinateImpl final : public CotangentScalar::Impl {
public:
    PhaseCoordinateImpl(int m, int idx) : m_(m), idx_(idx) {
        if (idx < 0 || idx >= 2 * m) throw domain_error("phase_coordinate: index out of range");
    }
    int dim() const override { return m_; }
    double value(const PhasePoint& x) const override {
        return idx_ < m_ ? x.q(idx_) : x.p(idx_ - m_);
    }
    void eval_grad(const PhasePoint& x, double& v, Vec& g) const override {
        v = value(x);
        g = Vec::Zero(2 * m_);
        g(idx_) = 1.0;
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        v = value(x);
        g = Vec::Zero(2 * m_);
        g(idx_) = 1.0;
        h = Mat::Zero(2 * m_, 2 * m_);
    }

private:
    int m_, idx_;
};

// <p, X(q)> with derivatives assembled from the field's derivatives.
class MomentumImpl final : public CotangentScalar::Impl {
public:
    explicit MomentumImpl(VectorField X) : X_(std::move(X)) {}
    int dim() const override { return X_.dimension(); }
    double value(const PhasePoint& x) const override { return x.p.dot(X_.value(x.q)); }
    void eval_grad(const PhasePoint& x, double& v, Vec& g) const override {
        const int m = dim();
        Vec xv;
        Mat xj;
        X_.eval(x.q, xv, xj);
        v = x.p.dot(xv);
        g.resize(2 * m);
        g.head(m) = xj.transpose() * x.p;  // d/dq_a = <p, d_a X>
        g.tail(m) = xv;
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        const int m = dim();
        Vec xv;
        Mat xj;
        X_.eval(x.q, xv, xj);
        const auto hs = X_.component_hessians(x.q);
        v = x.p.dot(xv);
        g.resize(2 * m);
        g.head(m) = xj.transpose() * x.p;
        g.tail(m) = xv;
        h = Mat::Zero(2 * m, 2 * m);
        for (int i = 0; i < m; ++i) h.topLeftCorner(m, m) += x.p(i) * hs[static_cast<size_t>(i)];
        h.topRightCorner(m, m) = xj.transpose();
        h.bottomLeftCorner(m, m) = xj;
    }

private:
    VectorField X_;
};

class HalfSquareImpl final : public CotangentScalar::Impl {
public:
    explicit HalfSquareImpl(CotangentScalar F) : F_(std::move(F)) {}
    int dim() const override { return F_.dim(); }
    double value(const PhasePoint& x) const override {
        const double f = F_.value(x);
        return 0.5 * f * f;
    }
    void eval_grad(const PhasePoint& x, double& v, Vec& g) const override {
        double f;
        F_.eval_grad(x, f, g);
        v = 0.5 * f * f;
        g *= f;
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        PhaseEval e = F_.eval(x);
        v = 0.5 * e.value * e.value;
        g = e.value * e.grad;
        h = e.value * e.hess + e.grad * e.grad.transpose();
    }

private:
    CotangentScalar F_;
};

class LinCombImpl final : public CotangentScalar::Impl {
public:
    LinCombImpl(int m, std::vector<std::pair<double, CotangentScalar>> terms)
        : m_(m), terms_(std::move(terms)) {}
    int dim() const override { return m_; }
    double value(const PhasePoint& x) const override {
        double v = 0.0;
        for (const auto& [c, f] : terms_) v += c * f.value(x);
        return v;
    }
    void eval_grad(const PhasePoint& x, double& v, Vec& g) const override {
        v = 0.0;
        g = Vec::Zero(2 * m_);
        double fv;
        Vec fg;
        for (const auto& [c, f] : terms_) {
            f.eval_grad(x, fv, fg);
            v += c * fv;
            g += c * fg;
        }
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        v = 0.0;
        g = Vec::Zero(2 * m_);
        h = Mat::Zero(2 * m_, 2 * m_);
        for (const auto& [c, f] : terms_) {
            PhaseEval e = f.eval(x);
            v += c * e.value;
            g += c * e.grad;
            h += c * e.hess;
        }
    }

private:
    int m_;
    std::vector<std::pair<double, CotangentScalar>> terms_;
};

class D2PhaseImpl final : public CotangentScalar::Impl {
public:
    D2PhaseImpl(int m, std::function<D2(const std::vector<D2>&)> f) : m_(m), f_(std::move(f)) {}
    int dim() const override { return m_; }
    double value(const PhasePoint& x) const override { return f_(D2::variables(x.flat())).v; }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        D2 r = f_(D2::variables(x.flat()));
        v = r.v;
        g = r.g;
        h = r.h;
    }

private:
    int m_;
    std::function<D2(const std::vector<D2>&)> f_;
};

}  // namespace

CotangentScalar CotangentScalar::constant(int m, double c) {
    return CotangentScalar(std::make_shared<ConstantImpl>(m, c));
}
CotangentScalar CotangentScalar::phase_coordinate(int m, int index) {
    return CotangentScalar(std::make_shared<PhaseCoordinateImpl>(m, index));
}
CotangentScalar CotangentScalar::momentum(const VectorField& X) {
    return CotangentScalar(std::make_shared<MomentumImpl>(X));
}
CotangentScalar CotangentScalar::half_square(const CotangentScalar& F) {
    return CotangentScalar(std::make_shared<HalfSquareImpl>(F));
}
CotangentScalar CotangentScalar::linear_combination(
    const std::vector<std::pair<double, CotangentScalar>>& terms) {
    if (terms.empty()) throw domain_error("linear_combination: empty");
    const int m = terms.front().second.dim();
    for (const auto& [c, f] : terms)
        if (f.dim() != m) throw domain_error("linear_combination: dimension mismatch");
    return CotangentScalar(std::make_shared<LinCombImpl>(m, terms));
}
CotangentScalar CotangentScalar::from_d2(int m, std::function<D2(const std::vector<D2>&)> f) {
    return CotangentScalar(std::make_shared<D2PhaseImpl>(m, std::move(f)));
}

CotangentScalar operator+(const CotangentScalar& a, const CotangentScalar& b) {
    return CotangentScalar::linear_combination({{1.0, a}, {1.0, b}});
}
CotangentScalar operator*(double c, const CotangentScalar& a) {
    return CotangentScalar::linear_combination({{c, a}});
}

}  // namespace srflow

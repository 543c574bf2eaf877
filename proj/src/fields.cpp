#include "srflow/fields.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace srflow {

void ScalarField::Impl::eval(const Vec& q, double& v, Vec& g) const {
    Mat h;
    eval(q, v, g, h);
}

std::shared_ptr<const ScalarField::Impl> ScalarField::Impl::partial(int) const {
    throw domain_error("ScalarField: exact partial derivative not available for this field");
}

namespace {

class ConstantImpl final : public ScalarField::Impl {
public:
    ConstantImpl(int m, double c) : m_(m), c_(c) {}
    int dimension() const override { return m_; }
    double value(const Vec&) const override { return c_; }
    void eval(const Vec&, double& v, Vec& g) const override {
        v = c_;
        g = Vec::Zero(m_);
    }
    void eval(const Vec&, double& v, Vec& g, Mat& h) const override {
        v = c_;
        g = Vec::Zero(m_);
        h = Mat::Zero(m_, m_);
    }
    std::shared_ptr<const Impl> partial(int) const override {
        return std::make_shared<ConstantImpl>(m_, 0.0);
    }

private:
    int m_;
    double c_;
};

class CoordinateImpl final : public ScalarField::Impl {
public:
    CoordinateImpl(int m, int j) : m_(m), j_(j) {
        if (j < 0 || j >= m) throw domain_error("coordinate index out of range");
    }
    int dimension() const override { return m_; }
    double value(const Vec& q) const override { return q(j_); }
    void eval(const Vec& q, double& v, Vec& g) const override {
        v = q(j_);
        g = Vec::Zero(m_);
        g(j_) = 1.0;
    }
    void eval(const Vec& q, double& v, Vec& g, Mat& h) const override {
        eval(q, v, g);
        h = Mat::Zero(m_, m_);
    }
    std::shared_ptr<const Impl> partial(int j) const override {
        return std::make_shared<ConstantImpl>(m_, j == j_ ? 1.0 : 0.0);
    }

private:
    int m_, j_;
};

std::vector<double> poly_derivative(const std::vector<double>& p) {
    std::vector<double> d;
    for (size_t i = 1; i < p.size(); ++i) d.push_back(static_cast<double>(i) * p[i]);
    return d;
}

std::vector<double> poly_add(std::vector<double> a, const std::vector<double>& b, double s) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
    return a;
}

double poly_eval(const std::vector<double>& p, double t) {
    double r = 0.0;
    for (size_t i = p.size(); i-- > 0;) r = r * t + p[i];
    return r;
}

// f(t) = e^{a t} (P(t) cos(w t) + Q(t) sin(w t)) in variable q_var. Closed
// under d/dt, which keeps arbitrary-depth commutators exact.
class UnivariateImpl final : public ScalarField::Impl {
public:
    UnivariateImpl(int m, int var, double a, double w, std::vector<double> P,
                   std::vector<double> Q)
        : m_(m), var_(var), a_(a), w_(w), P_(std::move(P)), Q_(std::move(Q)) {
        if (var < 0 || var >= m) throw domain_error("univariate field: variable out of range");
    }
    int dimension() const override { return m_; }

    double raw(double t) const {
        double f = poly_eval(P_, t) * std::cos(w_ * t) + poly_eval(Q_, t) * std::sin(w_ * t);
        return a_ == 0.0 ? f : f * std::exp(a_ * t);
    }
    std::shared_ptr<UnivariateImpl> derivative() const {
        // d/dt: P -> aP + P' + wQ, Q -> aQ + Q' - wP
        std::vector<double> nP = poly_add(poly_add(poly_derivative(P_), P_, a_), Q_, w_);
        std::vector<double> nQ = poly_add(poly_add(poly_derivative(Q_), Q_, a_), P_, -w_);
        return std::make_shared<UnivariateImpl>(m_, var_, a_, w_, std::move(nP), std::move(nQ));
    }

    double value(const Vec& q) const override { return raw(q(var_)); }
    void eval(const Vec& q, double& v, Vec& g) const override {
        v = raw(q(var_));
        g = Vec::Zero(m_);
        g(var_) = derivative()->raw(q(var_));
    }
    void eval(const Vec& q, double& v, Vec& g, Mat& h) const override {
        auto d1 = derivative();
        v = raw(q(var_));
        g = Vec::Zero(m_);
        g(var_) = d1->raw(q(var_));
        h = Mat::Zero(m_, m_);
        h(var_, var_) = d1->derivative()->raw(q(var_));
    }
    std::shared_ptr<const Impl> partial(int j) const override {
        if (j == var_) return derivative();
        return std::make_shared<ConstantImpl>(m_, 0.0);
    }

private:
    int m_, var_;
    double a_, w_;
    std::vector<double> P_, Q_;
};

class LinCombImpl final : public ScalarField::Impl {
public:
    LinCombImpl(int m, std::vector<std::pair<double, ScalarField>> terms)
        : m_(m), terms_(std::move(terms)) {}
    int dimension() const override { return m_; }
    double value(const Vec& q) const override {
        double v = 0.0;
        for (const auto& [c, f] : terms_) v += c * f.value(q);
        return v;
    }
    void eval(const Vec& q, double& v, Vec& g) const override {
        v = 0.0;
        g = Vec::Zero(m_);
        double fv;
        Vec fg;
        for (const auto& [c, f] : terms_) {
            f.eval(q, fv, fg);
            v += c * fv;
            g += c * fg;
        }
    }
    void eval(const Vec& q, double& v, Vec& g, Mat& h) const override {
        v = 0.0;
        g = Vec::Zero(m_);
        h = Mat::Zero(m_, m_);
        for (const auto& [c, f] : terms_) {
            ScalarEval e = f.eval(q);
            v += c * e.value;
            g += c * e.grad;
            h += c * e.hess;
        }
    }
    std::shared_ptr<const Impl> partial(int j) const override {
        std::vector<std::pair<double, ScalarField>> d;
        d.reserve(terms_.size());
        for (const auto& [c, f] : terms_) d.emplace_back(c, f.partial(j));
        return std::make_shared<LinCombImpl>(m_, std::move(d));
    }

private:
    int m_;
    std::vector<std::pair<double, ScalarField>> terms_;
};

class ProductImpl final : public ScalarField::Impl {
public:
    ProductImpl(ScalarField a, ScalarField b) : a_(std::move(a)), b_(std::move(b)) {}
    int dimension() const override { return a_.dimension(); }
    double value(const Vec& q) const override { return a_.value(q) * b_.value(q); }
    void eval(const Vec& q, double& v, Vec& g) const override {
        double av, bv;
        Vec ag, bg;
        a_.eval(q, av, ag);
        b_.eval(q, bv, bg);
        v = av * bv;
        g = av * bg + bv * ag;
    }
    void eval(const Vec& q, double& v, Vec& g, Mat& h) const override {
        ScalarEval ea = a_.eval(q), eb = b_.eval(q);
        v = ea.value * eb.value;
        g = ea.value * eb.grad + eb.value * ea.grad;
        h = ea.value * eb.hess + eb.value * ea.hess + ea.grad * eb.grad.transpose() +
            eb.grad * ea.grad.transpose();
    }
    std::shared_ptr<const Impl> partial(int j) const override {
        std::vector<std::pair<double, ScalarField>> terms;
        terms.emplace_back(1.0, a_.partial(j) * b_);
        terms.emplace_back(1.0, a_ * b_.partial(j));
        return std::make_shared<LinCombImpl>(a_.dimension(), std::move(terms));
    }

private:
    ScalarField a_, b_;
};

class PowerProductImpl final : public ScalarField::Impl {
public:
    PowerProductImpl(int m, double c, std::vector<double> e) : m_(m), c_(c), e_(std::move(e)) {
        if (static_cast<int>(e_.size()) != m) throw domain_error("power_product: exponent count");
    }
    int dimension() const override { return m_; }
    double value(const Vec& q) const override {
        double v = c_;
        for (int i = 0; i < m_; ++i)
            if (e_[static_cast<size_t>(i)] != 0.0) v *= std::pow(q(i), e_[static_cast<size_t>(i)]);
        return v;
    }
    void eval(const Vec& q, double& v, Vec& g) const override {
        v = value(q);
        g = Vec::Zero(m_);
        for (int i = 0; i < m_; ++i)
            if (e_[static_cast<size_t>(i)] != 0.0) g(i) = v * e_[static_cast<size_t>(i)] / q(i);
    }
    void eval(const Vec& q, double& v, Vec& g, Mat& h) const override {
        eval(q, v, g);
        h = Mat::Zero(m_, m_);
        for (int i = 0; i < m_; ++i) {
            const double ei = e_[static_cast<size_t>(i)];
            if (ei == 0.0) continue;
            for (int j = 0; j < m_; ++j) {
                const double ej = e_[static_cast<size_t>(j)];
                if (ej == 0.0) continue;
                h(i, j) = (i == j) ? v * ei * (ei - 1.0) / (q(i) * q(i))
                                   : v * ei * ej / (q(i) * q(j));
            }
        }
    }

private:
    int m_;
    double c_;
    std::vector<double> e_;
};

class D2Impl final : public ScalarField::Impl {
public:
    D2Impl(int m, std::function<D2(const std::vector<D2>&)> f) : m_(m), f_(std::move(f)) {}
    int dimension() const override { return m_; }
    double value(const Vec& q) const override { return f_(D2::variables(q)).v; }
    void eval(const Vec& q, double& v, Vec& g, Mat& h) const override {
        D2 r = f_(D2::variables(q));
        v = r.v;
        g = r.g;
        h = r.h;
    }

private:
    int m_;
    std::function<D2(const std::vector<D2>&)> f_;
};

}  // namespace

ScalarField ScalarField::constant(int m, double c) {
    return ScalarField(std::make_shared<ConstantImpl>(m, c));
}
ScalarField ScalarField::coordinate(int m, int j) {
    return ScalarField(std::make_shared<CoordinateImpl>(m, j));
}
ScalarField ScalarField::univariate(int m, int var, double a, double w, std::vector<double> P,
                                    std::vector<double> Q) {
    return ScalarField(std::make_shared<UnivariateImpl>(m, var, a, w, std::move(P), std::move(Q)));
}
ScalarField ScalarField::exp_linear(int m, int var, double rate, double amp) {
    return univariate(m, var, rate, 0.0, {amp}, {});
}
ScalarField ScalarField::cosine(int m, int var, double freq, double amp) {
    return univariate(m, var, 0.0, freq, {amp}, {});
}
ScalarField ScalarField::sine(int m, int var, double freq, double amp) {
    return univariate(m, var, 0.0, freq, {}, {amp});
}
ScalarField ScalarField::polynomial(int m, int var, std::vector<double> coeffs) {
    return univariate(m, var, 0.0, 0.0, std::move(coeffs), {});
}
ScalarField ScalarField::power_product(int m, double c, std::vector<double> exponents) {
    return ScalarField(std::make_shared<PowerProductImpl>(m, c, std::move(exponents)));
}
ScalarField ScalarField::from_d2(int m, std::function<D2(const std::vector<D2>&)> f) {
    return ScalarField(std::make_shared<D2Impl>(m, std::move(f)));
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    if (a.dimension() != b.dimension()) throw domain_error("field sum: dimension mismatch");
    return ScalarField::linear_combination({{1.0, a}, {1.0, b}});
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    if (a.dimension() != b.dimension()) throw domain_error("field diff: dimension mismatch");
    return ScalarField::linear_combination({{1.0, a}, {-1.0, b}});
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    if (a.dimension() != b.dimension()) throw domain_error("field product: dimension mismatch");
    return ScalarField(std::make_shared<ProductImpl>(a, b));
}
ScalarField operator*(double c, const ScalarField& a) {
    return ScalarField::linear_combination({{c, a}});
}
ScalarField ScalarField::linear_combination(
    const std::vector<std::pair<double, ScalarField>>& terms) {
    if (terms.empty()) throw domain_error("linear_combination: empty");
    const int m = terms.front().second.dimension();
    for (const auto& [c, f] : terms)
        if (f.dimension() != m) throw domain_error("linear_combination: dimension mismatch");
    return ScalarField(std::make_shared<LinCombImpl>(m, terms));
}

// --- VectorField ------------------------------------------------------------

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
    if (components_.empty()) throw domain_error("VectorField: no components");
    const int m = static_cast<int>(components_.size());
    for (const auto& c : components_)
        if (c.dimension() != m)
            throw domain_error("VectorField: component dimension must equal component count");
}

Vec VectorField::value(const Vec& q) const {
    const int m = dimension();
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = components_[static_cast<size_t>(i)].value(q);
    return v;
}

Mat VectorField::jacobian(const Vec& q) const {
    const int m = dimension();
    Mat J(m, m);
    double v;
    Vec g;
    for (int i = 0; i < m; ++i) {
        components_[static_cast<size_t>(i)].eval(q, v, g);
        J.row(i) = g.transpose();
    }
    return J;
}

void VectorField::eval(const Vec& q, Vec& val, Mat& jac) const {
    const int m = dimension();
    val.resize(m);
    jac.resize(m, m);
    double v;
    Vec g;
    for (int i = 0; i < m; ++i) {
        components_[static_cast<size_t>(i)].eval(q, v, g);
        val(i) = v;
        jac.row(i) = g.transpose();
    }
}

std::vector<Mat> VectorField::component_hessians(const Vec& q) const {
    std::vector<Mat> hs;
    hs.reserve(components_.size());
    for (const auto& c : components_) hs.push_back(c.eval(q).hess);
    return hs;
}

VectorField VectorField::basis(int m, int i) {
    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) comps.push_back(ScalarField::constant(m, j == i ? 1.0 : 0.0));
    return VectorField(std::move(comps));
}

VectorField VectorField::constant(int m, const Vec& v) {
    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) comps.push_back(ScalarField::constant(m, v(j)));
    return VectorField(std::move(comps));
}

VectorField VectorField::zero(int m) { return constant(m, Vec::Zero(m)); }

VectorField operator+(const VectorField& a, const VectorField& b) {
    if (a.dimension() != b.dimension()) throw domain_error("vector field sum: dimension mismatch");
    std::vector<ScalarField> comps;
    for (int i = 0; i < a.dimension(); ++i) comps.push_back(a.component(i) + b.component(i));
    return VectorField(std::move(comps));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
    if (a.dimension() != b.dimension()) throw domain_error("vector field diff: dimension mismatch");
    std::vector<ScalarField> comps;
    for (int i = 0; i < a.dimension(); ++i) comps.push_back(a.component(i) - b.component(i));
    return VectorField(std::move(comps));
}

VectorField VectorField::scaled(double c) const {
    std::vector<ScalarField> comps;
    for (const auto& f : components_)
        comps.push_back(ScalarField::linear_combination({{c, f}}));
    return VectorField(std::move(comps));
}

VectorField VectorField::scaled(const ScalarField& f) const {
    std::vector<ScalarField> comps;
    for (const auto& c : components_) comps.push_back(f * c);
    return VectorField(std::move(comps));
}

// --- OneFormField -----------------------------------------------------------

OneFormField::OneFormField(std::vector<ScalarField> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw domain_error("OneFormField: no components");
    const int m = static_cast<int>(components_.size());
    for (const auto& c : components_)
        if (c.dimension() != m)
            throw domain_error("OneFormField: component dimension must equal component count");
}

Vec OneFormField::value(const Vec& q) const {
    const int m = dimension();
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = components_[static_cast<size_t>(i)].value(q);
    return v;
}

double OneFormField::pairing(const VectorField& X, const Vec& q) const {
    if (X.dimension() != dimension()) throw domain_error("pairing: dimension mismatch");
    return value(q).dot(X.value(q));
}

OneFormField OneFormField::constant(int m, const Vec& v) {
    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) comps.push_back(ScalarField::constant(m, v(j)));
    return OneFormField(std::move(comps));
}

// --- Frame ------------------------------------------------------------------

Frame::Frame(std::vector<VectorField> fields) : fields_(std::move(fields)) {
    if (fields_.empty()) throw domain_error("Frame: empty");
    const int m = fields_.front().dimension();
    if (static_cast<int>(fields_.size()) > m) throw domain_error("Frame: rank exceeds dimension");
    for (const auto& f : fields_)
        if (f.dimension() != m) throw domain_error("Frame: mixed dimensions");
}

double Frame::smallest_singular_value(const Vec& q) const {
    Mat M(rank(), dimension());
    for (int i = 0; i < rank(); ++i) M.row(i) = fields_[static_cast<size_t>(i)].value(q).transpose();
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues().tail(1)(0);
}

// --- operations ---------------------------------------------------------------

Vec commutator(const VectorField& X, const VectorField& Y, const Vec& q) {
    if (X.dimension() != Y.dimension()) throw domain_error("commutator: dimension mismatch");
    Vec xv, yv;
    Mat xj, yj;
    X.eval(q, xv, xj);
    Y.eval(q, yv, yj);
    return yj * xv - xj * yv;
}

VectorField commutator_field(const VectorField& X, const VectorField& Y) {
    if (X.dimension() != Y.dimension()) throw domain_error("commutator: dimension mismatch");
    const int m = X.dimension();
    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<double, ScalarField>> terms;
        for (int j = 0; j < m; ++j) {
            terms.emplace_back(1.0, X.component(j) * Y.component(i).partial(j));
            terms.emplace_back(-1.0, Y.component(j) * X.component(i).partial(j));
        }
        comps.push_back(ScalarField::linear_combination(terms));
    }
    return VectorField(std::move(comps));
}

double exterior_two_form(const OneFormField& alpha, const VectorField& X, const VectorField& Y,
                         const Vec& q) {
    const int m = alpha.dimension();
    if (X.dimension() != m || Y.dimension() != m)
        throw domain_error("exterior_two_form: dimension mismatch");
    const Vec xv = X.value(q), yv = Y.value(q);
    double r = 0.0;
    double av;
    Vec ag;
    for (int j = 0; j < m; ++j) {
        alpha.component(j).eval(q, av, ag);
        r += ag.dot(xv) * yv(j) - ag.dot(yv) * xv(j);
    }
    return r;
}

BracketSpanResult bracket_generating_check(const Frame& frame, const Vec& q, int max_depth) {
    if (max_depth < 1) throw domain_error("bracket_generating_check: max_depth must be >= 1");
    const int m = frame.dimension();

    std::vector<VectorField> accumulated = frame.fields();
    size_t prev_start = 0;

    auto spans = [&]() {
        Mat M(m, static_cast<int>(accumulated.size()));
        for (size_t i = 0; i < accumulated.size(); ++i)
            M.col(static_cast<int>(i)) = accumulated[i].value(q);
        Eigen::JacobiSVD<Mat> svd(M);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > kSpanThreshold * sv(0)) ++rank;
        return rank == m;
    };

    if (spans()) return {true, 1};
    for (int depth = 2; depth <= max_depth; ++depth) {
        const size_t old_size = accumulated.size();
        for (size_t i = 0; i < old_size; ++i) {
            // New brackets must involve at least one field from the previous
            // generation, otherwise they were already considered.
            const size_t j_begin = std::max(prev_start, i + 1);
            for (size_t j = j_begin; j < old_size; ++j)
                accumulated.push_back(commutator_field(accumulated[i], accumulated[j]));
        }
        prev_start = old_size;
        if (spans()) return {true, depth};
        if (accumulated.size() > 256)
            throw numerical_error("bracket_generating_check: bracket list growth exceeded budget");
    }
    return {false, max_depth};
}

}  // namespace srflow

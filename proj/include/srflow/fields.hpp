#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "srflow/d2.hpp"
#include "srflow/errors.hpp"

namespace srflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ScalarEval {
    double value = 0.0;
    Vec grad;
    Mat hess;
};

// Smooth function on configuration space with exact first and second
// derivatives. Catalog fields are built from closed-form pieces that stay
// closed under differentiation, so nested commutators remain exact;
// user-supplied fields go through the D2 forward-mode path.
class ScalarField {
public:
    class Impl {
    public:
        virtual ~Impl() = default;
        virtual int dimension() const = 0;
        virtual double value(const Vec& q) const = 0;
        virtual void eval(const Vec& q, double& v, Vec& g) const;
        virtual void eval(const Vec& q, double& v, Vec& g, Mat& h) const = 0;
        // Exact derivative field d/dq_j; not every implementation supports it.
        virtual std::shared_ptr<const Impl> partial(int j) const;
    };

    ScalarField() = default;
    explicit ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    bool valid() const { return impl_ != nullptr; }
    int dimension() const { return impl_->dimension(); }

    double value(const Vec& q) const { return impl_->value(q); }
    void eval(const Vec& q, double& v, Vec& g) const { impl_->eval(q, v, g); }
    ScalarEval eval(const Vec& q) const {
        ScalarEval e;
        impl_->eval(q, e.value, e.grad, e.hess);
        return e;
    }
    Vec gradient(const Vec& q) const {
        double v;
        Vec g;
        impl_->eval(q, v, g);
        return g;
    }

    // Exact field of the j-th partial derivative.
    ScalarField partial(int j) const { return ScalarField(impl_->partial(j)); }

    // --- constructors -----------------------------------------------------
    static ScalarField constant(int m, double c);
    static ScalarField coordinate(int m, int j);
    // e^{a t} (P(t) cos(w t) + Q(t) sin(w t)) in the single variable q_var,
    // with P, Q polynomial coefficient lists (lowest degree first). This
    // family is closed under d/dt, so partials are exact at every order.
    static ScalarField univariate(int m, int var, double a, double w,
                                  std::vector<double> P, std::vector<double> Q);
    static ScalarField exp_linear(int m, int var, double rate, double amp = 1.0);
    static ScalarField cosine(int m, int var, double freq, double amp = 1.0);
    static ScalarField sine(int m, int var, double freq, double amp = 1.0);
    static ScalarField polynomial(int m, int var, std::vector<double> coeffs);
    // c * prod_i q_i^{e_i} on the open orthant where every q_i with e_i != 0
    // is positive.
    static ScalarField power_product(int m, double c, std::vector<double> exponents);
    // Generic D2-backed field; partial() is unavailable for it.
    static ScalarField from_d2(int m, std::function<D2(const std::vector<D2>&)> f);

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(double c, const ScalarField& a);

    static ScalarField linear_combination(const std::vector<std::pair<double, ScalarField>>& terms);

    std::shared_ptr<const Impl> impl() const { return impl_; }

private:
    std::shared_ptr<const Impl> impl_;
};

// Coordinate-frame vector field: m coefficient ScalarFields.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(std::vector<ScalarField> components);

    int dimension() const { return static_cast<int>(components_.size()); }
    const ScalarField& component(int i) const { return components_[static_cast<size_t>(i)]; }

    Vec value(const Vec& q) const;
    // J(i,j) = d X_i / d q_j
    Mat jacobian(const Vec& q) const;
    void eval(const Vec& q, Vec& val, Mat& jac) const;
    // Hessians of every component, for momentum-function second derivatives.
    std::vector<Mat> component_hessians(const Vec& q) const;

    static VectorField basis(int m, int i);
    static VectorField constant(int m, const Vec& v);
    static VectorField zero(int m);

    friend VectorField operator+(const VectorField& a, const VectorField& b);
    friend VectorField operator-(const VectorField& a, const VectorField& b);
    VectorField scaled(double c) const;
    VectorField scaled(const ScalarField& f) const;

private:
    std::vector<ScalarField> components_;
};

// 1-form with m coefficient ScalarFields in the same chart.
class OneFormField {
public:
    OneFormField() = default;
    explicit OneFormField(std::vector<ScalarField> components);

    int dimension() const { return static_cast<int>(components_.size()); }
    const ScalarField& component(int i) const { return components_[static_cast<size_t>(i)]; }

    Vec value(const Vec& q) const;
    double pairing(const VectorField& X, const Vec& q) const;

    static OneFormField constant(int m, const Vec& v);

private:
    std::vector<ScalarField> components_;
};

// Ordered list of k <= m pointwise independent vector fields.
class Frame {
public:
    Frame() = default;
    explicit Frame(std::vector<VectorField> fields);

    int rank() const { return static_cast<int>(fields_.size()); }
    int dimension() const { return fields_.empty() ? 0 : fields_.front().dimension(); }
    const VectorField& field(int i) const { return fields_[static_cast<size_t>(i)]; }
    const std::vector<VectorField>& fields() const { return fields_; }

    // Smallest singular value of the k x m coefficient matrix at q.
    double smallest_singular_value(const Vec& q) const;

private:
    std::vector<VectorField> fields_;
};

// --- operations -----------------------------------------------------------

// [X, Y](q) = DY(q) X(q) - DX(q) Y(q)
Vec commutator(const VectorField& X, const VectorField& Y, const Vec& q);

// [X, Y] as an exact field (requires partial() support on the coefficients).
VectorField commutator_field(const VectorField& X, const VectorField& Y);

// d(alpha)(X, Y)(q) evaluated from exact coefficient derivatives.
double exterior_two_form(const OneFormField& alpha, const VectorField& X,
                         const VectorField& Y, const Vec& q);

struct BracketSpanResult {
    bool spans = false;
    int depth = 0;
};

// Appends commutators of accumulated fields until the span reaches R^m at q
// or max_depth is exhausted.
BracketSpanResult bracket_generating_check(const Frame& frame, const Vec& q, int max_depth);

// Relative singular-value threshold shared by frame independence and span
// checks.
inline constexpr double kSpanThreshold = 1e-10;

}  // namespace srflow

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "srflow/errors.hpp"

namespace srflow {

// Second-order forward-mode value: carries f, grad f and the full Hessian
// through arithmetic. Used for user-supplied fields and the momentum-space
// integrals whose closed-form Hessians are unpleasant to hand-code.
class D2 {
public:
    double v = 0.0;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;

    D2() = default;
    D2(double value, int n)
        : v(value), g(Eigen::VectorXd::Zero(n)), h(Eigen::MatrixXd::Zero(n, n)) {}

    static D2 constant(double c, int n) { return D2(c, n); }
    static D2 variable(double x, int i, int n) {
        D2 d(x, n);
        d.g(i) = 1.0;
        return d;
    }
    static std::vector<D2> variables(const Eigen::VectorXd& x) {
        std::vector<D2> out;
        out.reserve(static_cast<size_t>(x.size()));
        for (int i = 0; i < x.size(); ++i)
            out.push_back(variable(x(i), i, static_cast<int>(x.size())));
        return out;
    }

    int dim() const { return static_cast<int>(g.size()); }

    D2 operator-() const {
        D2 r(*this);
        r.v = -r.v;
        r.g = -r.g;
        r.h = -r.h;
        return r;
    }

    friend D2 operator+(const D2& a, const D2& b) {
        D2 r(a);
        r.v += b.v;
        r.g += b.g;
        r.h += b.h;
        return r;
    }
    friend D2 operator-(const D2& a, const D2& b) {
        D2 r(a);
        r.v -= b.v;
        r.g -= b.g;
        r.h -= b.h;
        return r;
    }
    friend D2 operator*(const D2& a, const D2& b) {
        D2 r(a.v * b.v, a.dim());
        r.g = a.v * b.g + b.v * a.g;
        r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
        return r;
    }
    friend D2 operator/(const D2& a, const D2& b) { return a * inverse(b); }

    friend D2 operator+(const D2& a, double c) { D2 r(a); r.v += c; return r; }
    friend D2 operator+(double c, const D2& a) { return a + c; }
    friend D2 operator-(const D2& a, double c) { D2 r(a); r.v -= c; return r; }
    friend D2 operator-(double c, const D2& a) { return -a + c; }
    friend D2 operator*(const D2& a, double c) {
        D2 r(a);
        r.v *= c;
        r.g *= c;
        r.h *= c;
        return r;
    }
    friend D2 operator*(double c, const D2& a) { return a * c; }
    friend D2 operator/(const D2& a, double c) { return a * (1.0 / c); }
    friend D2 operator/(double c, const D2& a) { return inverse(a) * c; }

    // Chain rule for a univariate map with derivatives f', f''.
    static D2 compose(const D2& u, double f, double df, double ddf) {
        D2 r(f, u.dim());
        r.g = df * u.g;
        r.h = df * u.h + ddf * (u.g * u.g.transpose());
        return r;
    }

    friend D2 inverse(const D2& a) {
        const double iv = 1.0 / a.v;
        return compose(a, iv, -iv * iv, 2.0 * iv * iv * iv);
    }
    friend D2 sin(const D2& a) { return compose(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
    friend D2 cos(const D2& a) { return compose(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
    friend D2 exp(const D2& a) {
        const double e = std::exp(a.v);
        return compose(a, e, e, e);
    }
    friend D2 log(const D2& a) {
        return compose(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
    }
    friend D2 log_abs(const D2& a) {
        return compose(a, std::log(std::abs(a.v)), 1.0 / a.v, -1.0 / (a.v * a.v));
    }
    friend D2 sqrt(const D2& a) {
        const double s = std::sqrt(a.v);
        return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
    }
    friend D2 pow(const D2& a, double e) {
        const double f = std::pow(a.v, e);
        return compose(a, f, e * f / a.v, e * (e - 1.0) * f / (a.v * a.v));
    }
    friend D2 atan2(const D2& y, const D2& x) {
        const double r2 = x.v * x.v + y.v * y.v;
        if (r2 == 0.0) throw numerical_error("atan2: undefined at the origin");
        const double ty = x.v / r2;        // d/dy
        const double tx = -y.v / r2;       // d/dx
        const double r4 = r2 * r2;
        const double tyy = -2.0 * x.v * y.v / r4;
        const double txy = (y.v * y.v - x.v * x.v) / r4;
        const double txx = 2.0 * x.v * y.v / r4;
        D2 r(std::atan2(y.v, x.v), y.dim());
        r.g = ty * y.g + tx * x.g;
        r.h = ty * y.h + tx * x.h + tyy * (y.g * y.g.transpose()) +
              txy * (y.g * x.g.transpose() + x.g * y.g.transpose()) +
              txx * (x.g * x.g.transpose());
        return r;
    }
};

// Width of the interval around 0 on which exp(-1/x^2) is treated as exactly
// zero: for |x| below the cutoff the true value underflows double precision.
inline constexpr double kFlatCutoff = 0.0367;

// exp(-1/x^2) extended by zero across x = 0 (a C-infinity flat function).
inline D2 flat_factor(const D2& x) {
    if (std::abs(x.v) <= kFlatCutoff) return D2(0.0, x.dim());
    const double ix2 = 1.0 / (x.v * x.v);
    const double f = std::exp(-ix2);
    const double df = f * 2.0 * ix2 / x.v;                       // f * 2 x^-3
    const double ddf = f * (4.0 * ix2 * ix2 * ix2 - 6.0 * ix2 * ix2);
    return D2::compose(x, f, df, ddf);
}

inline double flat_factor(double x) {
    if (std::abs(x) <= kFlatCutoff) return 0.0;
    return std::exp(-1.0 / (x * x));
}

}  // namespace srflow

#include "srflow/abnormal.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "srflow/hamiltonian.hpp"

namespace srflow {

ConstraintManifold::ConstraintManifold(const ModelSpec& model)
    : model_(&model), m_(model.dimension), k_(model.frame.rank()) {
    for (int i = 0; i < k_; ++i)
        constraints_.push_back(CotangentScalar::momentum(model.frame.field(i)));
}

Vec ConstraintManifold::constraint_values(const PhasePoint& x) const {
    Vec c(k_);
    for (int i = 0; i < k_; ++i) c(i) = constraints_[static_cast<size_t>(i)].value(x);
    return c;
}

Mat ConstraintManifold::constraint_jacobian(const PhasePoint& x) const {
    Mat J(k_, 2 * m_);
    double v;
    Vec g;
    for (int i = 0; i < k_; ++i) {
        constraints_[static_cast<size_t>(i)].eval_grad(x, v, g);
        J.row(i) = g.transpose();
    }
    return J;
}

Mat ConstraintManifold::tangent_basis(const PhasePoint& x) const {
    const Mat J = constraint_jacobian(x);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0))
        throw numerical_error("tangent_basis: constraint gradients are rank deficient");
    return svd.matrixV().rightCols(2 * m_ - k_);
}

Mat ConstraintManifold::tangent_basis_aligned(const PhasePoint& x, const Mat& reference) const {
    const Mat B = tangent_basis(x);
    // Procrustes rotation of the null basis onto the reference columns keeps
    // the orientation (and so the Pfaffian sign) continuous along curves.
    Eigen::JacobiSVD<Mat> svd(B.transpose() * reference,
                              Eigen::ComputeFullU | Eigen::ComputeFullV);
    return B * (svd.matrixU() * svd.matrixV().transpose());
}

Mat restricted_canonical_form(const Mat& basis) {
    const int two_m = static_cast<int>(basis.rows());
    const int m = two_m / 2;
    const int r = static_cast<int>(basis.cols());
    Mat K(r, r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            const auto u = basis.col(i);
            const auto w = basis.col(j);
            K(i, j) = u.head(m).dot(w.tail(m)) - u.tail(m).dot(w.head(m));
        }
    }
    return K;
}

int ConstraintManifold::restricted_form_rank(const PhasePoint& x) const {
    const Mat K = restricted_canonical_form(tangent_basis(x));
    Eigen::JacobiSVD<Mat> svd(K);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-9 * sv(0)) ++rank;
    return rank - rank % 2;  // skew singular values pair up
}

double pfaffian(const Mat& A) {
    const int n = static_cast<int>(A.rows());
    if (n % 2 != 0) throw domain_error("pfaffian: odd dimension");
    if (n == 0) return 1.0;
    if (n == 2) return A(0, 1);
    double s = 0.0;
    for (int j = 1; j < n; ++j) {
        // remove rows/cols 0 and j
        Mat sub(n - 2, n - 2);
        int rr = 0;
        for (int r = 1; r < n; ++r) {
            if (r == j) continue;
            int cc = 0;
            for (int c = 1; c < n; ++c) {
                if (c == j) continue;
                sub(rr, cc) = A(r, c);
                ++cc;
            }
            ++rr;
        }
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        s += sign * A(0, j) * pfaffian(sub);
    }
    return s;
}

double ConstraintManifold::pfaffian(const PhasePoint&, const Mat& basis) const {
    return srflow::pfaffian(restricted_canonical_form(basis));
}

PhasePoint ConstraintManifold::project(const PhasePoint& x, double tol, int max_iter) const {
    Vec z = x.flat();
    for (int it = 0; it < max_iter; ++it) {
        const PhasePoint cur = PhasePoint::from_flat(z);
        const Vec c = constraint_values(cur);
        if (c.lpNorm<Eigen::Infinity>() < tol) return cur;
        const Mat J = constraint_jacobian(cur);
        // Gauss-Newton least-norm correction
        const Vec dz = J.transpose() * (J * J.transpose()).ldlt().solve(c);
        z -= dz;
    }
    throw numerical_error("ConstraintManifold::project: Newton projection failed");
}

std::optional<SigmaPoint> locate_sigma(const ConstraintManifold& cm, const PhasePoint& seed,
                                       const Vec& direction, double t_max, int scan_points) {
    if (direction.size() != cm.ambient_dim())
        throw domain_error("locate_sigma: direction dimension mismatch");

    PhasePoint base = cm.project(seed);
    if (base.p.norm() < kZeroSectionRadius)
        throw domain_error("locate_sigma: seed is inside the zero-section exclusion");
    Mat ref = cm.tangent_basis(base);

    auto at_t = [&](double t, const Mat& align_ref) {
        Vec z = base.flat() + t * direction;
        const PhasePoint x = cm.project(PhasePoint::from_flat(z));
        const Mat B = cm.tangent_basis_aligned(x, align_ref);
        const double pf = cm.pfaffian(x, B);
        return std::tuple<PhasePoint, Mat, double>(x, B, pf);
    };

    double t_prev = 0.0;
    auto [x_prev, B_prev, pf_prev] = at_t(0.0, ref);
    (void)x_prev;
    for (int i = 1; i <= scan_points; ++i) {
        const double t = t_max * static_cast<double>(i) / scan_points;
        auto [x_cur, B_cur, pf_cur] = at_t(t, B_prev);
        if ((pf_prev <= 0.0) != (pf_cur <= 0.0)) {
            // bisect on the sign change
            double lo = t_prev, hi = t;
            double pf_lo = pf_prev;
            Mat B_ref = B_prev;
            PhasePoint found = x_cur;
            double pf_found = pf_cur;
            Mat B_found = B_cur;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                auto [x_mid, B_mid, pf_mid] = at_t(mid, B_ref);
                found = x_mid;
                pf_found = pf_mid;
                B_found = B_mid;
                if (std::abs(pf_mid) < 1e-12 || hi - lo < 1e-15) break;
                if ((pf_lo <= 0.0) == (pf_mid <= 0.0)) {
                    lo = mid;
                    pf_lo = pf_mid;
                } else {
                    hi = mid;
                }
                B_ref = B_mid;
            }
            // The Pfaffian also changes sign across the zero section of the
            // cone. A genuine degeneracy point survives rescaling the
            // momentum to unit length (the constraints are fiber-linear);
            // a cone-tip artifact does not.
            const double pn = found.p.norm();
            bool genuine = pn > kZeroSectionRadius;
            if (genuine) {
                PhasePoint unit = found;
                unit.p /= pn;
                unit = cm.project(unit);
                const Mat Bu = cm.tangent_basis_aligned(unit, B_found);
                genuine = std::abs(cm.pfaffian(unit, Bu)) < 1e-8;
            }
            if (genuine) return SigmaPoint{found, pf_found, B_found};
            // otherwise skip past the artifact and keep scanning
        }
        t_prev = t;
        x_prev = x_cur;
        B_prev = B_cur;
        pf_prev = pf_cur;
    }
    return std::nullopt;
}

namespace {

// Gradient of the Pfaffian in ambient coordinates by central differences,
// evaluated with a fixed alignment reference so the scalar is smooth.
Vec pfaffian_gradient(const ConstraintManifold& cm, const PhasePoint& x, const Mat& ref) {
    const int d = cm.ambient_dim();
    Vec g(d);
    const double h = 1e-6;
    Vec z = x.flat();
    for (int i = 0; i < d; ++i) {
        Vec zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        const PhasePoint xp = PhasePoint::from_flat(zp);
        const PhasePoint xm = PhasePoint::from_flat(zm);
        const double fp = cm.pfaffian(xp, cm.tangent_basis_aligned(xp, ref));
        const double fm = cm.pfaffian(xm, cm.tangent_basis_aligned(xm, ref));
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace

Vec kernel_direction(const ConstraintManifold& cm, const PhasePoint& x) {
    const Mat B = cm.tangent_basis(x);
    const int k = cm.constraint_count();
    const int d = cm.ambient_dim();

    Mat augmented;
    if (k % 2 == 0) {
        if (std::abs(cm.pfaffian(x, B)) > 1e-8)
            throw numerical_error(
                "kernel_direction: restricted form is nondegenerate at this point");
        // T_x Sigma = T_x S intersect ker(d Pf)
        const Vec gpf = pfaffian_gradient(cm, x, B);
        augmented.resize(k + 1, d);
        augmented.topRows(k) = cm.constraint_jacobian(x);
        augmented.row(k) = gpf.transpose();
    } else {
        augmented = cm.constraint_jacobian(x);
    }
    Eigen::JacobiSVD<Mat> svd(augmented, Eigen::ComputeFullV);
    const int null_dim = d - static_cast<int>(augmented.rows());
    const Mat S = svd.matrixV().rightCols(null_dim);

    const Mat K = restricted_canonical_form(S);
    Eigen::JacobiSVD<Mat> ks(K, Eigen::ComputeFullV);
    const auto& sv = ks.singularValues();
    const int n = static_cast<int>(sv.size());
    if (n >= 2 && sv(n - 2) < 1e-6 * std::max(sv(0), 1e-30))
        throw numerical_error("kernel_direction: kernel is not one-dimensional (degenerate stratum)");
    if (sv(n - 1) > 1e-6 * sv(0))
        throw numerical_error("kernel_direction: restricted form is nondegenerate, no kernel");
    const Vec w = ks.matrixV().col(n - 1);
    Vec dir = S * w;
    return dir / dir.norm();
}

double AbnormalCurve::max_constraint_violation(const ConstraintManifold& cm) const {
    double worst = 0.0;
    for (const auto& x : points)
        worst = std::max(worst, cm.constraint_values(x).lpNorm<Eigen::Infinity>());
    return worst;
}

AbnormalCurve trace_abnormal(const ConstraintManifold& cm, const PhasePoint& x0, double T,
                             double ds) {
    AbnormalCurve curve;
    PhasePoint x = cm.project(x0);
    Vec kappa = kernel_direction(cm, x);

    auto field = [&](const PhasePoint& at, const Vec& prev) {
        Vec v = kernel_direction(cm, at);
        if (v.dot(prev) < 0.0) v = -v;
        return v;
    };

    const int n_steps = static_cast<int>(std::ceil(std::abs(T) / ds));
    const double h = T / n_steps;
    double t = 0.0;
    Mat ref = cm.tangent_basis(x);

    auto record = [&]() {
        curve.times.push_back(t);
        curve.points.push_back(x);
        const Mat B = cm.tangent_basis_aligned(x, ref);
        curve.pfaffians.push_back(cm.pfaffian(x, B));
        curve.kernels.push_back(kappa);
    };
    record();

    for (int s = 0; s < n_steps; ++s) {
        if (x.p.norm() < kZeroSectionRadius)
            throw numerical_error("trace_abnormal: trajectory entered the zero-section exclusion");
        // RK4 on the unit kernel line field with per-stage sign continuity
        const Vec k1 = field(x, kappa);
        const Vec k2 = field(PhasePoint::from_flat(x.flat() + 0.5 * h * k1), k1);
        const Vec k3 = field(PhasePoint::from_flat(x.flat() + 0.5 * h * k2), k2);
        const Vec k4 = field(PhasePoint::from_flat(x.flat() + h * k3), k3);
        Vec z = x.flat() + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x = cm.project(PhasePoint::from_flat(z));
        kappa = field(x, k1);
        t += h;
        record();
    }
    return curve;
}

}  // namespace srflow

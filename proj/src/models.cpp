#include "srflow/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "srflow/hamiltonian.hpp"

namespace srflow {

std::string to_string(MonodromyCase c) {
    switch (c) {
        case MonodromyCase::hyperbolic: return "hyperbolic";
        case MonodromyCase::elliptic: return "elliptic";
        case MonodromyCase::parabolic: return "parabolic";
        case MonodromyCase::identity: return "identity";
    }
    return "?";
}

void QuotientData::validate() const {
    if (!monodromy) return;
    const auto& mo = *monodromy;
    const long det = static_cast<long>(mo.matrix(0, 0)) * mo.matrix(1, 1) -
                     static_cast<long>(mo.matrix(0, 1)) * mo.matrix(1, 0);
    if (det != 1) throw domain_error("QuotientData: monodromy matrix must have det 1");
    const long tr = std::abs(static_cast<long>(mo.matrix(0, 0)) + mo.matrix(1, 1));
    const bool id = mo.matrix(0, 1) == 0 && mo.matrix(1, 0) == 0 &&
                    mo.matrix(0, 0) == mo.matrix(1, 1);
    switch (mo.case_tag) {
        case MonodromyCase::hyperbolic:
            if (tr <= 2) throw domain_error("QuotientData: hyperbolic tag needs |trace| > 2");
            break;
        case MonodromyCase::elliptic:
            if (tr >= 2) throw domain_error("QuotientData: elliptic tag needs |trace| < 2");
            break;
        case MonodromyCase::parabolic:
            if (tr != 2 || id) throw domain_error("QuotientData: parabolic tag needs |trace| = 2");
            break;
        case MonodromyCase::identity:
            if (!id) throw domain_error("QuotientData: identity tag needs A = +-E");
            break;
    }
}

namespace {

constexpr int kFiberIndex = 2;

Eigen::Matrix2d to_double(const Eigen::Matrix2i& A) { return A.cast<double>(); }

// Deck linear part on the 3-dimensional chart (A on the torus, 1 on fiber).
Eigen::Matrix3d deck_linear(const Eigen::Matrix2i& A) {
    Eigen::Matrix3d L = Eigen::Matrix3d::Identity();
    L.topLeftCorner<2, 2>() = to_double(A);
    return L;
}

struct SuspensionCase {
    MonodromyCase tag;
    Eigen::Matrix2i deck;       // effective deck matrix, trace >= -2 up to reflection
    Eigen::Matrix2d basis;      // columns eta_1, eta_2
    double log_lambda = 0.0;    // hyperbolic
    double theta = 0.0;         // elliptic / identity
    int k = 0;                  // rotation order (theta = 2 pi / k)
    bool reflected = false;     // true when -A was used for negative real spectrum
};

Frame build_suspension_frame(const SuspensionCase& sc) {
    const int m = 3;
    const Eigen::Vector2d e1 = sc.basis.col(0), e2 = sc.basis.col(1);
    std::vector<ScalarField> xi1;
    if (sc.tag == MonodromyCase::hyperbolic) {
        for (int j = 0; j < 2; ++j)
            xi1.push_back(ScalarField::exp_linear(m, kFiberIndex, -sc.log_lambda, e1(j)) +
                          ScalarField::exp_linear(m, kFiberIndex, sc.log_lambda, e2(j)));
    } else if (sc.tag == MonodromyCase::parabolic) {
        // cos(2 pi t) eta1 + sin(2 pi t) (eta2 - t eta1)
        for (int j = 0; j < 2; ++j)
            xi1.push_back(ScalarField::univariate(m, kFiberIndex, 0.0, 2.0 * M_PI, {e1(j)},
                                                  {e2(j), -e1(j)}));
    } else {  // elliptic or identity: cos(theta t) eta1 - sin(theta t) eta2
        for (int j = 0; j < 2; ++j)
            xi1.push_back(ScalarField::cosine(m, kFiberIndex, sc.theta, e1(j)) +
                          ScalarField::sine(m, kFiberIndex, sc.theta, -e2(j)));
    }
    xi1.push_back(ScalarField::constant(m, 0.0));
    return Frame({VectorField(std::move(xi1)), VectorField::basis(m, kFiberIndex)});
}

double frame_invariance_residual(const Frame& fr, const Eigen::Matrix2i& deck) {
    const Eigen::Matrix3d L = deck_linear(deck);
    const Eigen::Vector3d shift(0.0, 0.0, -1.0);
    const double phis[] = {-0.7, -0.3, 0.1, 0.45, 0.8, 1.3};
    double worst = 0.0;
    for (double phi3 : phis) {
        Vec q(3);
        q << 0.2, 0.7, phi3;
        const Vec q2 = L * q + shift;
        for (int i = 0; i < fr.rank(); ++i) {
            const Vec lhs = L * fr.field(i).value(q);
            const Vec rhs = fr.field(i).value(q2);
            worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
        }
    }
    return worst;
}

// --- momentum-space integrals for the suspension cases -----------------------

Vec embed_momentum_direction(const Eigen::Vector2d& eta) {
    Vec v = Vec::Zero(6);
    v(3) = eta(0);
    v(4) = eta(1);
    return v;
}

// I3 = sin(2 pi ln|u'| / ln(lambda)) exp(-(u' u'')^-2) in the eigenbasis
// momenta; extended by zero where the flat factor underflows.
class HyperbolicFlatIntegral final : public CotangentScalar::Impl {
public:
    HyperbolicFlatIntegral(Eigen::Matrix2d basis, double log_lambda)
        : basis_(std::move(basis)), kappa_(2.0 * M_PI / log_lambda) {}
    int dim() const override { return 3; }

    double value(const PhasePoint& x) const override {
        const auto [pa, pb] = momenta(x);
        const double u = pa * pb;
        if (std::abs(u) <= kFlatCutoff) return 0.0;
        return s_of(pa) * flat_factor(u);
    }

    void eval_grad(const PhasePoint& x, double& v, Vec& g) const override {
        Mat h;
        eval_impl(x, v, g, h, false);
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        eval_impl(x, v, g, h, true);
    }

    ScaledGradient scaled_gradient(const PhasePoint& x) const override {
        const auto [pa, pb] = momenta(x);
        const double u = pa * pb;
        if (u == 0.0) return {Vec::Zero(6), -std::numeric_limits<double>::infinity()};
        // The plain gradient norm underflows long before the flat cutoff, so
        // switch to the factored form over the whole small-|u| band.
        if (std::abs(u) > 0.1) return Impl::scaled_gradient(x);
        // grad = F(u) [ s'(pa) e1 + (2 s / u^3)(pb e1 + pa e2) ]; rescale by
        // u^3 / F to keep the direction representable.
        const double s = s_of(pa), c = c_of(pa);
        const Vec e1 = embed_momentum_direction(basis_.col(0));
        const Vec e2 = embed_momentum_direction(basis_.col(1));
        const Vec scaled = kappa_ * c * pa * pa * pb * pb * pb * e1 + 2.0 * s * (pb * e1 + pa * e2);
        const double n = scaled.norm();
        if (n == 0.0) return {Vec::Zero(6), -std::numeric_limits<double>::infinity()};
        const double log_norm = std::log(n) - 1.0 / (u * u) - 3.0 * std::log(std::abs(u));
        return {scaled / n, log_norm};
    }

private:
    std::pair<double, double> momenta(const PhasePoint& x) const {
        const Eigen::Vector2d pt(x.p(0), x.p(1));
        return {basis_.col(0).dot(pt), basis_.col(1).dot(pt)};
    }
    double s_of(double pa) const { return std::sin(kappa_ * std::log(std::abs(pa))); }
    double c_of(double pa) const { return std::cos(kappa_ * std::log(std::abs(pa))); }

    void eval_impl(const PhasePoint& x, double& v, Vec& g, Mat& h, bool want_hess) const {
        const auto [pa, pb] = momenta(x);
        const double u = pa * pb;
        g = Vec::Zero(6);
        if (want_hess) h = Mat::Zero(6, 6);
        if (std::abs(u) <= kFlatCutoff) {
            v = 0.0;
            return;
        }
        const double F = flat_factor(u);
        const double Fp = 2.0 * F / (u * u * u);
        const double s = s_of(pa), c = c_of(pa);
        const double sp = kappa_ * c / pa;
        v = s * F;
        const double d_pa = sp * F + s * Fp * pb;
        const double d_pb = s * Fp * pa;
        const Vec e1 = embed_momentum_direction(basis_.col(0));
        const Vec e2 = embed_momentum_direction(basis_.col(1));
        g = d_pa * e1 + d_pb * e2;
        if (!want_hess) return;
        const double Fpp = (4.0 / std::pow(u, 6) - 6.0 / std::pow(u, 4)) * F;
        const double spp = -(kappa_ * kappa_ * s + kappa_ * c) / (pa * pa);
        const double d_aa = spp * F + 2.0 * sp * Fp * pb + s * Fpp * pb * pb;
        const double d_ab = sp * Fp * pa + s * Fpp * pa * pb + s * Fp;
        const double d_bb = s * Fpp * pa * pa;
        h = d_aa * e1 * e1.transpose() + d_bb * e2 * e2.transpose() +
            d_ab * (e1 * e2.transpose() + e2 * e1.transpose());
    }

    Eigen::Matrix2d basis_;
    double kappa_;
};

// I3 = Re((u' + i u'')^k) for the finite-order rotation cases.
class RotationPowerIntegral final : public CotangentScalar::Impl {
public:
    RotationPowerIntegral(Eigen::Matrix2d basis, int k) : basis_(std::move(basis)), k_(k) {}
    int dim() const override { return 3; }

    double value(const PhasePoint& x) const override {
        return std::pow(z_of(x), k_).real();
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        const std::complex<double> z = z_of(x);
        const double k = k_;
        const std::complex<double> zk = std::pow(z, k_);
        const std::complex<double> zk1 = k_ >= 1 ? std::pow(z, k_ - 1) : 0.0;
        const std::complex<double> zk2 = k_ >= 2 ? std::pow(z, k_ - 2) : 0.0;
        v = zk.real();
        const Vec e1 = embed_momentum_direction(basis_.col(0));
        const Vec e2 = embed_momentum_direction(basis_.col(1));
        g = k * zk1.real() * e1 - k * zk1.imag() * e2;
        const double w = k * (k - 1.0);
        h = w * zk2.real() * (e1 * e1.transpose() - e2 * e2.transpose()) -
            w * zk2.imag() * (e1 * e2.transpose() + e2 * e1.transpose());
    }

private:
    std::complex<double> z_of(const PhasePoint& x) const {
        const Eigen::Vector2d pt(x.p(0), x.p(1));
        return {basis_.col(0).dot(pt), basis_.col(1).dot(pt)};
    }
    Eigen::Matrix2d basis_;
    int k_;
};

// I3 = sin(2 pi u''/u') exp(-(u')^-2) for the unipotent case, written in the
// labeling that makes it deck-invariant for our frame.
class ParabolicFlatIntegral final : public CotangentScalar::Impl {
public:
    explicit ParabolicFlatIntegral(Eigen::Matrix2d basis) : basis_(std::move(basis)) {}
    int dim() const override { return 3; }

    double value(const PhasePoint& x) const override {
        const auto [pa, pb] = momenta(x);
        if (std::abs(pa) <= kFlatCutoff) return 0.0;
        return std::sin(2.0 * M_PI * pb / pa) * flat_factor(pa);
    }
    void eval_grad(const PhasePoint& x, double& v, Vec& g) const override {
        Mat h;
        eval_impl(x, v, g, h, false);
    }
    void eval_full(const PhasePoint& x, double& v, Vec& g, Mat& h) const override {
        eval_impl(x, v, g, h, true);
    }
    ScaledGradient scaled_gradient(const PhasePoint& x) const override {
        const auto [pa, pb] = momenta(x);
        if (pa == 0.0) return {Vec::Zero(6), -std::numeric_limits<double>::infinity()};
        if (std::abs(pa) > 0.1) return Impl::scaled_gradient(x);
        const double psi = 2.0 * M_PI * pb / pa;
        const double G = std::sin(psi), Gp = std::cos(psi);
        const Vec e1 = embed_momentum_direction(basis_.col(0));
        const Vec e2 = embed_momentum_direction(basis_.col(1));
        const Vec scaled = Gp * 2.0 * M_PI * pa * (-pb * e1 + pa * e2) + 2.0 * G * e1;
        const double n = scaled.norm();
        if (n == 0.0) return {Vec::Zero(6), -std::numeric_limits<double>::infinity()};
        const double log_norm =
            std::log(n) - 1.0 / (pa * pa) - 3.0 * std::log(std::abs(pa));
        return {scaled / n, log_norm};
    }

private:
    std::pair<double, double> momenta(const PhasePoint& x) const {
        const Eigen::Vector2d pt(x.p(0), x.p(1));
        return {basis_.col(0).dot(pt), basis_.col(1).dot(pt)};
    }
    void eval_impl(const PhasePoint& x, double& v, Vec& g, Mat& h, bool want_hess) const {
        const auto [pa, pb] = momenta(x);
        g = Vec::Zero(6);
        if (want_hess) h = Mat::Zero(6, 6);
        if (std::abs(pa) <= kFlatCutoff) {
            v = 0.0;
            return;
        }
        const double F = flat_factor(pa);
        const double Fp = 2.0 * F / (pa * pa * pa);
        const double psi = 2.0 * M_PI * pb / pa;
        const double G = std::sin(psi), Gp = std::cos(psi);
        const double psi_a = -2.0 * M_PI * pb / (pa * pa);
        const double psi_b = 2.0 * M_PI / pa;
        v = G * F;
        const Vec e1 = embed_momentum_direction(basis_.col(0));
        const Vec e2 = embed_momentum_direction(basis_.col(1));
        const double d_pa = Gp * psi_a * F + G * Fp;
        const double d_pb = Gp * psi_b * F;
        g = d_pa * e1 + d_pb * e2;
        if (!want_hess) return;
        const double Fpp = (4.0 / std::pow(pa, 6) - 6.0 / std::pow(pa, 4)) * F;
        const double Gpp = -G;
        const double psi_aa = 4.0 * M_PI * pb / (pa * pa * pa);
        const double psi_ab = -2.0 * M_PI / (pa * pa);
        const double d_aa = (Gpp * psi_a * psi_a + Gp * psi_aa) * F + 2.0 * Gp * psi_a * Fp + G * Fpp;
        const double d_ab = (Gpp * psi_a * psi_b + Gp * psi_ab) * F + Gp * psi_b * Fp;
        const double d_bb = Gpp * psi_b * psi_b * F;
        h = d_aa * e1 * e1.transpose() + d_bb * e2 * e2.transpose() +
            d_ab * (e1 * e2.transpose() + e2 * e1.transpose());
    }

    Eigen::Matrix2d basis_;
};

CotangentScalar eigen_momentum(const Eigen::Vector2d& eta) {
    Vec full = Vec::Zero(3);
    full.head(2) = eta;
    return CotangentScalar::momentum(VectorField::constant(3, full));
}

CotangentScalar eigen_momentum_product(const Eigen::Matrix2d& basis) {
    // u' u'' = 1/2 (u' + u'')^2 - 1/2 u'^2 - 1/2 u''^2
    auto hs = [](const CotangentScalar& f) { return CotangentScalar::half_square(f); };
    const CotangentScalar pa = eigen_momentum(basis.col(0));
    const CotangentScalar pb = eigen_momentum(basis.col(1));
    const CotangentScalar sum = eigen_momentum(basis.col(0) + basis.col(1));
    return CotangentScalar::linear_combination({{1.0, hs(sum)}, {-1.0, hs(pa)}, {-1.0, hs(pb)}});
}

// --- contact data -------------------------------------------------------------

struct ContactData {
    OneFormField alpha;
    VectorField reeb;
};

ContactData suspension_contact(const SuspensionCase& sc) {
    const int m = 3;
    const Eigen::Matrix2d dual = sc.basis.inverse().transpose();  // columns eta_1*, eta_2*
    auto assemble_form = [&](const ScalarField& c1, const ScalarField& c2) {
        std::vector<ScalarField> comps;
        for (int j = 0; j < 2; ++j)
            comps.push_back(ScalarField::linear_combination({{dual(j, 0), c1}, {dual(j, 1), c2}}));
        comps.push_back(ScalarField::constant(m, 0.0));
        return OneFormField(std::move(comps));
    };
    auto assemble_field = [&](const ScalarField& c1, const ScalarField& c2) {
        std::vector<ScalarField> comps;
        for (int j = 0; j < 2; ++j)
            comps.push_back(
                ScalarField::linear_combination({{sc.basis(j, 0), c1}, {sc.basis(j, 1), c2}}));
        comps.push_back(ScalarField::constant(m, 0.0));
        return VectorField(std::move(comps));
    };

    if (sc.tag == MonodromyCase::hyperbolic) {
        const double l = sc.log_lambda;
        ContactData cd{assemble_form(ScalarField::exp_linear(m, kFiberIndex, l, 0.5 / l),
                                     ScalarField::exp_linear(m, kFiberIndex, -l, -0.5 / l)),
                       assemble_field(ScalarField::exp_linear(m, kFiberIndex, -l, l),
                                      ScalarField::exp_linear(m, kFiberIndex, l, -l))};
        return cd;
    }
    if (sc.tag == MonodromyCase::elliptic || sc.tag == MonodromyCase::identity) {
        const double th = sc.theta;
        ContactData cd{assemble_form(ScalarField::sine(m, kFiberIndex, th, 1.0 / th),
                                     ScalarField::cosine(m, kFiberIndex, th, 1.0 / th)),
                       assemble_field(ScalarField::sine(m, kFiberIndex, th, th),
                                      ScalarField::cosine(m, kFiberIndex, th, th))};
        return cd;
    }

    // Unipotent case: alpha = (2 pi + sin^2 a)^-1 (sin a eta1* + (t sin a - cos a) eta2*),
    // a = 2 pi t; the Reeb field is [xi1, xi2] corrected along xi1.
    auto c1_fn = [](const std::vector<D2>& q) {
        const D2 a = 2.0 * M_PI * q[kFiberIndex];
        return sin(a) / (sin(a) * sin(a) + 2.0 * M_PI);
    };
    auto c2_fn = [](const std::vector<D2>& q) {
        const D2 t = q[kFiberIndex];
        const D2 a = 2.0 * M_PI * t;
        return (t * sin(a) - cos(a)) / (sin(a) * sin(a) + 2.0 * M_PI);
    };
    const ScalarField c1 = ScalarField::from_d2(m, c1_fn);
    const ScalarField c2 = ScalarField::from_d2(m, c2_fn);

    // Components of v = [xi1, xi2] and xi1 in the eigenbasis, and the
    // correction b = -beta'(v)/beta'(xi1) with beta' = d alpha / d t.
    auto reeb_component = [c1_fn, c2_fn](int which) {
        return [which, c1_fn, c2_fn](const std::vector<D2>& q) {
            const D2 t = q[kFiberIndex];
            const D2 a = 2.0 * M_PI * t;
            const D2 xi1_1 = cos(a) - t * sin(a);
            const D2 xi1_2 = sin(a);
            const D2 v1 = (2.0 * M_PI + 1.0) * sin(a) + 2.0 * M_PI * t * cos(a);
            const D2 v2 = -2.0 * M_PI * cos(a);
            // beta' components via one more t-derivative of the alpha
            // coefficients, formed from the same closed expressions.
            const D2 D = sin(a) * sin(a) + 2.0 * M_PI;
            const D2 Dp = 4.0 * M_PI * sin(a) * cos(a);
            const D2 c1p = (2.0 * M_PI * cos(a) * D - sin(a) * Dp) / (D * D);
            const D2 num2 = t * sin(a) - cos(a);
            const D2 num2p = sin(a) + 2.0 * M_PI * t * cos(a) + 2.0 * M_PI * sin(a);
            const D2 c2p = (num2p * D - num2 * Dp) / (D * D);
            const D2 b = -(c1p * v1 + c2p * v2) / (c1p * xi1_1 + c2p * xi1_2);
            return which == 0 ? v1 + b * xi1_1 : v2 + b * xi1_2;
        };
    };
    const ScalarField r1 = ScalarField::from_d2(m, reeb_component(0));
    const ScalarField r2 = ScalarField::from_d2(m, reeb_component(1));
    std::vector<ScalarField> comps;
    for (int j = 0; j < 2; ++j)
        comps.push_back(ScalarField::linear_combination({{sc.basis(j, 0), r1}, {sc.basis(j, 1), r2}}));
    comps.push_back(ScalarField::constant(m, 0.0));
    return {assemble_form(c1, c2), VectorField(std::move(comps))};
}

// --- case classification --------------------------------------------------------

Eigen::Vector2d real_eigenvector(const Eigen::Matrix2d& A, double mu) {
    Eigen::Vector2d v;
    if (std::abs(A(0, 1)) > 1e-14)
        v << A(0, 1), mu - A(0, 0);
    else if (std::abs(A(1, 0)) > 1e-14)
        v << mu - A(1, 1), A(1, 0);
    else
        v = std::abs(A(0, 0) - mu) < std::abs(A(1, 1) - mu) ? Eigen::Vector2d(1, 0)
                                                            : Eigen::Vector2d(0, 1);
    return v.normalized();
}

SuspensionCase classify_suspension(const Eigen::Matrix2i& A) {
    const long det = static_cast<long>(A(0, 0)) * A(1, 1) - static_cast<long>(A(0, 1)) * A(1, 0);
    if (det == -1)
        throw domain_error(
            "make_suspension_model: det = -1; that mapping torus admits no contact structure");
    if (det != 1) throw domain_error("make_suspension_model: matrix must have det = 1");
    const int tr = A(0, 0) + A(1, 1);
    const bool is_identity = A(0, 1) == 0 && A(1, 0) == 0 && A(0, 0) == A(1, 1);

    SuspensionCase sc;
    if (is_identity) {
        // A = +-E: fiber rotation with k = 1 or 2 over the standard basis.
        sc.tag = MonodromyCase::identity;
        sc.deck = A;
        sc.basis = Eigen::Matrix2d::Identity();
        sc.k = (tr > 0) ? 1 : 2;
        sc.theta = 2.0 * M_PI / sc.k;
        return sc;
    }
    if (std::abs(tr) > 2) {
        sc.tag = MonodromyCase::hyperbolic;
        sc.reflected = tr < 0;
        sc.deck = sc.reflected ? Eigen::Matrix2i(-A) : A;
        const double t = sc.deck(0, 0) + sc.deck(1, 1);
        const double lambda = 0.5 * (t + std::sqrt(t * t - 4.0));
        sc.log_lambda = std::log(lambda);
        const Eigen::Matrix2d Ad = to_double(sc.deck);
        const Eigen::Vector2d big = real_eigenvector(Ad, lambda);
        const Eigen::Vector2d small = real_eigenvector(Ad, 1.0 / lambda);
        // Invariance under the deck map needs the expanding direction first;
        // both labelings are tried and the passing one is kept.
        for (int labeling = 0; labeling < 2; ++labeling) {
            sc.basis.col(0) = labeling == 0 ? big : small;
            sc.basis.col(1) = labeling == 0 ? small : big;
            if (frame_invariance_residual(build_suspension_frame(sc), sc.deck) < 1e-10) return sc;
        }
        throw numerical_error("make_suspension_model: no eigenvalue labeling passes invariance");
    }
    if (std::abs(tr) == 2) {
        sc.tag = MonodromyCase::parabolic;
        sc.reflected = tr < 0;
        sc.deck = sc.reflected ? Eigen::Matrix2i(-A) : A;
        const Eigen::Matrix2d N = to_double(sc.deck) - Eigen::Matrix2d::Identity();
        Eigen::Vector2d ker;
        if (N.row(0).norm() > 1e-14)
            ker << -N(0, 1), N(0, 0);
        else
            ker << -N(1, 1), N(1, 0);
        ker.normalize();
        // Particular solution of N x = c ker, then both orientations tried.
        Eigen::Vector2d probe(1.0, 0.0);
        if ((N * probe).norm() < 1e-14) probe = Eigen::Vector2d(0.0, 1.0);
        const Eigen::Vector2d img = N * probe;
        const double c = img.dot(ker);
        for (int orientation = 0; orientation < 2; ++orientation) {
            const double s = orientation == 0 ? 1.0 : -1.0;
            Eigen::Vector2d eta1 = s * ker;
            Eigen::Vector2d eta2 = probe * (1.0 / (s * c));
            eta2 -= eta2.dot(eta1) * eta1;  // shear freedom: orthogonalize
            const double scale = std::max(eta1.norm(), eta2.norm());
            sc.basis.col(0) = eta1 / scale;
            sc.basis.col(1) = eta2 / scale;
            if (frame_invariance_residual(build_suspension_frame(sc), sc.deck) < 1e-10) return sc;
        }
        throw numerical_error("make_suspension_model: no unipotent orientation passes invariance");
    }

    // |tr| < 2: finite-order rotation, theta = 2 pi / k.
    sc.tag = MonodromyCase::elliptic;
    sc.deck = A;
    sc.k = tr == 0 ? 4 : (tr == 1 ? 6 : 3);
    sc.theta = 2.0 * M_PI / sc.k;
    const std::complex<double> mu(std::cos(sc.theta), std::sin(sc.theta));
    const Eigen::Matrix2d Ad = to_double(A);
    Eigen::Vector2cd w;
    if (std::abs(Ad(0, 1)) > 1e-14)
        w << std::complex<double>(Ad(0, 1), 0.0), mu - Ad(0, 0);
    else
        w << mu - Ad(1, 1), std::complex<double>(Ad(1, 0), 0.0);
    const Eigen::Vector2d u(w(0).real(), w(1).real());
    const Eigen::Vector2d v(w(0).imag(), w(1).imag());
    const double scale = std::max(u.norm(), v.norm());
    const Eigen::Vector2d candidates[4][2] = {
        {v / scale, u / scale}, {u / scale, v / scale},
        {-v / scale, u / scale}, {u / scale, -v / scale}};
    for (const auto& cand : candidates) {
        sc.basis.col(0) = cand[0];
        sc.basis.col(1) = cand[1];
        if (frame_invariance_residual(build_suspension_frame(sc), sc.deck) < 1e-10) return sc;
    }
    throw numerical_error("make_suspension_model: no rotation basis passes invariance");
}

std::vector<NamedIntegral> case_integrals(const SuspensionCase& sc) {
    std::vector<NamedIntegral> out;
    if (sc.tag == MonodromyCase::hyperbolic) {
        out.push_back({"I2", eigen_momentum_product(sc.basis)});
        out.push_back({"I3", CotangentScalar(std::make_shared<HyperbolicFlatIntegral>(
                                 sc.basis, sc.log_lambda))});
    } else if (sc.tag == MonodromyCase::parabolic) {
        out.push_back({"I2", eigen_momentum(sc.basis.col(0))});
        out.push_back({"I3", CotangentScalar(std::make_shared<ParabolicFlatIntegral>(sc.basis))});
    } else {
        auto hs = [](const CotangentScalar& f) { return CotangentScalar::half_square(f); };
        out.push_back({"I2", CotangentScalar::linear_combination(
                                 {{2.0, hs(eigen_momentum(sc.basis.col(0)))},
                                  {2.0, hs(eigen_momentum(sc.basis.col(1)))}})});
        out.push_back({"I3", CotangentScalar(std::make_shared<RotationPowerIntegral>(sc.basis,
                                                                                     sc.k))});
    }
    return out;
}

SuspensionCase case_of(const ModelSpec& model) {
    if (!model.quotient.monodromy) throw domain_error("model is not a suspension");
    const auto& mo = *model.quotient.monodromy;
    SuspensionCase sc;
    sc.tag = mo.case_tag;
    sc.deck = mo.matrix;
    sc.basis = mo.eigenbasis;
    if (auto it = model.parameters.find("log_lambda"); it != model.parameters.end())
        sc.log_lambda = it->second;
    if (auto it = model.parameters.find("theta"); it != model.parameters.end())
        sc.theta = it->second;
    if (auto it = model.parameters.find("k"); it != model.parameters.end())
        sc.k = static_cast<int>(it->second);
    if (auto it = model.parameters.find("reflected"); it != model.parameters.end())
        sc.reflected = it->second != 0.0;
    return sc;
}

}  // namespace

ModelSpec make_suspension_model(const Eigen::Matrix2i& A) {
    const SuspensionCase sc = classify_suspension(A);

    ModelSpec model;
    std::ostringstream name;
    name << "suspension[[" << A(0, 0) << "," << A(0, 1) << "],[" << A(1, 0) << "," << A(1, 1)
         << "]]";
    model.name = name.str();
    model.dimension = 3;
    model.frame = build_suspension_frame(sc);

    model.quotient.periodic = {{0, 1.0}, {1, 1.0}};
    QuotientData::Monodromy mo;
    mo.matrix = sc.deck;
    mo.fiber_index = kFiberIndex;
    mo.eigenbasis = sc.basis;
    mo.case_tag = sc.tag;
    model.quotient.monodromy = mo;
    model.quotient.validate();

    model.parameters["trace"] = static_cast<double>(A(0, 0) + A(1, 1));
    model.parameters["reflected"] = sc.reflected ? 1.0 : 0.0;
    if (sc.tag == MonodromyCase::hyperbolic) {
        model.parameters["lambda"] = std::exp(sc.log_lambda);
        model.parameters["log_lambda"] = sc.log_lambda;
    } else {
        model.parameters["theta"] = sc.theta;
        model.parameters["k"] = static_cast<double>(sc.k);
    }

    const ContactData cd = suspension_contact(sc);
    model.contact_form = cd.alpha;
    model.reeb_field = cd.reeb;
    model.annihilator = {cd.alpha};

    model.known_integrals.push_back({"H", sr_hamiltonian(model.frame)});
    for (auto& ni : case_integrals(sc)) model.known_integrals.push_back(std::move(ni));

    model.sample_box = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
    return model;
}

std::vector<NamedIntegral> suspension_integrals(const ModelSpec& model) {
    return case_integrals(case_of(model));
}

double suspension_labeling_residual(const Eigen::Matrix2i& A, bool swapped) {
    SuspensionCase sc = classify_suspension(A);
    if (swapped) {
        const Eigen::Vector2d tmp = sc.basis.col(0);
        sc.basis.col(0) = sc.basis.col(1);
        sc.basis.col(1) = tmp;
    }
    return frame_invariance_residual(build_suspension_frame(sc), sc.deck);
}

double verify_frame_invariance(const ModelSpec& model, int samples) {
    if (!model.quotient.monodromy) throw domain_error("verify_frame_invariance: no monodromy");
    const auto& mo = *model.quotient.monodromy;
    const Eigen::Matrix3d L = deck_linear(mo.matrix);
    const Eigen::Vector3d shift(0.0, 0.0, -1.0);
    const Eigen::Matrix3d Lp = L.inverse().transpose();  // cotangent lift on momenta

    std::mt19937_64 rng(2718281828ull);
    std::uniform_real_distribution<double> uq(-1.0, 2.0);
    std::normal_distribution<double> np(0.0, 1.0);

    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vec q(3);
        for (int i = 0; i < 3; ++i) q(i) = uq(rng);
        const Vec q2 = L * q + shift;
        for (int i = 0; i < model.frame.rank(); ++i) {
            const Vec lhs = L * model.frame.field(i).value(q);
            const Vec rhs = model.frame.field(i).value(q2);
            worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
        }
        Vec p(3);
        for (int i = 0; i < 3; ++i) p(i) = np(rng);
        const PhasePoint x(q, p);
        const PhasePoint x2(q2, Lp * p);
        for (const auto& ni : model.known_integrals)
            worst = std::max(worst, std::abs(ni.function.value(x2) - ni.function.value(x)));
    }
    return worst;
}

// --- classical 3D / 4D examples ------------------------------------------------

namespace {

ModelSpec make_torus3() {
    const int m = 3;
    ModelSpec model;
    model.name = "torus3";
    model.dimension = m;

    // xi1 = d/dphi1, xi2 = cos(phi1) d/dphi2 - sin(phi1) d/dphi3
    VectorField xi1 = VectorField::basis(m, 0);
    VectorField xi2(std::vector<ScalarField>{ScalarField::constant(m, 0.0),
                                             ScalarField::cosine(m, 0, 1.0),
                                             ScalarField::sine(m, 0, 1.0, -1.0)});
    model.frame = Frame({xi1, xi2});

    // Metric-normalized annihilator: alpha([xi1, xi2]) = 1.
    OneFormField alpha(std::vector<ScalarField>{ScalarField::constant(m, 0.0),
                                                ScalarField::sine(m, 0, 1.0, -1.0),
                                                ScalarField::cosine(m, 0, 1.0, -1.0)});
    model.contact_form = alpha;
    model.annihilator = {alpha};
    model.reeb_field = VectorField(std::vector<ScalarField>{ScalarField::constant(m, 0.0),
                                                            ScalarField::sine(m, 0, 1.0, -1.0),
                                                            ScalarField::cosine(m, 0, 1.0, -1.0)});

    model.known_integrals.push_back({"H", sr_hamiltonian(model.frame)});
    model.known_integrals.push_back({"I2", CotangentScalar::phase_coordinate(m, m + 1)});
    model.known_integrals.push_back({"I3", CotangentScalar::phase_coordinate(m, m + 2)});

    model.quotient.periodic = {{0, 2.0 * M_PI}, {1, 2.0 * M_PI}, {2, 2.0 * M_PI}};
    model.sample_box = {{0.0, 2.0 * M_PI}, {0.0, 2.0 * M_PI}, {0.0, 2.0 * M_PI}};
    return model;
}

ModelSpec make_heisenberg() {
    const int m = 3;
    ModelSpec model;
    model.name = "heisenberg";
    model.dimension = m;

    // xi1 = d1 + x3 d2, xi2 = d3
    VectorField xi1(std::vector<ScalarField>{ScalarField::constant(m, 1.0),
                                             ScalarField::coordinate(m, 2),
                                             ScalarField::constant(m, 0.0)});
    model.frame = Frame({xi1, VectorField::basis(m, 2)});

    // alpha = x3 dx1 - dx2 pairs to 1 with [xi1, xi2]; Reeb field is -d2.
    OneFormField alpha(std::vector<ScalarField>{ScalarField::coordinate(m, 2),
                                                ScalarField::constant(m, -1.0),
                                                ScalarField::constant(m, 0.0)});
    model.contact_form = alpha;
    model.annihilator = {alpha};
    model.reeb_field = VectorField::constant(m, Eigen::Vector3d(0.0, -1.0, 0.0));

    model.known_integrals.push_back({"H", sr_hamiltonian(model.frame)});
    model.known_integrals.push_back({"I2", CotangentScalar::phase_coordinate(m, m + 0)});
    model.known_integrals.push_back({"I3", CotangentScalar::phase_coordinate(m, m + 1)});

    model.sample_box = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    return model;
}

ModelSpec make_martinet() {
    const int m = 3;
    ModelSpec model;
    model.name = "martinet";
    model.dimension = m;

    // xi1 = dx + z^2 dy, xi2 = dz on R^3(x, y, z)
    VectorField xi1(std::vector<ScalarField>{ScalarField::constant(m, 1.0),
                                             ScalarField::polynomial(m, 2, {0.0, 0.0, 1.0}),
                                             ScalarField::constant(m, 0.0)});
    model.frame = Frame({xi1, VectorField::basis(m, 2)});

    // Ann Pi = <dy - z^2 dx>; not a contact structure (no Reeb data).
    model.annihilator = {OneFormField(std::vector<ScalarField>{
        ScalarField::polynomial(m, 2, {0.0, 0.0, -1.0}), ScalarField::constant(m, 1.0),
        ScalarField::constant(m, 0.0)})};

    model.known_integrals.push_back({"H", sr_hamiltonian(model.frame)});
    model.known_integrals.push_back({"I2", CotangentScalar::phase_coordinate(m, m + 0)});
    model.known_integrals.push_back({"I3", CotangentScalar::phase_coordinate(m, m + 1)});

    model.sample_box = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    return model;
}

ModelSpec make_engel() {
    const int m = 4;
    ModelSpec model;
    model.name = "engel";
    model.dimension = m;

    // xi1 = dx + z dy + w dz, xi2 = dw on R^4(x, y, z, w)
    VectorField xi1(std::vector<ScalarField>{
        ScalarField::constant(m, 1.0), ScalarField::coordinate(m, 2), ScalarField::coordinate(m, 3),
        ScalarField::constant(m, 0.0)});
    model.frame = Frame({xi1, VectorField::basis(m, 3)});

    model.annihilator = {
        OneFormField(std::vector<ScalarField>{
            ScalarField::linear_combination({{-1.0, ScalarField::coordinate(m, 2)}}),
            ScalarField::constant(m, 1.0), ScalarField::constant(m, 0.0),
            ScalarField::constant(m, 0.0)}),
        OneFormField(std::vector<ScalarField>{
            ScalarField::linear_combination({{-1.0, ScalarField::coordinate(m, 3)}}),
            ScalarField::constant(m, 0.0), ScalarField::constant(m, 1.0),
            ScalarField::constant(m, 0.0)})};

    model.known_integrals.push_back({"H", sr_hamiltonian(model.frame)});
    model.known_integrals.push_back({"I2", CotangentScalar::phase_coordinate(m, m + 0)});
    model.known_integrals.push_back({"I3", CotangentScalar::phase_coordinate(m, m + 1)});

    model.sample_box = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    return model;
}

double require_parameter(const std::map<std::string, double>& params, const std::string& key,
                         const std::string& model) {
    auto it = params.find(key);
    if (it == params.end())
        throw domain_error("missing required parameter '" + key + "' for " + model);
    return it->second;
}

void check_jacobi(const LiePoissonModel& model) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            // antisymmetry
            for (int k = 0; k < 3; ++k)
                worst = std::max(worst,
                                 std::abs(model.structure[static_cast<size_t>(k)](i, j) +
                                          model.structure[static_cast<size_t>(k)](j, i)));
            for (int k = 0; k < 3; ++k) {
                Eigen::Vector3d ei = Eigen::Vector3d::Unit(i), ej = Eigen::Vector3d::Unit(j),
                                ek = Eigen::Vector3d::Unit(k);
                const Eigen::Vector3d cyc = model.bracket(model.bracket(ei, ej), ek) +
                                            model.bracket(model.bracket(ej, ek), ei) +
                                            model.bracket(model.bracket(ek, ei), ej);
                worst = std::max(worst, cyc.lpNorm<Eigen::Infinity>());
            }
        }
    if (worst > 1e-12)
        throw numerical_error("lie_poisson_model: structure constants violate the Jacobi identity");
}

void set_bracket(std::array<Eigen::Matrix3d, 3>& c, int i, int j, const Eigen::Vector3d& v) {
    for (int k = 0; k < 3; ++k) {
        c[static_cast<size_t>(k)](i, j) = v(k);
        c[static_cast<size_t>(k)](j, i) = -v(k);
    }
}

}  // namespace

LiePoissonModel lie_poisson_model(const std::string& algebra_id,
                                  const std::map<std::string, double>& parameters) {
    LiePoissonModel model;
    model.name = algebra_id;
    model.parameters = parameters;
    for (auto& mk : model.structure) mk.setZero();
    model.casimir_domain = [](const Eigen::Vector3d&) { return true; };

    if (algebra_id == "lie:h3") {
        set_bracket(model.structure, 0, 1, Eigen::Vector3d(0, 0, 1));
        model.xi1 = Eigen::Vector3d(1, 0, 0);
        model.xi2 = Eigen::Vector3d(0, 1, 0);
        model.casimir = ScalarField::coordinate(3, 2);
    } else if (algebra_id == "lie:solvable-a") {
        const double l1 = require_parameter(parameters, "lambda1", algebra_id);
        const double l2 = require_parameter(parameters, "lambda2", algebra_id);
        if (l1 == l2) throw domain_error("lie:solvable-a requires lambda1 != lambda2");
        set_bracket(model.structure, 0, 2, Eigen::Vector3d(l1, 0, 0));
        set_bracket(model.structure, 1, 2, Eigen::Vector3d(0, l2, 0));
        model.xi1 = Eigen::Vector3d(1, 1, 0);
        model.xi2 = Eigen::Vector3d(0, 0, 1);
        model.casimir = ScalarField::power_product(3, 1.0, {l2, -l1, 0.0});
        model.casimir_domain = [](const Eigen::Vector3d& v) { return v(0) > 0.0 && v(1) > 0.0; };
    } else if (algebra_id == "lie:solvable-b") {
        const double phi = require_parameter(parameters, "phi", algebra_id);
        if (!(phi > 0.0 && phi < M_PI))
            throw domain_error("lie:solvable-b requires phi in (0, pi)");
        set_bracket(model.structure, 0, 2, Eigen::Vector3d(std::cos(phi), std::sin(phi), 0));
        set_bracket(model.structure, 1, 2, Eigen::Vector3d(-std::sin(phi), std::cos(phi), 0));
        model.xi1 = Eigen::Vector3d(1, 0, 0);
        model.xi2 = Eigen::Vector3d(0, 0, 1);
        const double cot = std::cos(phi) / std::sin(phi);
        model.casimir = ScalarField::from_d2(3, [cot](const std::vector<D2>& v) {
            return (v[0] * v[0] + v[1] * v[1]) * exp(2.0 * cot * atan2(v[1], v[0]));
        });
        model.casimir_domain = [](const Eigen::Vector3d& v) { return v(0) > 0.0; };
    } else if (algebra_id == "lie:solvable-c") {
        set_bracket(model.structure, 0, 2, Eigen::Vector3d(1, 1, 0));
        set_bracket(model.structure, 1, 2, Eigen::Vector3d(0, 1, 0));
        model.xi1 = Eigen::Vector3d(1, 0, 0);
        model.xi2 = Eigen::Vector3d(0, 0, 1);
        model.casimir = ScalarField::from_d2(
            3, [](const std::vector<D2>& v) { return v[1] * exp(-v[0] / v[1]); });
        model.casimir_domain = [](const Eigen::Vector3d& v) { return v(1) > 0.0; };
    } else if (algebra_id == "lie:so3") {
        const double sigma = require_parameter(parameters, "sigma", algebra_id);
        if (sigma <= 0.0) throw domain_error("lie:so3 requires sigma > 0");
        set_bracket(model.structure, 0, 1, Eigen::Vector3d(0, 0, 1));
        set_bracket(model.structure, 1, 2, Eigen::Vector3d(1, 0, 0));
        set_bracket(model.structure, 2, 0, Eigen::Vector3d(0, 1, 0));
        model.xi1 = Eigen::Vector3d(1, 0, 0);
        model.xi2 = Eigen::Vector3d(0, sigma, 0);
        model.casimir = ScalarField::linear_combination(
            {{1.0, ScalarField::polynomial(3, 0, {0.0, 0.0, 1.0})},
             {1.0, ScalarField::polynomial(3, 1, {0.0, 0.0, 1.0})},
             {1.0, ScalarField::polynomial(3, 2, {0.0, 0.0, 1.0})}});
    } else if (algebra_id == "lie:sl2-a" || algebra_id == "lie:sl2-b") {
        const double sigma = require_parameter(parameters, "sigma", algebra_id);
        if (sigma <= 0.0) throw domain_error(algebra_id + " requires sigma > 0");
        set_bracket(model.structure, 0, 1, Eigen::Vector3d(0, 0, 1));
        set_bracket(model.structure, 0, 2, Eigen::Vector3d(2, 0, 0));
        set_bracket(model.structure, 1, 2, Eigen::Vector3d(0, -2, 0));
        if (algebra_id == "lie:sl2-a") {
            model.xi1 = Eigen::Vector3d(1, 0, 0);
            model.xi2 = Eigen::Vector3d(0, sigma, 0);
        } else {
            model.xi1 = Eigen::Vector3d(1, 1, 0);
            model.xi2 = Eigen::Vector3d(0, 0, sigma);
        }
        model.casimir = ScalarField::linear_combination(
            {{4.0, ScalarField::coordinate(3, 0) * ScalarField::coordinate(3, 1)},
             {-1.0, ScalarField::polynomial(3, 2, {0.0, 0.0, 1.0})}});
    } else {
        throw domain_error("unknown Lie-Poisson algebra id: " + algebra_id);
    }

    check_jacobi(model);
    return model;
}

std::vector<std::string> catalog_names() {
    return {"torus3",         "heisenberg",     "martinet",       "engel",
            "suspension",     "lie:h3",         "lie:solvable-a", "lie:solvable-b",
            "lie:solvable-c", "lie:so3",        "lie:sl2-a",      "lie:sl2-b"};
}

CatalogEntry catalog_get(const std::string& name, const std::map<std::string, double>& parameters) {
    if (name == "torus3") return {make_torus3()};
    if (name == "heisenberg") return {make_heisenberg()};
    if (name == "martinet") return {make_martinet()};
    if (name == "engel") return {make_engel()};
    if (name == "suspension") {
        Eigen::Matrix2i A;
        A << static_cast<int>(require_parameter(parameters, "A11", name)),
            static_cast<int>(require_parameter(parameters, "A12", name)),
            static_cast<int>(require_parameter(parameters, "A21", name)),
            static_cast<int>(require_parameter(parameters, "A22", name));
        for (const char* key : {"A11", "A12", "A21", "A22"}) {
            const double v = parameters.at(key);
            if (v != std::floor(v))
                throw domain_error("suspension matrix entries must be integers");
        }
        return {make_suspension_model(A)};
    }
    if (name.rfind("lie:", 0) == 0) return {lie_poisson_model(name, parameters)};
    throw domain_error("unknown model name: " + name);
}

std::vector<Vec> sample_configurations(const ModelSpec& model, int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(count));
    for (int s = 0; s < count; ++s) {
        Vec q(model.dimension);
        for (int i = 0; i < model.dimension; ++i) {
            const auto& [lo, hi] = model.sample_box[static_cast<size_t>(i)];
            q(i) = std::uniform_real_distribution<double>(lo, hi)(rng);
        }
        out.push_back(q);
    }
    return out;
}

std::vector<PhasePoint> sample_energy_shell(const ModelSpec& model, int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> np(0.0, 1.0);
    const CotangentScalar H = sr_hamiltonian(model);
    std::vector<PhasePoint> out;
    out.reserve(static_cast<size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        Vec q(model.dimension);
        for (int i = 0; i < model.dimension; ++i) {
            const auto& [lo, hi] = model.sample_box[static_cast<size_t>(i)];
            q(i) = std::uniform_real_distribution<double>(lo, hi)(rng);
        }
        Vec p(model.dimension);
        for (int i = 0; i < model.dimension; ++i) p(i) = np(rng);
        PhasePoint x(q, p);
        const double e = H.value(x);
        if (e < 1e-8) continue;  // too close to the annihilator, resample
        x.p /= std::sqrt(2.0 * e);
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace srflow

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "srflow/abnormal.hpp"
#include "srflow/models.hpp"
#include "test_support.hpp"

using namespace srflow;

namespace {

PhasePoint martinet_surface_point(double x, double y, double z, double py) {
    // S: p_x = -z^2 p_y, p_z = 0
    Vec q(3), p(3);
    q << x, y, z;
    p << -z * z * py, py, 0.0;
    return PhasePoint(q, p);
}

}  // namespace

TEST_CASE("pfaffian closed forms on small skew matrices") {
    Mat A = Mat::Zero(4, 4);
    A(0, 1) = 2.0, A(1, 0) = -2.0;
    A(2, 3) = 3.0, A(3, 2) = -3.0;
    CHECK(pfaffian(A) == doctest::Approx(6.0));  // a12 a34
    std::mt19937_64 rng(21);
    // Pf(A)^2 = det(A) for random skew matrices
    for (int n : {4, 6}) {
        Mat B = Mat::Random(n, n);
        B = (B - B.transpose()).eval();
        CHECK(pfaffian(B) * pfaffian(B) == doctest::Approx(B.determinant()).epsilon(1e-9));
    }
}

TEST_CASE("constraint tangent spaces have the right dimensions") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    const PhasePoint x = martinet_surface_point(0.1, -0.4, 0.7, 1.0);
    CHECK(cm.constraint_values(x).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(cm.tangent_basis(x).cols() == 4);

    const ModelSpec engel = catalog_get("engel", {}).spec();
    const ConstraintManifold ce(engel);
    Vec q(4), p(4);
    q << 0.2, 0.1, 0.4, -0.3;
    p << -(0.4 * 1.0 + (-0.3) * 0.5), 1.0, 0.5, 0.0;  // p_x = -z p_y - w p_z, p_w = 0
    const PhasePoint xe(q, p);
    CHECK(ce.constraint_values(xe).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(ce.tangent_basis(xe).cols() == 6);

    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    const ConstraintManifold ch(heis);
    Vec qh(3), ph(3);
    qh << 0.3, 0.2, 0.5;
    ph << -0.5 * 0.8, 0.8, 0.0;  // annihilates d1 + x3 d2 and d3
    CHECK(ch.tangent_basis(PhasePoint(qh, ph)).cols() == 4);
}

TEST_CASE("restricted form rank drops on the degeneracy surface") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    CHECK(cm.restricted_form_rank(martinet_surface_point(0.2, 0.3, 1.0, 1.0)) == 4);
    CHECK(cm.restricted_form_rank(martinet_surface_point(0.2, 0.3, 0.0, 1.0)) == 2);

    const ModelSpec engel = catalog_get("engel", {}).spec();
    const ConstraintManifold ce(engel);
    Vec q(4), p_generic(4), p_sigma(4);
    q << 0.2, 0.1, 0.4, -0.3;
    p_generic << -(0.4 - 0.3 * 0.5), 1.0, 0.5, 0.0;
    p_sigma << -0.4, 1.0, 0.0, 0.0;  // p_z = 0
    CHECK(ce.restricted_form_rank(PhasePoint(q, p_generic)) == 6);
    CHECK(ce.restricted_form_rank(PhasePoint(q, p_sigma)) == 4);
}

TEST_CASE("rank of the restricted form is always even") {
    std::mt19937_64 rng(31);
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    for (int rep = 0; rep < 20; ++rep) {
        const double z = srflow::testing::random_vec(rng, 1)(0);
        const PhasePoint x = martinet_surface_point(0.0, 0.0, z, 1.0 + 0.2 * rep);
        CHECK(cm.restricted_form_rank(x) % 2 == 0);
    }
}

TEST_CASE("degeneracy locus located on the flat-plane model") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    const PhasePoint seed = martinet_surface_point(0.1, 0.2, 0.6, 1.0);
    Vec dir = Vec::Zero(6);
    dir(2) = -1.0;  // push z through zero
    const auto hit = locate_sigma(cm, seed, dir, 1.5);
    REQUIRE(hit.has_value());
    CHECK(std::abs(hit->x.q(2)) < 1e-10);
    CHECK(std::abs(hit->pfaffian_value) < 1e-10);
}

TEST_CASE("degeneracy locus located on the rank-two model in dimension four") {
    const ModelSpec engel = catalog_get("engel", {}).spec();
    const ConstraintManifold cm(engel);
    Vec q(4), p(4);
    q << 0.0, 0.0, 0.2, 0.1;
    p << -(0.2 + 0.1 * 0.8), 1.0, 0.8, 0.0;
    Vec dir = Vec::Zero(8);
    dir(6) = -1.0;  // push p_z through zero
    const auto hit = locate_sigma(cm, PhasePoint(q, p), dir, 1.5);
    REQUIRE(hit.has_value());
    CHECK(std::abs(hit->x.p(2)) < 1e-10);
}

TEST_CASE("contact models admit no degeneracy locus") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (const char* name : {"heisenberg", "torus3"}) {
        const ModelSpec model = catalog_get(name, {}).spec();
        const ConstraintManifold cm(model);
        int found = 0;
        for (int seg = 0; seg < 100; ++seg) {
            Vec q(3), pr(3);
            for (int i = 0; i < 3; ++i) {
                q(i) = nd(rng);
                pr(i) = nd(rng);
            }
            // project the momentum into the annihilator
            Mat F(2, 3);
            for (int i = 0; i < 2; ++i) F.row(i) = model.frame.field(i).value(q).transpose();
            Vec p = pr - F.transpose() * (F * F.transpose()).ldlt().solve(F * pr);
            if (p.norm() < 1e-3) continue;
            p /= p.norm();
            Vec dir(6);
            for (int i = 0; i < 6; ++i) dir(i) = nd(rng);
            dir /= dir.norm();
            if (locate_sigma(cm, PhasePoint(q, p), dir, 1.5, 60)) ++found;
        }
        CHECK(found == 0);
    }
}

TEST_CASE("kernel direction on the degeneracy locus") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    const PhasePoint x = martinet_surface_point(0.3, -0.1, 0.0, 1.0);
    const Vec k = kernel_direction(cm, x);
    Vec e_x = Vec::Zero(6);
    e_x(0) = 1.0;
    CHECK(std::acos(std::min(1.0, std::abs(k.dot(e_x)))) < 1e-6);

    // off the locus the restricted form is nondegenerate
    CHECK_THROWS_AS(kernel_direction(cm, martinet_surface_point(0.3, -0.1, 0.9, 1.0)),
                    numerical_error);

    const ModelSpec engel = catalog_get("engel", {}).spec();
    const ConstraintManifold ce(engel);
    Vec q(4), p(4);
    q << 0.4, 0.2, -0.3, 0.6;
    p << 0.3, 1.0, 0.0, 0.0;
    const PhasePoint xe = ce.project(PhasePoint(q, p));
    const Vec ke = kernel_direction(ce, xe);
    Vec e_w = Vec::Zero(8);
    e_w(3) = 1.0;
    CHECK(std::acos(std::min(1.0, std::abs(ke.dot(e_w)))) < 1e-6);
}

TEST_CASE("abnormal trace stays on the locus and sweeps the flat direction") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    const PhasePoint x0 = martinet_surface_point(0.0, 0.0, 0.0, 1.0);
    const AbnormalCurve curve = trace_abnormal(cm, x0, 10.0, 1e-2);
    CHECK(curve.max_constraint_violation(cm) < 1e-8);
    double x_min = 0.0, x_max = 0.0;
    for (const auto& pt : curve.points) {
        CHECK(std::abs(pt.q(1)) < 1e-8);
        CHECK(std::abs(pt.q(2)) < 1e-8);
        CHECK(pt.p.norm() > kZeroSectionRadius);
        x_min = std::min(x_min, pt.q(0));
        x_max = std::max(x_max, pt.q(0));
    }
    CHECK(x_max - x_min > 5.0);
}

TEST_CASE("reversing the seed orientation retraces the same curve") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    const PhasePoint x0 = martinet_surface_point(0.0, 0.1, 0.0, 1.0);
    const AbnormalCurve fwd = trace_abnormal(cm, x0, 3.0, 1e-2);
    const AbnormalCurve back = trace_abnormal(cm, x0, -3.0, 1e-2);
    REQUIRE(fwd.points.size() == back.points.size());
    // the line field has no orientation: the backward trace covers the same
    // set with reflected parameter
    for (size_t i = 0; i < fwd.points.size(); ++i) {
        const Vec a = fwd.points[i].flat();
        const Vec b = back.points[i].flat();
        Vec mirrored = 2.0 * x0.flat() - b;
        CHECK((a - mirrored).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("abnormal curves ignore the choice of metric") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    // rescale xi1 by a positive function: same distribution, new metric
    ModelSpec rescaled = martinet;
    const ScalarField factor =
        ScalarField::constant(3, 1.0) + ScalarField::sine(3, 0, 1.0, 0.4);
    rescaled.frame = Frame({martinet.frame.field(0).scaled(factor), martinet.frame.field(1)});

    const ConstraintManifold cm1(martinet), cm2(rescaled);
    const PhasePoint x0 = martinet_surface_point(0.0, -0.2, 0.0, 1.0);
    const AbnormalCurve c1 = trace_abnormal(cm1, x0, 5.0, 1e-2);
    const AbnormalCurve c2 = trace_abnormal(cm2, x0, 5.0, 1e-2);
    REQUIRE(c1.points.size() == c2.points.size());
    for (size_t i = 0; i < c1.points.size(); ++i)
        CHECK((c1.points[i].q - c2.points[i].q).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("engel abnormal trace moves only along the characteristic direction") {
    const ModelSpec engel = catalog_get("engel", {}).spec();
    const ConstraintManifold cm(engel);
    Vec q(4), p(4);
    q << 0.1, 0.2, -0.4, 0.3;
    p << 0.4, 1.0, 0.0, 0.0;
    const PhasePoint x0 = cm.project(PhasePoint(q, p));
    const AbnormalCurve curve = trace_abnormal(cm, x0, 3.0, 1e-2);
    CHECK(curve.max_constraint_violation(cm) < 1e-8);
    for (const auto& pt : curve.points) {
        CHECK(std::abs(pt.q(0) - x0.q(0)) < 1e-8);
        CHECK(std::abs(pt.q(1) - x0.q(1)) < 1e-8);
        CHECK(std::abs(pt.q(2) - x0.q(2)) < 1e-8);
    }
    const double w_span = std::abs(curve.points.back().q(3) - curve.points.front().q(3));
    CHECK(w_span > 2.0);
}

TEST_CASE("zero-section exclusion aborts traces") {
    const ModelSpec martinet = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(martinet);
    Vec q(3), p(3);
    q << 0.0, 0.0, 0.0;
    p << 0.0, 1e-8, 0.0;
    CHECK_THROWS_AS(trace_abnormal(cm, PhasePoint(q, p), 1.0, 1e-2), numerical_error);
}

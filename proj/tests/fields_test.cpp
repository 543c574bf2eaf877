#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "srflow/fields.hpp"
#include "srflow/models.hpp"
#include "test_support.hpp"

using namespace srflow;
using srflow::testing::check_field_derivatives;
using srflow::testing::random_vec;

namespace {

VectorField heisenberg_xi1() {
    return VectorField({ScalarField::constant(3, 1.0), ScalarField::coordinate(3, 2),
                        ScalarField::constant(3, 0.0)});
}

VectorField polynomial_field(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::vector<ScalarField> comps;
    for (int i = 0; i < 3; ++i) {
        ScalarField f = ScalarField::constant(3, ud(rng));
        for (int v = 0; v < 3; ++v)
            f = f + ScalarField::polynomial(3, v, {0.0, ud(rng), ud(rng)});
        // a cross term to keep mixed second derivatives nontrivial
        f = f + ScalarField::coordinate(3, 0) * ScalarField::coordinate(3, (i + 1) % 3);
        comps.push_back(f);
    }
    return VectorField(std::move(comps));
}

}  // namespace

TEST_CASE("derivatives of the field building blocks are exact") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 10; ++rep) {
        const Vec q = random_vec(rng, 3);
        check_field_derivatives(ScalarField::exp_linear(3, 2, -0.96, 1.3), q);
        check_field_derivatives(ScalarField::cosine(3, 0, 2.0, 0.7), q);
        check_field_derivatives(ScalarField::sine(3, 1, 1.5), q);
        check_field_derivatives(ScalarField::polynomial(3, 2, {0.5, -1.0, 2.0, 0.25}), q);
        check_field_derivatives(
            ScalarField::univariate(3, 2, 0.0, 2.0 * M_PI, {0.4}, {1.0, -0.4}), q);
        check_field_derivatives(ScalarField::coordinate(3, 1) * ScalarField::sine(3, 1, 3.0), q);
        check_field_derivatives(ScalarField::from_d2(3,
                                                     [](const std::vector<D2>& v) {
                                                         return sin(v[0] * v[1]) +
                                                                exp(0.3 * v[2]) * v[0];
                                                     }),
                                q);
    }
    // power products need a positive orthant
    std::uniform_real_distribution<double> up(0.2, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        Vec q(3);
        for (int i = 0; i < 3; ++i) q(i) = up(rng);
        check_field_derivatives(ScalarField::power_product(3, 1.0, {2.0, -1.0, 0.0}), q);
    }
}

TEST_CASE("exact partial-derivative fields match finite differences") {
    std::mt19937_64 rng(55);
    const ScalarField f =
        ScalarField::univariate(3, 2, -0.5, 3.0, {1.0, 0.5}, {0.0, 2.0}) *
        ScalarField::polynomial(3, 0, {0.0, 1.0, 1.0});
    for (int rep = 0; rep < 5; ++rep) {
        const Vec q = random_vec(rng, 3);
        for (int j = 0; j < 3; ++j) {
            const ScalarField fj = f.partial(j);
            CHECK(fj.value(q) == doctest::Approx(f.eval(q).grad(j)).epsilon(1e-12));
            check_field_derivatives(fj, q);
        }
    }
}

TEST_CASE("commutator of constant fields vanishes") {
    const VectorField d1 = VectorField::basis(3, 0);
    const VectorField d2 = VectorField::basis(3, 1);
    const Vec q = Eigen::Vector3d(0.3, -0.7, 1.1);
    CHECK(commutator(d1, d2, q).norm() == 0.0);
}

TEST_CASE("nilpotent-frame commutator has the vertical direction") {
    const VectorField xi1 = heisenberg_xi1();
    const VectorField xi2 = VectorField::basis(3, 2);
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const Vec q = random_vec(rng, 3);
        const Vec c = commutator(xi2, xi1, q);
        CHECK(c(0) == doctest::Approx(0.0));
        CHECK(c(1) == doctest::Approx(1.0));
        CHECK(c(2) == doctest::Approx(0.0));
    }
}

TEST_CASE("mapping-torus frame commutator matches the closed form at the base fiber") {
    Eigen::Matrix2i A;
    A << 2, 1, 1, 1;
    const ModelSpec model = make_suspension_model(A);
    const double l = model.parameters.at("log_lambda");
    CHECK(std::exp(l) == doctest::Approx(0.5 * (3.0 + std::sqrt(5.0))).epsilon(1e-14));

    const Eigen::Matrix2d E = model.quotient.monodromy->eigenbasis;
    Vec q = Eigen::Vector3d(0.2, 0.7, 0.0);  // base fiber
    const Vec c = commutator(model.frame.field(1), model.frame.field(0), q);
    const Eigen::Vector2d expected = l * (-E.col(0) + E.col(1));
    CHECK(c(0) == doctest::Approx(expected(0)).epsilon(1e-12));
    CHECK(c(1) == doctest::Approx(expected(1)).epsilon(1e-12));
    CHECK(c(2) == doctest::Approx(0.0));
}

TEST_CASE("commutator antisymmetry is exact") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const VectorField X = polynomial_field(rng);
        const VectorField Y = polynomial_field(rng);
        const Vec q = random_vec(rng, 3);
        const Vec a = commutator(X, Y, q);
        const Vec b = commutator(Y, X, q);
        CHECK((a + b).lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + a.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("jacobi identity holds for polynomial fields") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        const VectorField X = polynomial_field(rng);
        const VectorField Y = polynomial_field(rng);
        const VectorField Z = polynomial_field(rng);
        const Vec q = random_vec(rng, 3, 0.5);
        const Vec cyc = commutator(X, commutator_field(Y, Z), q) +
                        commutator(Y, commutator_field(Z, X), q) +
                        commutator(Z, commutator_field(X, Y), q);
        CHECK(cyc.lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("exterior derivative of a constant form vanishes") {
    const OneFormField alpha = OneFormField::constant(3, Eigen::Vector3d(0.3, -1.0, 2.0));
    const VectorField X = VectorField::basis(3, 0);
    const VectorField Y = VectorField::constant(3, Eigen::Vector3d(1.0, 2.0, -1.0));
    CHECK(exterior_two_form(alpha, X, Y, Eigen::Vector3d(0.1, 0.2, 0.3)) == 0.0);
}

TEST_CASE("flat-plane annihilator form has the printed area density") {
    // alpha = dy - z^2 dx on R^3(x, y, z)
    const OneFormField alpha({ScalarField::polynomial(3, 2, {0.0, 0.0, -1.0}),
                              ScalarField::constant(3, 1.0), ScalarField::constant(3, 0.0)});
    const VectorField dz = VectorField::basis(3, 2);
    const VectorField dx = VectorField::basis(3, 0);
    const Vec q = Eigen::Vector3d(0.4, -0.2, 1.0);
    CHECK(exterior_two_form(alpha, dz, dx, q) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("suspension contact form pairs to -1 against its frame") {
    for (auto entries : {std::array<int, 4>{2, 1, 1, 1}, std::array<int, 4>{0, 1, -1, 0},
                         std::array<int, 4>{1, 1, 0, 1}}) {
        Eigen::Matrix2i A;
        A << entries[0], entries[1], entries[2], entries[3];
        const ModelSpec model = make_suspension_model(A);
        std::mt19937_64 rng(17);
        for (int rep = 0; rep < 10; ++rep) {
            const Vec q = random_vec(rng, 3);
            const double v = exterior_two_form(*model.contact_form, model.frame.field(0),
                                               model.frame.field(1), q);
            CHECK(v == doctest::Approx(-1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("exterior two-form is antisymmetric and bilinear") {
    std::mt19937_64 rng(19);
    const OneFormField alpha({ScalarField::sine(3, 0, 1.0), ScalarField::coordinate(3, 2),
                              ScalarField::polynomial(3, 1, {0.0, 0.0, 0.5})});
    for (int rep = 0; rep < 10; ++rep) {
        const VectorField X = polynomial_field(rng);
        const VectorField Y = polynomial_field(rng);
        const Vec q = random_vec(rng, 3);
        const double xy = exterior_two_form(alpha, X, Y, q);
        const double yx = exterior_two_form(alpha, Y, X, q);
        CHECK(xy == doctest::Approx(-yx).epsilon(1e-12));
        const double scaled = exterior_two_form(alpha, X.scaled(2.5), Y, q);
        CHECK(scaled == doctest::Approx(2.5 * xy).epsilon(1e-12));
    }
}

TEST_CASE("cartan formula agrees with the coordinate evaluation") {
    std::mt19937_64 rng(23);
    const OneFormField alpha({ScalarField::sine(3, 0, 1.0), ScalarField::coordinate(3, 2),
                              ScalarField::polynomial(3, 1, {0.0, 0.0, 0.5})});
    for (int rep = 0; rep < 5; ++rep) {
        const VectorField X = polynomial_field(rng);
        const VectorField Y = polynomial_field(rng);
        const Vec q = random_vec(rng, 3, 0.5);
        // X(alpha(Y)) - Y(alpha(X)) - alpha([X, Y])
        std::vector<std::pair<double, ScalarField>> ay_terms, ax_terms;
        for (int j = 0; j < 3; ++j) {
            ay_terms.emplace_back(1.0, alpha.component(j) * Y.component(j));
            ax_terms.emplace_back(1.0, alpha.component(j) * X.component(j));
        }
        const ScalarField aY = ScalarField::linear_combination(ay_terms);
        const ScalarField aX = ScalarField::linear_combination(ax_terms);
        const double cartan = aY.eval(q).grad.dot(X.value(q)) -
                              aX.eval(q).grad.dot(Y.value(q)) -
                              alpha.value(q).dot(commutator(X, Y, q));
        CHECK(exterior_two_form(alpha, X, Y, q) == doctest::Approx(cartan).epsilon(1e-10));
    }
}

TEST_CASE("bracket generation depths match the catalog geometry") {
    std::mt19937_64 rng(29);
    const Vec q = random_vec(rng, 3);

    const Frame heis({heisenberg_xi1(), VectorField::basis(3, 2)});
    const auto r1 = bracket_generating_check(heis, q, 4);
    CHECK(r1.spans);
    CHECK(r1.depth == 2);

    // x' = dx + z^2 dy, z' = dz: the depth-2 bracket vanishes on {z = 0}
    const VectorField mx({ScalarField::constant(3, 1.0),
                          ScalarField::polynomial(3, 2, {0.0, 0.0, 1.0}),
                          ScalarField::constant(3, 0.0)});
    const Frame martinet({mx, VectorField::basis(3, 2)});
    const auto r2 = bracket_generating_check(martinet, Eigen::Vector3d(0.2, 0.4, 0.0), 4);
    CHECK(r2.spans);
    CHECK(r2.depth == 3);
    const auto r2_generic = bracket_generating_check(martinet, Eigen::Vector3d(0.2, 0.4, 0.8), 4);
    CHECK(r2_generic.depth == 2);

    const Frame involutive({VectorField::basis(3, 0), VectorField::basis(3, 1)});
    const auto r3 = bracket_generating_check(involutive, q, 5);
    CHECK_FALSE(r3.spans);
    CHECK(r3.depth == 5);
}

TEST_CASE("frames reject dimension mismatches") {
    CHECK_THROWS_AS(commutator(VectorField::basis(3, 0), VectorField::basis(2, 0),
                               Eigen::Vector3d(0, 0, 0)),
                    domain_error);
    CHECK_THROWS_AS(VectorField({ScalarField::constant(2, 1.0)}), domain_error);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srflow/hamiltonian.hpp"
#include "srflow/models.hpp"
#include "test_support.hpp"

using namespace srflow;
using srflow::testing::random_vec;

namespace {

Eigen::Matrix2i anosov_matrix() {
    Eigen::Matrix2i A;
    A << 2, 1, 1, 1;
    return A;
}

}  // namespace

TEST_CASE("momentum pairing values") {
    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    const CotangentScalar p1 = CotangentScalar::momentum(VectorField::basis(3, 1));
    CHECK(p1.value(PhasePoint(Eigen::Vector3d(0.3, 0.2, 0.1), Eigen::Vector3d(0.0, 1.0, 0.0))) ==
          doctest::Approx(1.0));
    const CotangentScalar pk = momentum_function(heis.frame.field(0));
    CHECK(pk.value(PhasePoint(Eigen::Vector3d(0.0, 0.0, 2.0), Eigen::Vector3d(1.0, 1.0, 0.0))) ==
          doctest::Approx(3.0));
    CHECK(pk.value(PhasePoint(Eigen::Vector3d(0.4, 0.5, 0.6), Eigen::Vector3d::Zero())) == 0.0);
}

TEST_CASE("sub-riemannian hamiltonian values") {
    const ModelSpec torus = catalog_get("torus3", {}).spec();
    const CotangentScalar Ht = sr_hamiltonian(torus);
    CHECK(Ht.value(PhasePoint(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 1, 0))) ==
          doctest::Approx(0.5).epsilon(1e-15));

    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    const CotangentScalar Hh = sr_hamiltonian(heis);
    CHECK(Hh.value(PhasePoint(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 1))) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Hh.value(PhasePoint(Eigen::Vector3d(0.7, 0.1, 0.4), Eigen::Vector3d::Zero())) == 0.0);
}

TEST_CASE("hamilton right-hand side matches the printed equations") {
    const ModelSpec torus = catalog_get("torus3", {}).spec();
    const CotangentScalar H = sr_hamiltonian(torus);
    const auto rhs = hamilton_rhs(H, PhasePoint(Eigen::Vector3d(0, 0, 0),
                                                Eigen::Vector3d(1, 1, 1)));
    CHECK(rhs.qdot(0) == doctest::Approx(1.0));
    CHECK(rhs.qdot(1) == doctest::Approx(1.0));
    CHECK(rhs.qdot(2) == doctest::Approx(0.0));
    CHECK(rhs.pdot(0) == doctest::Approx(1.0));
    CHECK(rhs.pdot(1) == doctest::Approx(0.0));
    CHECK(rhs.pdot(2) == doctest::Approx(0.0));

    const auto zero = hamilton_rhs(H, PhasePoint(Eigen::Vector3d(0.3, 0.1, 0.9),
                                                 Eigen::Vector3d::Zero()));
    CHECK(zero.qdot.norm() == 0.0);
    CHECK(zero.pdot.norm() == 0.0);

    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    const auto hr = hamilton_rhs(sr_hamiltonian(heis),
                                 PhasePoint(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 1)));
    CHECK(hr.qdot(0) == doctest::Approx(0.0));
    CHECK(hr.qdot(1) == doctest::Approx(0.0));
    CHECK(hr.qdot(2) == doctest::Approx(1.0));
    CHECK(hr.pdot.norm() == doctest::Approx(0.0));
}

TEST_CASE("poisson bracket basics") {
    const int m = 3;
    const CotangentScalar q1 = CotangentScalar::phase_coordinate(m, 0);
    const CotangentScalar p1 = CotangentScalar::phase_coordinate(m, m);
    std::mt19937_64 rng(5);
    const PhasePoint x(random_vec(rng, 3), random_vec(rng, 3));
    CHECK(poisson_bracket(q1, p1, x) == doctest::Approx(1.0));

    const ModelSpec torus = catalog_get("torus3", {}).spec();
    const CotangentScalar H = sr_hamiltonian(torus);
    for (int rep = 0; rep < 20; ++rep) {
        const PhasePoint y(random_vec(rng, 3), random_vec(rng, 3));
        CHECK(std::abs(poisson_bracket(H, torus.known_integrals[1].function, y)) < 1e-14);
        CHECK(std::abs(poisson_bracket(H, H, y)) < 1e-14);
    }
}

TEST_CASE("bracket antisymmetry and rhs consistency") {
    const ModelSpec model = make_suspension_model(anosov_matrix());
    const CotangentScalar H = sr_hamiltonian(model);
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 10; ++rep) {
        const PhasePoint x(random_vec(rng, 3), random_vec(rng, 3));
        for (size_t a = 0; a < model.known_integrals.size(); ++a)
            for (size_t b = 0; b < model.known_integrals.size(); ++b) {
                const double ab = poisson_bracket(model.known_integrals[a].function,
                                                  model.known_integrals[b].function, x);
                const double ba = poisson_bracket(model.known_integrals[b].function,
                                                  model.known_integrals[a].function, x);
                CHECK(std::abs(ab + ba) <= 1e-14 * (1.0 + std::abs(ab)));
            }
        const auto rhs = hamilton_rhs(H, x);
        for (int i = 0; i < 3; ++i) {
            const CotangentScalar qi = CotangentScalar::phase_coordinate(3, i);
            const CotangentScalar pi = CotangentScalar::phase_coordinate(3, 3 + i);
            CHECK(poisson_bracket(qi, H, x) == doctest::Approx(rhs.qdot(i)).epsilon(1e-12));
            CHECK(poisson_bracket(pi, H, x) == doctest::Approx(rhs.pdot(i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("suspension integrals commute on the energy shell") {
    for (auto A : {anosov_matrix(), [] {
                       Eigen::Matrix2i M;
                       M << 0, 1, -1, 0;
                       return M;
                   }()}) {
        const ModelSpec model = make_suspension_model(A);
        for (const auto& x : sample_energy_shell(model, 200, 2024)) {
            for (size_t a = 0; a < model.known_integrals.size(); ++a)
                for (size_t b = a + 1; b < model.known_integrals.size(); ++b)
                    CHECK(std::abs(poisson_bracket(model.known_integrals[a].function,
                                                   model.known_integrals[b].function, x)) <
                          1e-10);
        }
    }
}

TEST_CASE("lie-poisson flow fixes the vertical axis of the rotation algebra") {
    const LiePoissonModel so3 = lie_poisson_model("lie:so3", {{"sigma", 1.0}});
    const Eigen::Vector3d rhs = lie_poisson_rhs(so3, AlgebraPoint(Eigen::Vector3d(0, 0, 1)));
    CHECK(rhs.norm() == doctest::Approx(0.0));

    const LiePoissonModel h3 = lie_poisson_model("lie:h3", {});
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Vector3d m = Eigen::Vector3d(random_vec(rng, 3));
        CHECK(lie_poisson_rhs(h3, AlgebraPoint(m))(2) == doctest::Approx(0.0));
    }
}

TEST_CASE("lie-poisson bracket realizes the algebra on linear functions") {
    // {L_v, L_w}(m) = <m, [v, w]> fixes the sign convention.
    std::mt19937_64 rng(9);
    for (const auto& id : {"lie:so3", "lie:sl2-a"}) {
        const LiePoissonModel model = lie_poisson_model(id, {{"sigma", 1.0}});
        for (int rep = 0; rep < 10; ++rep) {
            const Eigen::Vector3d v = Eigen::Vector3d(random_vec(rng, 3));
            const Eigen::Vector3d w = Eigen::Vector3d(random_vec(rng, 3));
            const Eigen::Vector3d m = Eigen::Vector3d(random_vec(rng, 3));
            // Direct evaluation of {L_v, L_w} from the structure constants:
            double lhs = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        lhs += model.structure[static_cast<size_t>(k)](i, j) * m(k) * v(i) * w(j);
            CHECK(lhs == doctest::Approx(m.dot(model.bracket(v, w))).epsilon(1e-12));
        }
    }
}

TEST_CASE("reeb momentum values and homogeneity") {
    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    const CotangentScalar ig = reeb_momentum(heis);
    CHECK(ig.value(PhasePoint(Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 1, 0))) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ig.value(PhasePoint(Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 0, 5))) ==
          doctest::Approx(0.0));
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 10; ++rep) {
        const Vec q = random_vec(rng, 3), p = random_vec(rng, 3);
        CHECK(ig.value(PhasePoint(q, 2.0 * p)) ==
              doctest::Approx(4.0 * ig.value(PhasePoint(q, p))).epsilon(1e-13));
    }
    CHECK_THROWS_AS(reeb_momentum(catalog_get("martinet", {}).spec()), domain_error);
}

TEST_CASE("riemannian extension identity holds pointwise") {
    std::mt19937_64 rng(12);
    for (const auto& name : {"heisenberg", "torus3"}) {
        const ModelSpec model = catalog_get(name, {}).spec();
        const auto ext = riemannian_extension(model);
        const CotangentScalar H = sr_hamiltonian(model);
        const CotangentScalar ig = reeb_momentum(model);
        for (int rep = 0; rep < 50; ++rep) {
            const PhasePoint x(random_vec(rng, 3), random_vec(rng, 3));
            CHECK(std::abs(ext.full.value(x) - H.value(x) - ig.value(x)) < 1e-12);
        }
        // p annihilating the Reeb direction: the extension adds nothing
        const Vec q = random_vec(rng, 3);
        Vec p = random_vec(rng, 3);
        const Vec nu = model.reeb_field->value(q);
        p -= p.dot(nu) / nu.squaredNorm() * nu;
        const PhasePoint x0(q, p);
        CHECK(ext.full.value(x0) == doctest::Approx(H.value(x0)).epsilon(1e-12));
        // family limit: H + t I_g -> H
        const PhasePoint x1(random_vec(rng, 3), random_vec(rng, 3));
        double prev = std::abs(ext.family(1.0).value(x1) - H.value(x1));
        for (double t : {0.1, 0.01, 1e-4}) {
            const double gap = std::abs(ext.family(t).value(x1) - H.value(x1));
            CHECK(gap < prev + 1e-15);
            prev = gap;
        }
        CHECK(prev < 1e-3);
        CHECK_THROWS_AS(ext.family(0.0), domain_error);
    }
}

TEST_CASE("reeb symmetry: conserved for the nilpotent model, broken by shear and perturbation") {
    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    CHECK(reeb_symmetry_check(heis, 200) < 1e-10);

    // The flat-torus Reeb flow shears the distribution plane, so its
    // momentum is not conserved: {I_g, H} = (sin q1 p2 + cos q1 p3)
    //                                      (cos q1 p2 - sin q1 p3) p1.
    const ModelSpec torus = catalog_get("torus3", {}).spec();
    const double torus_residual = reeb_symmetry_check(torus, 200);
    CHECK(torus_residual > 0.05);
    const CotangentScalar ig = reeb_momentum(torus);
    const CotangentScalar H = sr_hamiltonian(torus);
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const PhasePoint x(random_vec(rng, 3), random_vec(rng, 3));
        const double j = std::sin(x.q(0)) * x.p(1) + std::cos(x.q(0)) * x.p(2);
        const double k = std::cos(x.q(0)) * x.p(1) - std::sin(x.q(0)) * x.p(2);
        CHECK(poisson_bracket(ig, H, x) == doctest::Approx(j * k * x.p(0)).epsilon(1e-10));
    }

    // a configuration-dependent rescaling along the Reeb coordinate breaks
    // the symmetry of the nilpotent model by an order-one amount
    ModelSpec perturbed = heis;
    const ScalarField bump =
        ScalarField::constant(3, 1.0) + ScalarField::sine(3, 1, 1.0, 0.5);
    perturbed.frame = Frame({heis.frame.field(0).scaled(bump), heis.frame.field(1)});
    CHECK(reeb_symmetry_check(perturbed, 200) > 0.1);
}

TEST_CASE("every catalog integral commutes with its hamiltonian on the shell") {
    std::vector<ModelSpec> models = {
        catalog_get("torus3", {}).spec(), catalog_get("heisenberg", {}).spec(),
        catalog_get("martinet", {}).spec(), catalog_get("engel", {}).spec()};
    Eigen::Matrix2i A;
    A << 2, 1, 1, 1;
    models.push_back(make_suspension_model(A));
    for (const auto& model : models) {
        const CotangentScalar H = sr_hamiltonian(model);
        for (const auto& x : sample_energy_shell(model, 200, 555))
            for (const auto& ni : model.known_integrals)
                CHECK(std::abs(poisson_bracket(ni.function, H, x)) < 1e-10);
    }
}

TEST_CASE("phase derivatives of the hamiltonian layer are exact") {
    const ModelSpec model = make_suspension_model(anosov_matrix());
    const CotangentScalar H = sr_hamiltonian(model);
    const CotangentScalar ig = reeb_momentum(model);
    const CotangentScalar pk = CotangentScalar::momentum(model.frame.field(0));
    std::mt19937_64 rng(66);
    for (int rep = 0; rep < 5; ++rep) {
        const PhasePoint x(random_vec(rng, 3), random_vec(rng, 3));
        srflow::testing::check_phase_derivatives(H, x);
        srflow::testing::check_phase_derivatives(ig, x);
        srflow::testing::check_phase_derivatives(pk, x);
    }
    const ModelSpec heis = catalog_get("heisenberg", {}).spec();
    const auto ext = riemannian_extension(heis);
    for (int rep = 0; rep < 3; ++rep) {
        const PhasePoint x(random_vec(rng, 3), random_vec(rng, 3));
        srflow::testing::check_phase_derivatives(ext.full, x);
        srflow::testing::check_phase_derivatives(ext.family(0.5), x);
    }
}

TEST_CASE("hyperbolic suspension is not reeb-symmetric") {
    // [nu, xi2] = ln^2(lambda) xi1 shears the frame, so the Reeb momentum is
    // a first integral only along the fiber direction, not globally.
    const ModelSpec model = make_suspension_model(anosov_matrix());
    CHECK(reeb_symmetry_check(model, 200) > 0.01);
}

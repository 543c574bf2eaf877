#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srflow/analysis.hpp"
#include "srflow/hamiltonian.hpp"
#include "test_support.hpp"

using namespace srflow;

namespace {

Eigen::Matrix2i mat(int a, int b, int c, int d) {
    Eigen::Matrix2i M;
    M << a, b, c, d;
    return M;
}

const double kAnosovEntropy = std::log(0.5 * (3.0 + std::sqrt(5.0)));

}  // namespace

TEST_CASE("exact toral entropy closed forms") {
    Eigen::MatrixXi A(2, 2);
    A << 2, 1, 1, 1;
    CHECK(std::abs(toral_entropy(A) - kAnosovEntropy) < 1e-15);

    Eigen::MatrixXi I2 = Eigen::MatrixXi::Identity(2, 2);
    CHECK(toral_entropy(I2) == 0.0);

    Eigen::MatrixXi B(2, 2);
    B << 1, 1, 0, 1;
    CHECK(toral_entropy(B) == 0.0);

    Eigen::MatrixXi R(2, 2);
    R << 0, 1, -1, 0;
    CHECK(toral_entropy(R) == 0.0);

    Eigen::MatrixXi bad(2, 2);
    bad << 2, 0, 0, 2;
    CHECK_THROWS_AS(toral_entropy(bad), domain_error);

    // a 3x3 case through the eigenvalue route: block diag(anosov, 1)
    Eigen::MatrixXi C = Eigen::MatrixXi::Identity(3, 3);
    C(0, 0) = 2, C(0, 1) = 1, C(1, 0) = 1, C(1, 1) = 1;
    CHECK(toral_entropy(C) == doctest::Approx(kAnosovEntropy).epsilon(1e-12));
}

TEST_CASE("toral entropy is inversion и power covariant") {
    Eigen::MatrixXi A(2, 2);
    A << 2, 1, 1, 1;
    Eigen::MatrixXi Ainv(2, 2);
    Ainv << 1, -1, -1, 2;
    CHECK(toral_entropy(Ainv) == doctest::Approx(toral_entropy(A)).epsilon(1e-14));
    // h(A^k) = |k| h(A) for k in [-3, 3]
    auto ipow = [&](int k) {
        Eigen::Matrix2i M = Eigen::Matrix2i::Identity();
        Eigen::Matrix2i base = k >= 0 ? mat(2, 1, 1, 1) : mat(1, -1, -1, 2);
        for (int i = 0; i < std::abs(k); ++i) M = base * M;
        Eigen::MatrixXi out = M;
        return out;
    };
    for (int k = -3; k <= 3; ++k)
        CHECK(toral_entropy(ipow(k)) ==
              doctest::Approx(std::abs(k) * kAnosovEntropy).epsilon(1e-12));
}

TEST_CASE("spanning estimator reproduces the exact entropy for the anosov map") {
    const auto est = spanning_entropy(TorusMap::from_matrix(mat(2, 1, 1, 1)), {0.01}, 4, 14);
    CHECK(est.method == "spanning-count");
    CHECK(std::abs(est.value - kAnosovEntropy) < 0.15 * kAnosovEntropy);
    const auto id_est = spanning_entropy(TorusMap::from_matrix(mat(1, 0, 0, 1)), {0.01}, 4, 14);
    CHECK(id_est.value < 0.05);
    const auto rot_est = spanning_entropy(TorusMap::from_matrix(mat(0, 1, -1, 0)), {0.01}, 4, 14);
    CHECK(rot_est.value < 0.05);
}

TEST_CASE("grid-greedy and lattice-cover mechanisms agree where both resolve") {
    const TorusMap f = TorusMap::from_matrix(mat(2, 1, 1, 1));
    const auto lattice =
        spanning_entropy(f, {0.1}, 1, 4, SpanningMechanism::lattice_cover);
    const auto grid = spanning_entropy(f, {0.1}, 1, 4, SpanningMechanism::grid_greedy);
    CHECK(grid.variant == "grid-greedy");
    CHECK(std::abs(grid.value - lattice.value) < 0.15 * lattice.value);
    CHECK(std::abs(grid.value - kAnosovEntropy) < 0.15 * kAnosovEntropy);
}

TEST_CASE("spanning counts are monotone non-increasing in the scale") {
    const auto est = spanning_entropy(TorusMap::from_matrix(mat(2, 1, 1, 1)),
                                      {0.04, 0.02, 0.01}, 4, 10);
    REQUIRE(est.ln_counts.size() == 3);  // stored coarse to fine
    for (size_t e = 0; e + 1 < est.ln_counts.size(); ++e)
        for (size_t i = 0; i < est.ln_counts[e].size(); ++i)
            CHECK(est.ln_counts[e][i] <= est.ln_counts[e + 1][i] + 1e-12);
}

TEST_CASE("spanning estimator rejects bad ranges and over-budget grids") {
    const TorusMap f = TorusMap::from_matrix(mat(2, 1, 1, 1));
    CHECK_THROWS_AS(spanning_entropy(f, {0.01}, 4, 6), domain_error);  // < 4 points
    CHECK_THROWS_AS(
        spanning_entropy(f, {0.001}, 1, 5, SpanningMechanism::grid_greedy, kDefaultSeed, 10000),
        domain_error);  // grid larger than the budget
}

TEST_CASE("integrability certification for the flat torus") {
    const ModelSpec model = catalog_get("torus3", {}).spec();
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.sample_stride = 50;
    const IntegrabilityReport rep = verify_first_integrals(model, 3, 20.0, cfg, 300);
    CHECK(rep.integral_drift.at("I2") < 1e-10);
    CHECK(rep.integral_drift.at("I3") < 1e-10);
    CHECK(rep.max_bracket_residual() < 1e-10);
    CHECK(rep.rank_fraction(3) > 0.99);
}

TEST_CASE("integrability certification for the three mapping-torus cases") {
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.sample_stride = 50;
    struct Case {
        Eigen::Matrix2i A;
        double drift_tol;
    };
    const std::vector<Case> cases = {
        {mat(2, 1, 1, 1), 1e-6}, {mat(0, 1, -1, 0), 1e-8}, {mat(1, 1, 0, 1), 1e-6}};
    for (const auto& c : cases) {
        const ModelSpec model = make_suspension_model(c.A);
        const IntegrabilityReport rep = verify_first_integrals(model, 2, 20.0, cfg, 400);
        CHECK(rep.max_bracket_residual() < 1e-10);
        CHECK(rep.max_drift() < c.drift_tol);
        CHECK(rep.rank_fraction(3) >= 0.95);
    }
}

TEST_CASE("independence rank matches the stratification") {
    const ModelSpec model = make_suspension_model(mat(2, 1, 1, 1));
    const Eigen::Matrix2d E = model.quotient.monodromy->eigenbasis;
    auto point = [&](double pa, double pb, double p3) {
        const Eigen::Vector2d pt = E.transpose().inverse() * Eigen::Vector2d(pa, pb);
        Vec p(3);
        p << pt(0), pt(1), p3;
        return PhasePoint(Eigen::Vector3d(0.2, 0.4, 0.3), p);
    };
    CHECK(independence_rank(model, point(0.9, 0.8, 0.7)) == 3);
    CHECK(independence_rank(model, point(0.0, 0.0, 1.0)) == 1);  // only dH survives
    // deep in the flat region the direction information still certifies rank 3
    CHECK(independence_rank(model, point(0.05, 0.4, 0.7)) == 3);

    const ModelSpec torus = catalog_get("torus3", {}).spec();
    std::mt19937_64 rng(4);
    CHECK(independence_rank(
              torus, PhasePoint(srflow::testing::random_vec(rng, 3),
                                Eigen::Vector3d(0.3, 0.8, -0.5))) == 3);
}

TEST_CASE("lyapunov exponents on the invariant set reach the deck rate") {
    const ModelSpec model = make_suspension_model(mat(2, 1, 1, 1));
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    const LyapunovSpectrum spec =
        lyapunov_spectrum(model, PhasePoint(Eigen::Vector3d(0, 0, 0),
                                            Eigen::Vector3d(0, 0, 1)),
                          100.0, cfg);
    CHECK(std::abs(spec.leading() - kAnosovEntropy) < 0.02 * kAnosovEntropy);
    // pairing: the multiset is symmetric about zero
    const auto& ex = spec.exponents;
    for (size_t i = 0; i < ex.size(); ++i)
        CHECK(std::abs(ex[i] + ex[ex.size() - 1 - i]) <
              std::max(1e-6, spec.convergence));
    // at least two exponents vanish (flow direction and energy gradient)
    int near_zero = 0;
    for (double e : ex)
        if (std::abs(e) < 1e-4) ++near_zero;
    CHECK(near_zero >= 2);
}

TEST_CASE("generic orbits of the rotation case carry no exponents") {
    // integrable orbits: the accumulated rates decay like 1/T, so the 1e-3
    // bound needs a long horizon
    const ModelSpec model = make_suspension_model(mat(0, 1, -1, 0));
    IntegratorConfig cfg;
    cfg.dt = 5e-3;
    const auto shell = sample_energy_shell(model, 1, 321);
    const LyapunovSpectrum spec = lyapunov_spectrum(model, shell.front(), 5000.0, cfg);
    for (double e : spec.exponents) CHECK(std::abs(e) < 1e-3);
}

TEST_CASE("generic flat-torus orbits carry no exponents") {
    const ModelSpec model = catalog_get("torus3", {}).spec();
    IntegratorConfig cfg;
    cfg.dt = 5e-3;
    const auto shell = sample_energy_shell(model, 1, 99);
    const LyapunovSpectrum spec = lyapunov_spectrum(model, shell.front(), 5000.0, cfg);
    for (double e : spec.exponents) CHECK(std::abs(e) < 1e-3);
}

TEST_CASE("directional profile reproduces the entropy along the hamiltonian axis") {
    const ModelSpec model = make_suspension_model(mat(2, 1, 1, 1));
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    const auto est = directional_entropy_profile(model, Eigen::Vector3d(1, 0, 0), 100.0, cfg);
    CHECK(est.method == "lyapunov-proxy");
    CHECK(std::abs(est.value - kAnosovEntropy) < 0.05 * kAnosovEntropy);

    for (double t2 : {-1.0, 1.0})
        for (double t3 : {-1.0, 1.0}) {
            const auto deg =
                directional_entropy_profile(model, Eigen::Vector3d(0, t2, t3), 100.0, cfg);
            CHECK(deg.value < 1e-3);
        }

    CHECK(directional_entropy_profile(model, Eigen::Vector3d::Zero(), 100.0, cfg).value == 0.0);
    CHECK_THROWS_AS(directional_entropy_profile(catalog_get("torus3", {}).spec(),
                                                Eigen::Vector3d(1, 0, 0), 10.0, cfg),
                    domain_error);
}

TEST_CASE("directional profile is absolutely homogeneous") {
    const ModelSpec model = make_suspension_model(mat(2, 1, 1, 1));
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    const double base =
        directional_entropy_profile(model, Eigen::Vector3d(1, 0, 0), 100.0, cfg).value;
    for (double c : {-2.0, -1.0, 2.0}) {
        const auto scaled =
            directional_entropy_profile(model, Eigen::Vector3d(c, 0, 0), 100.0, cfg);
        CHECK(std::abs(scaled.value - std::abs(c) * base) < 0.05 * std::abs(c) * base);
    }
}

TEST_CASE("composition table: exact subadditivity for commuting pairs and the counterexample") {
    const Eigen::Matrix2i A = mat(2, 1, 1, 1);
    const Eigen::Matrix2i B = mat(1, 1, 0, 1);
    const auto rows = composition_entropy_table(
        {{A, A * A}, {B, B.transpose()}, {mat(1, 0, 0, 1), A}});

    REQUIRE(rows.size() == 3);
    CHECK(rows[0].commuting);
    CHECK_FALSE(rows[0].violates_subadditivity);
    CHECK(rows[0].h_fg == doctest::Approx(3.0 * kAnosovEntropy).epsilon(1e-12));
    CHECK(rows[0].h_fg == doctest::Approx(rows[0].h_f + rows[0].h_g).epsilon(1e-12));

    CHECK_FALSE(rows[1].commuting);
    CHECK(rows[1].h_f == 0.0);
    CHECK(rows[1].h_g == 0.0);
    CHECK(rows[1].h_fg == doctest::Approx(kAnosovEntropy).epsilon(1e-12));

    CHECK(rows[2].commuting);
    CHECK(rows[2].h_fg == doctest::Approx(rows[2].h_g).epsilon(1e-12));
}

TEST_CASE("ruelle consistency: cover counts never exceed the exponent sum") {
    // the section return map of the hyperbolic suspension is the deck matrix
    const auto cover = spanning_entropy(TorusMap::from_matrix(mat(2, 1, 1, 1)), {0.1}, 1, 4,
                                        SpanningMechanism::grid_greedy);
    const ModelSpec model = make_suspension_model(mat(2, 1, 1, 1));
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    const auto proxy = directional_entropy_profile(model, Eigen::Vector3d(1, 0, 0), 100.0, cfg);
    CHECK(cover.value <= proxy.value + cover.uncertainty + proxy.uncertainty + 0.05);
}

TEST_CASE("reeb verification residuals for the mapping-torus cases") {
    const ModelSpec hyper = make_suspension_model(mat(2, 1, 1, 1));
    const ReebReport hr = reeb_verify(hyper, 60, 5000.0);
    CHECK(hr.pairing_residual < 1e-10);
    CHECK(hr.contraction_residual < 1e-10);
    CHECK(hr.frame_pairing_residual < 1e-10);
    CHECK(hr.area_residual < 1e-10);
    CHECK(hr.commutator_xi1 < 1e-10);
    CHECK(hr.commutator_xi2 < 1e-10);
    CHECK(hr.reeb_flow_leading < 1e-3);

    const ModelSpec par = make_suspension_model(mat(1, 1, 0, 1));
    const ReebReport pr = reeb_verify(par, 60, 500.0);
    CHECK(pr.pairing_residual < 1e-10);
    CHECK(pr.contraction_residual < 1e-10);
    CHECK(pr.alignment_residual < 1e-8);

    CHECK_THROWS_AS(reeb_verify(catalog_get("martinet", {}).spec(), 10), domain_error);
}

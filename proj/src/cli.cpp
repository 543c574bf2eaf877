#include "srflow/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "srflow/abnormal.hpp"
#include "srflow/analysis.hpp"
#include "srflow/hamiltonian.hpp"
#include "srflow/io.hpp"

namespace srflow::cli {

namespace {

Vec parse_vector(const std::string& text, int expected = -1) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            vals.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw domain_error("bad numeric list: " + text);
        }
    }
    if (expected >= 0 && static_cast<int>(vals.size()) != expected)
        throw domain_error("expected " + std::to_string(expected) + " comma-separated values");
    Vec v(static_cast<int>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
    return v;
}

Eigen::Matrix2i parse_matrix2i(const std::string& text) {
    const Vec v = parse_vector(text, 4);
    for (int i = 0; i < 4; ++i)
        if (v(i) != std::floor(v(i))) throw domain_error("matrix entries must be integers");
    Eigen::Matrix2i A;
    A << static_cast<int>(v(0)), static_cast<int>(v(1)), static_cast<int>(v(2)),
        static_cast<int>(v(3));
    return A;
}

json config_echo(const json& extra, uint64_t seed) {
    json cfg = extra;
    cfg["seed"] = seed;
    return cfg;
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty())
        std::cout << doc.dump(2) << "\n";
    else
        write_json(out_path, doc);
}

// --- reproduction matrix -------------------------------------------------------

struct BundleBuilder {
    std::vector<BundleRow>& rows;
    const std::string& only;

    bool wanted(const std::string& label) const {
        return only.empty() || label.find(only) != std::string::npos;
    }
    void add_less(const std::string& label, int criterion, double measured, double bound) {
        if (!wanted(label)) return;
        rows.push_back({label, criterion, measured, bound, "<", bound, measured < bound});
    }
    void add_rel(const std::string& label, int criterion, double measured, double target,
                 double rel) {
        if (!wanted(label)) return;
        rows.push_back({label, criterion, measured, target, "~", rel,
                        std::abs(measured - target) <= rel * std::abs(target)});
    }
    void add_at_least(const std::string& label, int criterion, double measured, double bound) {
        if (!wanted(label)) return;
        rows.push_back({label, criterion, measured, bound, ">=", bound, measured >= bound});
    }
    void add_range(const std::string& label, int criterion, double measured, double lo,
                   double hi) {
        if (!wanted(label)) return;
        rows.push_back({label, criterion, measured, 0.5 * (lo + hi), "range", 0.5 * (hi - lo),
                        measured >= lo && measured <= hi});
    }
};

double circle_fit_residual(const std::vector<Eigen::Vector2d>& pts) {
    // Algebraic (Kasa) fit: x^2 + y^2 + D x + E y + F = 0.
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& p : pts) {
        const Eigen::Vector3d row(p(0), p(1), 1.0);
        M += row * row.transpose();
        b -= (p.squaredNorm()) * row;
    }
    const Eigen::Vector3d sol = M.ldlt().solve(b);
    const Eigen::Vector2d center(-sol(0) / 2.0, -sol(1) / 2.0);
    const double r2 = center.squaredNorm() - sol(2);
    if (r2 <= 0.0) return 1e300;
    const double radius = std::sqrt(r2);
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, std::abs((p - center).norm() - radius));
    return worst;
}

double heisenberg_circle_residual(int n_geodesics, double T, uint64_t seed) {
    const ModelSpec model = catalog_get("heisenberg", {}).spec();
    const CotangentScalar H = sr_hamiltonian(model);
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.sample_stride = 20;
    double worst = 0.0;
    const auto shell = sample_energy_shell(model, 4 * n_geodesics, seed);
    int used = 0;
    for (const auto& x0 : shell) {
        if (used >= n_geodesics) break;
        if (std::abs(x0.p(1)) < 0.2) continue;  // keep the projected radius finite
        ++used;
        const Trajectory traj = flow(H, x0, T, cfg);
        std::vector<Eigen::Vector2d> pts;
        pts.reserve(traj.states.size());
        for (const auto& s : traj.states) pts.emplace_back(s(0), s(2));
        worst = std::max(worst, circle_fit_residual(pts));
    }
    return worst;
}

double casimir_drift(const std::string& id, const std::map<std::string, double>& params,
                     const Eigen::Vector3d& m0, double T, double dt) {
    const LiePoissonModel model = lie_poisson_model(id, params);
    LiePoissonSystem sys(model);
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.sample_stride = 20;
    ScalarField cas = model.casimir;
    Observable obs{"casimir", [cas](const Vec& x) { return cas.value(x); }};
    const Trajectory traj = flow(sys, m0, T, cfg, {obs});
    return traj.drift("casimir");
}

// Order-4 convergence ratio of the fixed-step scheme against the adaptive
// reference on the flat-torus model.
double order_ratio() {
    const ModelSpec model = catalog_get("torus3", {}).spec();
    const CotangentScalar H = sr_hamiltonian(model);
    PhasePoint x0(Eigen::Vector3d(0.3, 0.2, 0.1), Eigen::Vector3d(0.9, 0.4, 0.3));
    const double T = 5.0;

    IntegratorConfig ref_cfg;
    ref_cfg.scheme = IntegratorConfig::Scheme::adaptive_embedded54;
    ref_cfg.rel_tol = 1e-13;
    ref_cfg.abs_tol = 1e-14;
    const Vec ref = flow(H, x0, T, ref_cfg).states.back();

    auto endpoint_error = [&](double dt) {
        IntegratorConfig cfg;
        cfg.dt = dt;
        cfg.sample_stride = 1 << 30;
        return (flow(H, x0, T, cfg).states.back() - ref).norm();
    };
    return endpoint_error(0.05) / endpoint_error(0.025);
}

double reversal_error() {
    const ModelSpec model = catalog_get("torus3", {}).spec();
    const CotangentScalar H = sr_hamiltonian(model);
    PhasePoint x0(Eigen::Vector3d(0.3, 0.2, 0.1), Eigen::Vector3d(0.9, 0.4, 0.3));
    IntegratorConfig cfg;
    cfg.dt = 1e-2;
    cfg.sample_stride = 1 << 30;
    const Vec fwd = flow(H, x0, 10.0, cfg).states.back();
    const Vec back = flow(H, PhasePoint::from_flat(fwd), -10.0, cfg).states.back();
    return (back - x0.flat()).norm();
}

double harmonic_invariant_drift() {
    // q' = p, p' = -q with H = (p^2 + q^2)/2: quadratic invariants are
    // preserved by the collocation scheme up to round-off.
    struct Harmonic final : OdeSystem {
        int dim() const override { return 2; }
        void rhs(const Vec& x, Vec& f) const override {
            f.resize(2);
            f(0) = x(1);
            f(1) = -x(0);
        }
        bool has_jacobian() const override { return true; }
        void jacobian(const Vec&, Mat& J) const override {
            J.resize(2, 2);
            J << 0, 1, -1, 0;
        }
    } sys;
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.sample_stride = 50;
    Vec x0(2);
    x0 << 1.0, 0.0;
    Observable energy{"H", [](const Vec& x) { return 0.5 * (x(0) * x(0) + x(1) * x(1)); }};
    return flow(sys, x0, 1000.0, cfg, {energy}).drift("H");
}

int contact_sigma_probes(const ModelSpec& model, int segments, uint64_t seed) {
    const ConstraintManifold cm(model);
    const int d = cm.ambient_dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> np(0.0, 1.0);
    int found = 0;
    for (int s = 0; s < segments; ++s) {
        Vec q(model.dimension);
        for (int i = 0; i < model.dimension; ++i) {
            const auto& [lo, hi] = model.sample_box[static_cast<size_t>(i)];
            q(i) = lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        }
        // seed momentum inside Ann(Pi): orthogonal projection of a random p
        Vec p(model.dimension);
        for (int i = 0; i < model.dimension; ++i) p(i) = np(rng);
        Mat frame_vals(model.frame.rank(), model.dimension);
        for (int i = 0; i < model.frame.rank(); ++i)
            frame_vals.row(i) = model.frame.field(i).value(q).transpose();
        // remove the frame-paired components: p <- p - F^T (F F^T)^-1 F p
        const Mat FFt = frame_vals * frame_vals.transpose();
        p -= frame_vals.transpose() * FFt.ldlt().solve(frame_vals * p);
        if (p.norm() < 1e-3) continue;
        p /= p.norm();
        Vec dir(d);
        for (int i = 0; i < d; ++i) dir(i) = np(rng);
        dir /= dir.norm();
        try {
            if (locate_sigma(cm, PhasePoint(q, p), dir, 1.5, 60)) ++found;
        } catch (const numerical_error&) {
            // projection failures on wild segments count as no detection
        }
    }
    return found;
}

struct AbnormalChecks {
    double y_drift = 0.0;
    double z_drift = 0.0;
    double kernel_angle = 0.0;
    double constraint = 0.0;
};

AbnormalChecks martinet_abnormal_checks() {
    const ModelSpec model = catalog_get("martinet", {}).spec();
    const ConstraintManifold cm(model);
    Vec q(3), p(3);
    q << 0.0, 0.0, 0.0;
    p << 0.0, 1.0, 0.0;  // on S: p_x = -z^2 p_y = 0, p_z = 0
    const PhasePoint x0(q, p);
    const AbnormalCurve curve = trace_abnormal(cm, x0, 10.0, 1e-2);
    AbnormalChecks out;
    out.constraint = curve.max_constraint_violation(cm);
    Vec e_x = Vec::Zero(6);
    e_x(0) = 1.0;
    for (size_t i = 0; i < curve.points.size(); ++i) {
        out.y_drift = std::max(out.y_drift, std::abs(curve.points[i].q(1) - q(1)));
        out.z_drift = std::max(out.z_drift, std::abs(curve.points[i].q(2)));
        const double c = std::abs(curve.kernels[i].dot(e_x));
        out.kernel_angle = std::max(out.kernel_angle, std::acos(std::min(1.0, c)));
    }
    return out;
}

double engel_kernel_angle() {
    const ModelSpec model = catalog_get("engel", {}).spec();
    const ConstraintManifold cm(model);
    Vec q(4), p(4);
    q << 0.1, -0.2, 0.3, 0.2;
    // On S: p_x = -z p_y - w p_z, p_w = 0; Sigma needs p_z = 0.
    p << -0.3 * 1.0, 1.0, 0.0, 0.0;
    const PhasePoint x0 = cm.project(PhasePoint(q, p));
    Vec e_w = Vec::Zero(8);
    e_w(3) = 1.0;
    const Vec k = kernel_direction(cm, x0);
    return std::acos(std::min(1.0, std::abs(k.dot(e_w))));
}

void build_bundle(BundleBuilder& bb, bool quick) {
    const double lam = 0.5 * (3.0 + std::sqrt(5.0));
    const double target_h = std::log(lam);

    Eigen::Matrix2i anosov, rotation, unipotent, identity;
    anosov << 2, 1, 1, 1;
    rotation << 0, 1, -1, 0;
    unipotent << 1, 1, 0, 1;
    identity << 1, 0, 0, 1;

    // 1: exact toral entropy
    {
        Eigen::MatrixXi A(2, 2);
        A << 2, 1, 1, 1;
        bb.add_less("entropy/exact-toral-anosov", 1, std::abs(toral_entropy(A) - target_h),
                    1e-12);
    }

    // 2: leading exponent on the invariant set
    {
        const ModelSpec model = make_suspension_model(anosov);
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        const double T = quick ? 50.0 : 200.0;
        Vec q0(3), p0(3);
        q0 << 0.0, 0.0, 0.0;
        p0 << 0.0, 0.0, 1.0;
        const LyapunovSpectrum spec = lyapunov_spectrum(model, PhasePoint(q0, p0), T, cfg);
        bb.add_rel("suspension-hyperbolic/leading-exponent", 2, spec.leading(), target_h, 0.02);
    }

    // 3: spanning estimator
    {
        const auto est = spanning_entropy(TorusMap::from_matrix(anosov), {0.01}, 4, 14);
        bb.add_rel("entropy/spanning-anosov", 3, est.value, target_h, 0.15);
        const auto id_est = spanning_entropy(TorusMap::from_matrix(identity), {0.01}, 4, 14);
        bb.add_less("entropy/spanning-identity", 3, id_est.value, 0.05);
        const auto rot_est = spanning_entropy(TorusMap::from_matrix(rotation), {0.01}, 4, 14);
        bb.add_less("entropy/spanning-rotation", 3, rot_est.value, 0.05);
    }

    // 4: integrability certification for the three suspension cases
    {
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        const double T = quick ? 10.0 : 100.0;
        const int n_traj = quick ? 2 : 3;
        const int n_pts = quick ? 200 : 1000;
        const std::vector<std::pair<std::string, Eigen::Matrix2i>> cases = {
            {"suspension-hyperbolic", anosov},
            {"suspension-elliptic", rotation},
            {"suspension-parabolic", unipotent}};
        for (const auto& [label, A] : cases) {
            const ModelSpec model = make_suspension_model(A);
            const IntegrabilityReport rep =
                verify_first_integrals(model, n_traj, T, cfg, n_pts);
            bb.add_less(label + "/bracket-residual", 4, rep.max_bracket_residual(), 1e-10);
            bb.add_less(label + "/integral-drift", 4, rep.max_drift(), 1e-6);
            bb.add_at_least(label + "/rank3-fraction", 4, rep.rank_fraction(3), 0.95);
        }
    }

    // 5: Casimir conservation on the Lie-Poisson catalog
    {
        const double T = quick ? 10.0 : 100.0;
        const double dt = 1e-3;
        bb.add_less("lie:h3/casimir-drift", 5,
                    casimir_drift("lie:h3", {}, Eigen::Vector3d(0.4, 0.3, 0.8), T, dt), 1e-8);
        for (double sigma : {0.5, 1.0, 2.0}) {
            std::ostringstream label;
            label << "lie:so3(sigma=" << sigma << ")/casimir-drift";
            bb.add_less(label.str(), 5,
                        casimir_drift("lie:so3", {{"sigma", sigma}},
                                      Eigen::Vector3d(0.6, 0.5, 0.4), T, dt),
                        1e-8);
        }
        bb.add_less("lie:sl2-a(sigma=1)/casimir-drift", 5,
                    casimir_drift("lie:sl2-a", {{"sigma", 1.0}},
                                  Eigen::Vector3d(0.7, 0.4, 0.3), T, dt),
                    1e-8);
        bb.add_less("lie:solvable-a(1,2)/casimir-drift", 5,
                    casimir_drift("lie:solvable-a", {{"lambda1", 1.0}, {"lambda2", 2.0}},
                                  Eigen::Vector3d(0.05, 0.04, 0.02), T, dt),
                    1e-8);
    }

    // 6: planar circles of the nilpotent-group geodesics
    bb.add_less("heisenberg/circle-fit", 6,
                heisenberg_circle_residual(quick ? 5 : 20, 20.0, kDefaultSeed), 1e-6);

    // 7: Reeb identities and Reeb-flow exponents
    {
        const std::vector<std::pair<std::string, Eigen::Matrix2i>> cases = {
            {"suspension-hyperbolic", anosov},
            {"suspension-elliptic", rotation},
            {"suspension-parabolic", unipotent}};
        for (const auto& [label, A] : cases) {
            const ModelSpec model = make_suspension_model(A);
            bb.add_less(label + "/frame-invariance", 7, verify_frame_invariance(model, 100),
                        1e-12);
            const ReebReport rep = reeb_verify(model, 100, quick ? 2000.0 : 20000.0);
            bb.add_less(label + "/reeb-pairing", 7, rep.pairing_residual, 1e-10);
            bb.add_less(label + "/reeb-contraction", 7, rep.contraction_residual, 1e-10);
            if (label == "suspension-hyperbolic") {
                bb.add_less(label + "/reeb-commutator-xi1", 7, rep.commutator_xi1, 1e-10);
                bb.add_less(label + "/reeb-commutator-xi2", 7, rep.commutator_xi2, 1e-10);
                bb.add_less(label + "/reeb-flow-exponents", 7, rep.reeb_flow_leading,
                            quick ? 1e-2 : 1e-3);
            }
            if (label == "suspension-parabolic")
                bb.add_less(label + "/reeb-alignment", 7, rep.alignment_residual, 1e-8);
        }
    }

    // 8: abnormal geodesics and the contact no-sigma certificates
    {
        const AbnormalChecks mc = martinet_abnormal_checks();
        bb.add_less("martinet/abnormal-y-drift", 8, mc.y_drift, 1e-8);
        bb.add_less("martinet/abnormal-z-drift", 8, mc.z_drift, 1e-8);
        bb.add_less("martinet/abnormal-kernel-angle", 8, mc.kernel_angle, 1e-6);
        bb.add_less("martinet/abnormal-constraints", 8, mc.constraint, 1e-8);
        bb.add_less("engel/abnormal-kernel-angle", 8, engel_kernel_angle(), 1e-6);
        const int segments = quick ? 20 : 100;
        int found = 0;
        found += contact_sigma_probes(catalog_get("torus3", {}).spec(), segments, kDefaultSeed);
        found += contact_sigma_probes(catalog_get("heisenberg", {}).spec(), segments, kDefaultSeed);
        found += contact_sigma_probes(make_suspension_model(anosov), segments, kDefaultSeed);
        found += contact_sigma_probes(make_suspension_model(rotation), segments, kDefaultSeed);
        found += contact_sigma_probes(make_suspension_model(unipotent), segments, kDefaultSeed);
        bb.add_less("contact-models/sigma-detections", 8, static_cast<double>(found), 0.5);
    }

    // 9: extension identity and Reeb symmetry
    {
        const std::vector<std::string> reeb_models = {"torus3", "heisenberg"};
        for (const auto& name : reeb_models) {
            const ModelSpec model = catalog_get(name, {}).spec();
            const auto ext = riemannian_extension(model);
            const CotangentScalar base = sr_hamiltonian(model);
            const CotangentScalar ig = reeb_momentum(model);
            double worst = 0.0;
            const auto pts = sample_energy_shell(model, quick ? 100 : 1000, kDefaultSeed);
            for (const auto& x : pts) {
                // independent routes: extended-frame Hamiltonian vs H + I_g
                const double lhs = ext.full.value(x);
                const double rhs = base.value(x) + ig.value(x);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            bb.add_less(name + "/extension-identity", 9, worst, 1e-12);
            bb.add_less(name + "/reeb-symmetry", 9,
                        reeb_symmetry_check(model, quick ? 100 : 1000), 1e-10);
        }
        for (const auto& [label, A] :
             std::vector<std::pair<std::string, Eigen::Matrix2i>>{
                 {"suspension-hyperbolic", anosov}, {"suspension-elliptic", rotation}}) {
            const ModelSpec model = make_suspension_model(A);
            const auto ext = riemannian_extension(model);
            const CotangentScalar base = sr_hamiltonian(model);
            const CotangentScalar ig = reeb_momentum(model);
            double worst = 0.0;
            for (const auto& x : sample_energy_shell(model, quick ? 100 : 1000, kDefaultSeed))
                worst = std::max(worst, std::abs(ext.full.value(x) - base.value(x) - ig.value(x)));
            bb.add_less(label + "/extension-identity", 9, worst, 1e-12);
        }
    }

    // 10: composition table
    {
        Eigen::Matrix2i A2 = anosov * anosov;
        Eigen::Matrix2i Bt = unipotent.transpose();
        const auto rows = composition_entropy_table(
            {{anosov, A2}, {unipotent, Bt}, {identity, anosov}});
        int violations = 0;
        for (const auto& row : rows)
            if (row.violates_subadditivity) ++violations;
        bb.add_less("composition/commuting-violations", 10, static_cast<double>(violations), 0.5);
        const auto& counter = rows[1];  // (B, B^t)
        bb.add_less("composition/unipotent-factors-entropy", 10,
                    std::max(counter.h_f, counter.h_g), 1e-12);
        bb.add_less("composition/product-entropy-error", 10,
                    std::abs(counter.h_fg - target_h), 1e-12);
    }

    // 11: directional pseudonorm degeneracy
    {
        const ModelSpec model = make_suspension_model(anosov);
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        const double T = quick ? 50.0 : 200.0;
        const auto est = directional_entropy_profile(model, Eigen::Vector3d(1, 0, 0), T, cfg);
        bb.add_rel("profile/v=(1,0,0)", 11, est.value, target_h, 0.05);
        for (double t2 : {-1.0, 1.0})
            for (double t3 : {-1.0, 1.0}) {
                std::ostringstream label;
                label << "profile/v=(0," << t2 << "," << t3 << ")";
                const auto deg =
                    directional_entropy_profile(model, Eigen::Vector3d(0, t2, t3), T, cfg);
                bb.add_less(label.str(), 11, deg.value, 1e-3);
            }
        const auto zero = directional_entropy_profile(model, Eigen::Vector3d(0, 0, 0), T, cfg);
        bb.add_less("profile/v=0", 11, zero.value, 1e-15);
    }

    // 12: integrator quality
    {
        bb.add_range("integrator/order-ratio", 12, order_ratio(), 12.0, 20.0);
        bb.add_less("integrator/reversal-error", 12, reversal_error(), 1e-8);
        bb.add_less("integrator/quadratic-invariant-drift", 12, harmonic_invariant_drift(),
                    1e-12);
    }
}

}  // namespace

BundleResult report_bundle(const BundleOptions& options) {
    BundleResult result;
    BundleBuilder bb{result.rows, options.only};
    build_bundle(bb, options.quick);

    result.all_pass = true;
    json rows = json::array();
    for (const auto& row : result.rows) {
        result.all_pass = result.all_pass && row.pass;
        rows.push_back(json{{"label", row.label},
                            {"criterion", row.criterion},
                            {"measured", row.measured},
                            {"target", row.target},
                            {"comparison", row.comparison},
                            {"tolerance", row.tolerance},
                            {"pass", row.pass}});
    }
    result.document = json{{"method", "report-bundle"},
                           {"seed", kDefaultSeed},
                           {"quick", options.quick},
                           {"rows", rows},
                           {"all_pass", result.all_pass}};
    return result;
}

namespace {

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"sub-Riemannian geodesic flow laboratory"};
    app.require_subcommand(1);

    // ---- models
    auto* models_cmd = app.add_subcommand("models", "list catalog model names");

    // ---- trace
    auto* trace_cmd = app.add_subcommand("trace", "integrate a trajectory and write CSV");
    std::string trace_model, trace_q0, trace_p0, trace_out = "trajectory.csv", trace_scheme =
                                                                                   "gauss4";
    double trace_T = 10.0, trace_dt = 1e-3;
    uint64_t trace_seed = kDefaultSeed;
    trace_cmd->add_option("--model", trace_model, "model descriptor JSON")->required();
    trace_cmd->add_option("--q0", trace_q0, "initial configuration (comma list)");
    trace_cmd->add_option("--p0", trace_p0, "initial momenta / algebra point (comma list)");
    trace_cmd->add_option("--T", trace_T, "horizon");
    trace_cmd->add_option("--dt", trace_dt, "fixed step");
    trace_cmd->add_option("--scheme", trace_scheme, "gauss4 | rk54");
    trace_cmd->add_option("--out", trace_out, "output CSV path");
    trace_cmd->add_option("--seed", trace_seed, "sampling seed when q0/p0 omitted");

    // ---- verify
    auto* verify_cmd = app.add_subcommand("verify", "first-integral certification report");
    std::string verify_model, verify_out;
    int verify_traj = 3, verify_samples = 1000;
    double verify_T = 100.0, verify_dt = 1e-3;
    uint64_t verify_seed = kDefaultSeed;
    verify_cmd->add_option("--model", verify_model)->required();
    verify_cmd->add_option("--trajectories", verify_traj);
    verify_cmd->add_option("--samples", verify_samples);
    verify_cmd->add_option("--T", verify_T);
    verify_cmd->add_option("--dt", verify_dt);
    verify_cmd->add_option("--out", verify_out);
    verify_cmd->add_option("--seed", verify_seed);

    // ---- lyapunov
    auto* lyap_cmd = app.add_subcommand("lyapunov", "Lyapunov spectrum of a model flow");
    std::string lyap_model, lyap_q0, lyap_p0, lyap_out;
    double lyap_T = 200.0, lyap_dt = 1e-3;
    lyap_cmd->add_option("--model", lyap_model)->required();
    lyap_cmd->add_option("--q0", lyap_q0)->required();
    lyap_cmd->add_option("--p0", lyap_p0)->required();
    lyap_cmd->add_option("--T", lyap_T);
    lyap_cmd->add_option("--dt", lyap_dt);
    lyap_cmd->add_option("--out", lyap_out);

    // ---- entropy
    auto* entropy_cmd = app.add_subcommand("entropy", "entropy computations");
    entropy_cmd->require_subcommand(1);
    auto* toral_cmd = entropy_cmd->add_subcommand("toral", "exact toral-automorphism entropy");
    std::string toral_matrix;
    toral_cmd->add_option("--matrix", toral_matrix, "a,b,c,d")->required();
    auto* span_cmd = entropy_cmd->add_subcommand("spanning", "cover-count estimator");
    std::string span_matrix, span_eps = "0.01", span_out;
    int span_nmin = 4, span_nmax = 14;
    bool span_grid = false;
    span_cmd->add_option("--matrix", span_matrix)->required();
    span_cmd->add_option("--eps", span_eps, "comma list of scales");
    span_cmd->add_option("--nmin", span_nmin);
    span_cmd->add_option("--nmax", span_nmax);
    span_cmd->add_flag("--grid", span_grid, "force the grid-greedy mechanism");
    span_cmd->add_option("--out", span_out);
    auto* prof_cmd = entropy_cmd->add_subcommand("profile", "directional entropy profile");
    std::string prof_model, prof_v = "1,0,0", prof_out;
    double prof_T = 200.0;
    prof_cmd->add_option("--model", prof_model)->required();
    prof_cmd->add_option("--v", prof_v, "t1,t2,t3");
    prof_cmd->add_option("--T", prof_T);
    prof_cmd->add_option("--out", prof_out);

    // ---- abnormal
    auto* abn_cmd = app.add_subcommand("abnormal", "trace an abnormal curve");
    std::string abn_model, abn_out = "abnormal.csv", abn_q0, abn_p0;
    double abn_T = 10.0, abn_ds = 1e-2;
    abn_cmd->add_option("--model", abn_model)->required();
    abn_cmd->add_option("--q0", abn_q0);
    abn_cmd->add_option("--p0", abn_p0);
    abn_cmd->add_option("--T", abn_T);
    abn_cmd->add_option("--ds", abn_ds);
    abn_cmd->add_option("--out", abn_out);

    // ---- reeb
    auto* reeb_cmd = app.add_subcommand("reeb", "Reeb-field certification report");
    std::string reeb_model, reeb_out;
    int reeb_samples = 100;
    double reeb_T = 20000.0;
    reeb_cmd->add_option("--model", reeb_model)->required();
    reeb_cmd->add_option("--samples", reeb_samples);
    reeb_cmd->add_option("--T", reeb_T);
    reeb_cmd->add_option("--out", reeb_out);

    // ---- report
    auto* report_cmd = app.add_subcommand("report", "full reproduction matrix");
    std::string report_only, report_out;
    bool report_quick = false;
    report_cmd->add_option("--only", report_only, "substring filter on row labels");
    report_cmd->add_option("--out", report_out);
    report_cmd->add_flag("--quick", report_quick, "shorter horizons (smoke run)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (models_cmd->parsed()) {
        json doc;
        doc["models"] = catalog_names();
        doc["descriptor_examples"] = json::array(
            {json::parse(R"({"model":"torus3"})"),
             json::parse(R"({"model":"suspension","A":[[2,1],[1,1]]})"),
             json::parse(R"({"model":"lie:so3","sigma":0.8})")});
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    if (trace_cmd->parsed()) {
        const CatalogEntry entry = model_from_descriptor_string(trace_model);
        IntegratorConfig cfg;
        cfg.dt = trace_dt;
        if (trace_scheme == "rk54")
            cfg.scheme = IntegratorConfig::Scheme::adaptive_embedded54;
        else if (trace_scheme != "gauss4")
            throw domain_error("unknown scheme: " + trace_scheme);
        if (entry.is_lie_poisson()) {
            const LiePoissonModel& model = entry.lie_poisson();
            Vec m0 = trace_p0.empty() ? Vec(Eigen::Vector3d(0.4, 0.3, 0.5))
                                      : parse_vector(trace_p0, 3);
            LiePoissonSystem sys(model);
            ScalarField cas = model.casimir;
            Eigen::Vector3d x1 = model.xi1, x2 = model.xi2;
            std::vector<Observable> obs = {
                {"H",
                 [x1, x2](const Vec& x) {
                     const Eigen::Vector3d mm(x);
                     const double a = x1.dot(mm), b = x2.dot(mm);
                     return 0.5 * (a * a + b * b);
                 }},
                {"casimir", [cas](const Vec& x) { return cas.value(x); }}};
            const Trajectory traj = flow(sys, m0, trace_T, cfg, obs);
            // reuse the phase CSV layout with m = 3 and zero momenta columns
            std::ofstream out(trace_out);
            if (!out) throw io_error("cannot open for writing: " + trace_out);
            out << "t,m1,m2,m3,H,casimir\n";
            for (size_t i = 0; i < traj.times.size(); ++i) {
                out << format_double(traj.times[i]);
                for (int j = 0; j < 3; ++j) out << "," << format_double(traj.states[i](j));
                for (double v : traj.observable_values[i]) out << "," << format_double(v);
                out << "\n";
            }
            return 0;
        }
        const ModelSpec& model = entry.spec();
        PhasePoint x0 = [&]() {
            if (trace_q0.empty() || trace_p0.empty())
                return sample_energy_shell(model, 1, trace_seed).front();
            return PhasePoint(parse_vector(trace_q0, model.dimension),
                              parse_vector(trace_p0, model.dimension));
        }();
        const Trajectory traj =
            flow(sr_hamiltonian(model), x0, trace_T, cfg, model.known_integrals);
        write_trajectory_csv(trace_out, traj, model.dimension);
        return 0;
    }

    if (verify_cmd->parsed()) {
        const CatalogEntry entry = model_from_descriptor_string(verify_model);
        if (entry.is_lie_poisson())
            throw domain_error("verify expects a sub-Riemannian model (use trace for lie:*)");
        IntegratorConfig cfg;
        cfg.dt = verify_dt;
        const IntegrabilityReport rep = verify_first_integrals(
            entry.spec(), verify_traj, verify_T, cfg, verify_samples, verify_seed);
        json doc = to_json(rep);
        doc["config"] = config_echo(json{{"model", json::parse(verify_model)},
                                         {"T", verify_T},
                                         {"dt", verify_dt},
                                         {"trajectories", verify_traj},
                                         {"samples", verify_samples}},
                                    verify_seed);
        emit(doc, verify_out);
        return 0;
    }

    if (lyap_cmd->parsed()) {
        const CatalogEntry entry = model_from_descriptor_string(lyap_model);
        if (entry.is_lie_poisson()) throw domain_error("lyapunov expects a sub-Riemannian model");
        const ModelSpec& model = entry.spec();
        IntegratorConfig cfg;
        cfg.dt = lyap_dt;
        const PhasePoint x0(parse_vector(lyap_q0, model.dimension),
                            parse_vector(lyap_p0, model.dimension));
        const LyapunovSpectrum spec = lyapunov_spectrum(model, x0, lyap_T, cfg);
        json doc = to_json(spec);
        doc["model"] = model.name;
        doc["config"] = config_echo(
            json{{"model", json::parse(lyap_model)}, {"T", lyap_T}, {"dt", lyap_dt}},
            kDefaultSeed);
        emit(doc, lyap_out);
        return 0;
    }

    if (toral_cmd->parsed()) {
        const Eigen::Matrix2i A = parse_matrix2i(toral_matrix);
        const Eigen::MatrixXi Ax = A;
        std::cout << format_double(toral_entropy(Ax)) << "\n";
        return 0;
    }

    if (span_cmd->parsed()) {
        const Eigen::Matrix2i A = parse_matrix2i(span_matrix);
        const Vec eps = parse_vector(span_eps);
        std::vector<double> eps_list(eps.data(), eps.data() + eps.size());
        const auto est = spanning_entropy(
            TorusMap::from_matrix(A), eps_list, span_nmin, span_nmax,
            span_grid ? SpanningMechanism::grid_greedy : SpanningMechanism::automatic);
        json doc = to_json(est);
        doc["config"] = config_echo(json{{"matrix", span_matrix},
                                         {"nmin", span_nmin},
                                         {"nmax", span_nmax},
                                         {"grid", span_grid}},
                                    est.seed);
        emit(doc, span_out);
        return 0;
    }

    if (prof_cmd->parsed()) {
        const CatalogEntry entry = model_from_descriptor_string(prof_model);
        if (entry.is_lie_poisson()) throw domain_error("profile expects a suspension model");
        const Vec v = parse_vector(prof_v, 3);
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        const auto est =
            directional_entropy_profile(entry.spec(), Eigen::Vector3d(v), prof_T, cfg);
        json doc = to_json(est);
        doc["config"] = config_echo(
            json{{"model", json::parse(prof_model)}, {"v", prof_v}, {"T", prof_T}}, est.seed);
        emit(doc, prof_out);
        return 0;
    }

    if (abn_cmd->parsed()) {
        const CatalogEntry entry = model_from_descriptor_string(abn_model);
        if (entry.is_lie_poisson()) throw domain_error("abnormal expects a sub-Riemannian model");
        const ModelSpec& model = entry.spec();
        const ConstraintManifold cm(model);
        PhasePoint seed = [&]() {
            if (!abn_q0.empty() && !abn_p0.empty())
                return PhasePoint(parse_vector(abn_q0, model.dimension),
                                  parse_vector(abn_p0, model.dimension));
            if (model.name == "martinet")
                return PhasePoint(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 1, 0));
            if (model.name == "engel") {
                Vec q(4), p(4);
                q << 0, 0, 0.3, 0.2;
                p << -0.3, 1.0, 0.0, 0.0;
                return PhasePoint(q, p);
            }
            throw domain_error("abnormal: provide --q0/--p0 for model " + model.name);
        }();
        const AbnormalCurve curve = trace_abnormal(cm, cm.project(seed), abn_T, abn_ds);
        write_abnormal_csv(abn_out, curve, model.dimension);
        return 0;
    }

    if (reeb_cmd->parsed()) {
        const CatalogEntry entry = model_from_descriptor_string(reeb_model);
        if (entry.is_lie_poisson()) throw domain_error("reeb expects a contact model");
        const ReebReport rep = reeb_verify(entry.spec(), reeb_samples, reeb_T);
        json doc = to_json(rep);
        doc["config"] = config_echo(json{{"model", json::parse(reeb_model)},
                                         {"samples", reeb_samples},
                                         {"T", reeb_T}},
                                    kDefaultSeed);
        emit(doc, reeb_out);
        return 0;
    }

    if (report_cmd->parsed()) {
        BundleOptions opts;
        opts.only = report_only;
        opts.out_path = report_out;
        opts.quick = report_quick;
        const BundleResult result = report_bundle(opts);
        for (const auto& row : result.rows) {
            std::cout << (row.pass ? "PASS " : "FAIL ") << row.label << ": measured "
                      << format_double(row.measured) << " " << row.comparison << " target "
                      << format_double(row.target) << "\n";
        }
        if (!report_out.empty()) write_json(report_out, result.document);
        return result.all_pass ? 0 : 2;
    }

    throw domain_error("no subcommand dispatched");
}

}  // namespace

int run(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const CLI::CallForHelp&) {
        std::cout << "see README for usage\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 1;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace srflow::cli

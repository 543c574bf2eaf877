#include "srflow/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "srflow/hamiltonian.hpp"

namespace srflow {

double IntegrabilityReport::max_drift() const {
    double worst = 0.0;
    for (const auto& [k, v] : integral_drift) worst = std::max(worst, v);
    return worst;
}

double IntegrabilityReport::max_bracket_residual() const {
    double worst = 0.0;
    for (const auto& [k, v] : bracket_residual) worst = std::max(worst, v);
    return worst;
}

double IntegrabilityReport::rank_fraction(int rank) const {
    int total = 0, hit = 0;
    for (const auto& [r, c] : rank_histogram) {
        total += c;
        if (r == rank) hit += c;
    }
    return total == 0 ? 0.0 : static_cast<double>(hit) / total;
}

IntegrabilityReport verify_first_integrals(const ModelSpec& model, int n_trajectories, double T,
                                           const IntegratorConfig& cfg, int bracket_samples,
                                           uint64_t seed) {
    if (model.known_integrals.empty())
        throw domain_error("verify_first_integrals: model has no known integrals");

    IntegrabilityReport rep;
    rep.model = model.name;
    rep.seed = seed;
    rep.trajectories = n_trajectories;
    rep.horizon = T;
    rep.bracket_samples = bracket_samples;

    const CotangentScalar H = sr_hamiltonian(model);

    const auto shell = sample_energy_shell(model, std::max(n_trajectories, bracket_samples), seed);
    for (int i = 0; i < n_trajectories; ++i) {
        const Trajectory traj =
            flow(H, shell[static_cast<size_t>(i)], T, cfg, model.known_integrals);
        for (const auto& ni : model.known_integrals) {
            double& slot = rep.integral_drift[ni.name];
            slot = std::max(slot, traj.drift(ni.name));
        }
    }

    for (int i = 0; i < bracket_samples; ++i) {
        const PhasePoint& x = shell[static_cast<size_t>(i)];
        for (size_t a = 0; a < model.known_integrals.size(); ++a)
            for (size_t b = a + 1; b < model.known_integrals.size(); ++b) {
                const auto& A = model.known_integrals[a];
                const auto& B = model.known_integrals[b];
                double& slot = rep.bracket_residual[A.name + "," + B.name];
                slot = std::max(slot, std::abs(poisson_bracket(A.function, B.function, x)));
            }
        ++rep.rank_histogram[independence_rank(model, x)];
    }
    return rep;
}

int independence_rank(const ModelSpec& model, const PhasePoint& x) {
    const int m = model.dimension;
    std::vector<Vec> rows;
    for (const auto& ni : model.known_integrals) {
        const ScaledGradient sg = ni.function.scaled_gradient(x);
        if (sg.direction.size() == 2 * m && sg.direction.norm() > 0.0)
            rows.push_back(sg.direction);
    }
    if (rows.empty()) return 0;
    Mat M(static_cast<int>(rows.size()), 2 * m);
    for (size_t i = 0; i < rows.size(); ++i) M.row(static_cast<int>(i)) = rows[i].transpose();
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * sv(0)) ++rank;
    return rank;
}

// --- Lyapunov spectra ------------------------------------------------------------

namespace {

LyapunovSpectrum spectrum_from_tangent(const TangentFlowResult& tf) {
    LyapunovSpectrum spec;
    spec.exponents = tf.rates;
    std::sort(spec.exponents.begin(), spec.exponents.end());
    spec.horizon = tf.effective_horizon;
    spec.convergence = 0.0;
    for (double f : tf.fluctuation) spec.convergence = std::max(spec.convergence, f);
    const double lead =
        std::max(std::abs(spec.exponents.front()), std::abs(spec.exponents.back()));
    spec.flagged = lead > 0.0 && spec.convergence > 0.1 * lead;
    return spec;
}

}  // namespace

LyapunovSpectrum lyapunov_spectrum(const ModelSpec& model, const PhasePoint& x0, double T,
                                   const IntegratorConfig& cfg) {
    HamiltonianSystem sys(sr_hamiltonian(model));
    return lyapunov_spectrum(sys, x0.flat(), T, cfg, &model.quotient);
}

LyapunovSpectrum lyapunov_spectrum(const OdeSystem& sys, const Vec& x0, double T,
                                   const IntegratorConfig& cfg, const QuotientData* quotient,
                                   const Mat& tangent0) {
    return spectrum_from_tangent(flow_with_tangent(sys, x0, T, cfg, quotient, tangent0));
}

// --- toral entropy -----------------------------------------------------------------

double toral_entropy(const Eigen::MatrixXi& A) {
    if (A.rows() != A.cols() || A.rows() < 1) throw domain_error("toral_entropy: square matrix");
    const int n = static_cast<int>(A.rows());
    if (n == 2) {
        const long det =
            static_cast<long>(A(0, 0)) * A(1, 1) - static_cast<long>(A(0, 1)) * A(1, 0);
        if (det != 1 && det != -1)
            throw domain_error("toral_entropy: matrix must be invertible over the integers");
        const double tr = static_cast<double>(A(0, 0) + A(1, 1));
        const double disc = tr * tr - 4.0 * static_cast<double>(det);
        if (disc <= 0.0) return 0.0;  // spectrum on the unit circle
        const double r = std::sqrt(disc);
        const double big = std::max(std::abs((tr + r) / 2.0), std::abs((tr - r) / 2.0));
        return big > 1.0 ? std::log(big) : 0.0;
    }
    const Eigen::MatrixXd Ad = A.cast<double>();
    if (std::abs(std::abs(Ad.determinant()) - 1.0) > 1e-9)
        throw domain_error("toral_entropy: matrix must be invertible over the integers");
    Eigen::EigenSolver<Eigen::MatrixXd> es(Ad);
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
        const double mod = std::abs(es.eigenvalues()(i));
        if (mod > 1.0 + 1e-12) h += std::log(mod);
    }
    return h;
}

// --- spanning entropy ----------------------------------------------------------------

TorusMap TorusMap::from_matrix(const Eigen::Matrix2i& A) {
    TorusMap f;
    f.linear = A;
    const Eigen::Matrix2d Ad = A.cast<double>();
    f.iterate = [Ad](const Eigen::Vector2d& x) {
        Eigen::Vector2d y = Ad * x;
        y(0) -= std::floor(y(0));
        y(1) -= std::floor(y(1));
        return y;
    };
    return f;
}

namespace {

std::vector<Eigen::Vector2d> clip_half_plane(const std::vector<Eigen::Vector2d>& poly,
                                             const Eigen::Vector2d& r, double c) {
    std::vector<Eigen::Vector2d> out;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = poly[i];
        const Eigen::Vector2d& b = poly[(i + 1) % n];
        const double fa = r.dot(a) - c, fb = r.dot(b) - c;
        if (fa <= 0.0) out.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))
            out.push_back(a + (fa / (fa - fb)) * (b - a));
    }
    return out;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    double s = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        s += a(0) * b(1) - b(0) * a(1);
    }
    return 0.5 * std::abs(s);
}

// ln S(n) for a linear automorphism: the iterated-metric ball is the polygon
// {x : |(A^i x)_k| <= eps, i < n} and the cover count scales like the inverse
// ball area; the covering-density constant cancels in the n-slope.
std::vector<double> lattice_cover_log_counts(const Eigen::Matrix2i& A, double eps, int n_max) {
    std::vector<double> out;
    std::vector<Eigen::Vector2d> poly = {{-eps, -eps}, {eps, -eps}, {eps, eps}, {-eps, eps}};
    Eigen::Matrix2d power = Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d Ad = A.cast<double>();
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) {
            power = Ad * power;
            for (int row = 0; row < 2 && !poly.empty(); ++row) {
                const Eigen::Vector2d r = power.row(row).transpose();
                poly = clip_half_plane(poly, r, eps);
                if (poly.empty()) break;
                poly = clip_half_plane(poly, -r, eps);
            }
        }
        if (poly.empty()) throw numerical_error("spanning_entropy: ball collapsed to zero area");
        const double area = polygon_area(poly);
        if (area <= 0.0) throw numerical_error("spanning_entropy: ball collapsed to zero area");
        out.push_back(std::log(std::max(1.0, 1.0 / area)));
    }
    return out;
}

double torus_max_dist(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        double d = std::abs(a(i) - b(i));
        d = std::min(d, 1.0 - d);
        worst = std::max(worst, d);
    }
    return worst;
}

// First-fit greedy cover counts of the eps/4 grid under the iterated metric.
std::vector<double> grid_greedy_log_counts(const TorusMap& f, double eps, int n_max, uint64_t seed,
                                           size_t max_points) {
    const int side = static_cast<int>(std::lround(std::ceil(4.0 / eps)));
    const size_t count = static_cast<size_t>(side) * static_cast<size_t>(side);
    if (count > max_points)
        throw domain_error("spanning_entropy: memory budget exceeded for requested eps");

    std::vector<std::vector<Eigen::Vector2d>> orbits(static_cast<size_t>(n_max));
    orbits[0].reserve(count);
    for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b)
            orbits[0].push_back(Eigen::Vector2d((a + 0.5) / side, (b + 0.5) / side));
    for (int i = 1; i < n_max; ++i) {
        orbits[static_cast<size_t>(i)].reserve(count);
        for (size_t j = 0; j < count; ++j)
            orbits[static_cast<size_t>(i)].push_back(
                f.iterate(orbits[static_cast<size_t>(i - 1)][j]));
    }

    std::vector<size_t> order(count);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> out;
    std::vector<char> covered(count);
    for (int n = 1; n <= n_max; ++n) {
        std::fill(covered.begin(), covered.end(), 0);
        size_t centers = 0;
        for (size_t idx : order) {
            if (covered[idx]) continue;
            ++centers;
            for (size_t j = 0; j < count; ++j) {
                if (covered[j]) continue;
                bool inside = true;
                for (int i = 0; i < n; ++i) {
                    if (torus_max_dist(orbits[static_cast<size_t>(i)][idx],
                                       orbits[static_cast<size_t>(i)][j]) > eps) {
                        inside = false;
                        break;
                    }
                }
                if (inside) covered[j] = 1;
            }
        }
        out.push_back(std::log(static_cast<double>(centers)));
    }
    return out;
}

struct LineFit {
    double slope = 0.0;
    double rms_residual = 0.0;
};

LineFit fit_slope(const std::vector<double>& ys, int n_min) {
    const int n = static_cast<int>(ys.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = n_min + i;
        sx += x;
        sy += ys[static_cast<size_t>(i)];
        sxx += x * x;
        sxy += x * ys[static_cast<size_t>(i)];
    }
    LineFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = n_min + i;
        const double r = ys[static_cast<size_t>(i)] - (fit.slope * x + intercept);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace

EntropyEstimate spanning_entropy(const TorusMap& f, const std::vector<double>& eps_list, int n_min,
                                 int n_max, SpanningMechanism mech, uint64_t seed,
                                 size_t max_points) {
    if (eps_list.empty()) throw domain_error("spanning_entropy: empty eps list");
    if (n_max - n_min + 1 < 4)
        throw domain_error("spanning_entropy: n range too short (< 4 points)");
    if (n_min < 1) throw domain_error("spanning_entropy: n must start at 1 or later");

    if (mech == SpanningMechanism::automatic)
        mech = f.linear ? SpanningMechanism::lattice_cover : SpanningMechanism::grid_greedy;
    if (mech == SpanningMechanism::lattice_cover && !f.linear)
        throw domain_error("spanning_entropy: lattice mechanism needs a linear map");

    EntropyEstimate est;
    est.method = "spanning-count";
    est.variant = mech == SpanningMechanism::lattice_cover ? "lattice-cover" : "grid-greedy";
    est.n_min = n_min;
    est.n_max = n_max;
    est.seed = seed;

    std::vector<double> sorted_eps = eps_list;
    std::sort(sorted_eps.begin(), sorted_eps.end(), std::greater<double>());
    est.eps_list = sorted_eps;

    for (double eps : sorted_eps) {
        if (eps <= 0.0 || eps >= 0.5)
            throw domain_error("spanning_entropy: eps must be in (0, 1/2)");
        std::vector<double> logs = mech == SpanningMechanism::lattice_cover
                                       ? lattice_cover_log_counts(*f.linear, eps, n_max)
                                       : grid_greedy_log_counts(f, eps, n_max, seed, max_points);
        std::vector<double> window(logs.begin() + (n_min - 1), logs.end());
        const LineFit fit = fit_slope(window, n_min);
        est.ln_counts.push_back(std::move(window));
        est.per_eps_slope.push_back(fit.slope);
        est.fit_residual = std::max(est.fit_residual, fit.rms_residual);
    }

    est.value = std::max(0.0, est.per_eps_slope.back());  // headline from the smallest eps
    double spread = 0.0;
    for (double s : est.per_eps_slope)
        spread = std::max(spread, std::abs(s - est.per_eps_slope.back()));
    est.uncertainty = std::max(est.fit_residual, spread);
    return est;
}

// --- directional entropy ----------------------------------------------------------------

EntropyEstimate directional_entropy_profile(const ModelSpec& model, const Eigen::Vector3d& v,
                                            double T, const IntegratorConfig& cfg) {
    if (!model.has_monodromy())
        throw domain_error("directional_entropy_profile: model is not a suspension");
    if (model.known_integrals.size() != 3)
        throw domain_error("directional_entropy_profile: needs the (H, I2, I3) integrals");

    EntropyEstimate est;
    est.method = "lyapunov-proxy";
    est.variant = "invariant-set";
    if (v.norm() == 0.0) return est;

    const CotangentScalar combined =
        CotangentScalar::linear_combination({{v(0), model.known_integrals[0].function},
                                             {v(1), model.known_integrals[1].function},
                                             {v(2), model.known_integrals[2].function}});
    HamiltonianSystem sys(combined);

    // Tangent frame restricted to the configuration directions: the compact
    // invariant set {torus momenta = 0, p3 = +-1} is a graph over them and
    // the variational flow preserves the restriction there.
    Mat V0 = Mat::Zero(6, 3);
    V0(0, 0) = V0(1, 1) = V0(2, 2) = 1.0;

    double worst = 0.0, fluct = 0.0;
    for (double p3 : {1.0, -1.0}) {
        Vec x0(6);
        x0 << 0.23, 0.41, 0.1, 0.0, 0.0, p3;
        const TangentFlowResult tf = flow_with_tangent(sys, x0, T, cfg, &model.quotient, V0);
        double sum = 0.0;
        for (double r : tf.rates) sum += std::max(0.0, r);
        if (sum >= worst) {
            worst = sum;
            fluct = 0.0;
            for (double fl : tf.fluctuation) fluct = std::max(fluct, fl);
        }
    }
    est.value = worst;
    est.uncertainty = fluct;
    return est;
}

// --- composition table -------------------------------------------------------------------

std::vector<CompositionRow> composition_entropy_table(
    const std::vector<std::pair<Eigen::Matrix2i, Eigen::Matrix2i>>& pairs) {
    std::vector<CompositionRow> rows;
    rows.reserve(pairs.size());
    for (const auto& [F, G] : pairs) {
        CompositionRow row;
        row.f = F;
        row.g = G;
        row.fg = F * G;
        row.h_f = toral_entropy(F);
        row.h_g = toral_entropy(G);
        row.h_fg = toral_entropy(row.fg);
        row.commuting = ((F * G) - (G * F)).cwiseAbs().maxCoeff() == 0;
        row.violates_subadditivity = row.commuting && row.h_fg > row.h_f + row.h_g + 1e-12;
        rows.push_back(row);
    }
    return rows;
}

// --- Reeb verification ------------------------------------------------------------------

ReebReport reeb_verify(const ModelSpec& model, int samples, double flow_T, uint64_t seed) {
    if (!model.contact_form || !model.reeb_field)
        throw domain_error("reeb_verify: model has no contact data");
    ReebReport rep;
    rep.model = model.name;
    rep.seed = seed;

    const OneFormField& alpha = *model.contact_form;
    const VectorField& nu = *model.reeb_field;
    const auto qs = sample_configurations(model, samples, seed);

    const bool hyperbolic = model.has_monodromy() &&
                            model.quotient.monodromy->case_tag == MonodromyCase::hyperbolic;
    const bool parabolic = model.has_monodromy() &&
                           model.quotient.monodromy->case_tag == MonodromyCase::parabolic;
    const double log_lambda = hyperbolic ? model.parameters.at("log_lambda") : 0.0;

    for (const Vec& q : qs) {
        rep.pairing_residual = std::max(rep.pairing_residual, std::abs(alpha.pairing(nu, q) - 1.0));
        for (int i = 0; i < model.frame.rank(); ++i) {
            const VectorField& xi = model.frame.field(i);
            rep.contraction_residual =
                std::max(rep.contraction_residual, std::abs(exterior_two_form(alpha, nu, xi, q)));
            rep.frame_pairing_residual =
                std::max(rep.frame_pairing_residual, std::abs(alpha.pairing(xi, q)));
        }
        rep.area_residual =
            std::max(rep.area_residual,
                     std::abs(exterior_two_form(alpha, model.frame.field(0), model.frame.field(1),
                                                q) +
                              1.0));
        if (hyperbolic) {
            rep.commutator_xi1 =
                std::max(rep.commutator_xi1, commutator(nu, model.frame.field(0), q).norm());
            const Vec c2 = commutator(nu, model.frame.field(1), q) -
                           log_lambda * log_lambda * model.frame.field(0).value(q);
            rep.commutator_xi2 = std::max(rep.commutator_xi2, c2.norm());
        }
        if (parabolic) {
            const Vec w = nu.value(q) - commutator(model.frame.field(0), model.frame.field(1), q);
            const Vec xi1 = model.frame.field(0).value(q).normalized();
            rep.alignment_residual =
                std::max(rep.alignment_residual, (w - w.dot(xi1) * xi1).norm());
        }
    }

    // Lyapunov exponents of the Reeb flow on configuration space.
    VectorFlowSystem sys(nu);
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.renorm_interval = 1.0;
    Vec q0(model.dimension);
    for (int i = 0; i < model.dimension; ++i)
        q0(i) = 0.5 * (model.sample_box[static_cast<size_t>(i)].first +
                       model.sample_box[static_cast<size_t>(i)].second) +
                0.1;
    const LyapunovSpectrum spec = lyapunov_spectrum(sys, q0, flow_T, cfg, &model.quotient);
    rep.reeb_flow_exponents = spec.exponents;
    for (double e : spec.exponents)
        rep.reeb_flow_leading = std::max(rep.reeb_flow_leading, std::abs(e));
    return rep;
}

}  // namespace srflow

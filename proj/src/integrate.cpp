#include "srflow/integrate.hpp"

#include "srflow/hamiltonian.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace srflow {

void OdeSystem::jacobian(const Vec&, Mat&) const {
    throw numerical_error("OdeSystem: jacobian not available for this system");
}

void HamiltonianSystem::rhs(const Vec& x, Vec& f) const {
    const int m = H_.dim();
    double v;
    Vec g;
    H_.eval_grad(PhasePoint::from_flat(x), v, g);
    f.resize(2 * m);
    f.head(m) = g.tail(m);
    f.tail(m) = -g.head(m);
}

void HamiltonianSystem::jacobian(const Vec& x, Mat& J) const {
    const int m = H_.dim();
    const PhaseEval e = H_.eval(PhasePoint::from_flat(x));
    J.resize(2 * m, 2 * m);
    J.topRows(m) = e.hess.bottomRows(m);
    J.bottomRows(m) = -e.hess.topRows(m);
}

void LiePoissonSystem::rhs(const Vec& x, Vec& f) const {
    f = lie_poisson_rhs(model_, AlgebraPoint(Eigen::Vector3d(x)));
}

void LiePoissonSystem::jacobian(const Vec& x, Mat& J) const {
    // mdot_a = sum_{j,k} c^k_{aj} m_k dH_j with dH = Q m (H quadratic).
    const Eigen::Matrix3d Q =
        model_.xi1 * model_.xi1.transpose() + model_.xi2 * model_.xi2.transpose();
    const Eigen::Vector3d m3(x);
    const Eigen::Vector3d dH = Q * m3;
    Eigen::Matrix3d out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) {
                s += model_.structure[static_cast<size_t>(b)](a, j) * dH(j);
                double cj = 0.0;
                for (int k = 0; k < 3; ++k)
                    cj += model_.structure[static_cast<size_t>(k)](a, j) * m3(k);
                s += cj * Q(j, b);
            }
            out(a, b) = s;
        }
    J = out;
}

// --- quotient wrapping ---------------------------------------------------------

QuotientWrapper::QuotientWrapper(const QuotientData& data, bool phase_space, int config_dim)
    : data_(data), phase_(phase_space), m_(config_dim) {}

namespace {

Eigen::Matrix2d integer_power(const Eigen::Matrix2i& A, long n) {
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d base;
    if (n >= 0) {
        base = A.cast<double>();
    } else {
        base << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);  // det = 1 inverse
        n = -n;
    }
    for (long i = 0; i < n; ++i) M = base * M;
    return M;
}

}  // namespace

void QuotientWrapper::apply(Vec& state, Mat* tangent, std::optional<long> n_override) const {
    if (data_.monodromy) {
        const auto& mo = *data_.monodromy;
        const int fi = mo.fiber_index;
        // Events that land a rounding error below a cell boundary must still
        // wrap, otherwise the deck part of that interval's growth is never
        // measured.
        const long n =
            n_override ? *n_override : static_cast<long>(std::floor(state(fi) + 1e-9));
        if (n != 0) {
            const Eigen::Matrix2d An = integer_power(mo.matrix, n);
            const Eigen::Vector2d qt(state(0), state(1));
            state.head<2>() = An * qt;
            state(fi) -= static_cast<double>(n);
            if (phase_) {
                const Eigen::Matrix2d AnT = integer_power(mo.matrix, -n).transpose();
                const Eigen::Vector2d pt(state(m_), state(m_ + 1));
                state.segment<2>(m_) = AnT * pt;
            }
            if (tangent) {
                tangent->topRows(2) = An * tangent->topRows(2);
                if (phase_) {
                    const Eigen::Matrix2d AnT = integer_power(mo.matrix, -n).transpose();
                    tangent->middleRows(m_, 2) = AnT * tangent->middleRows(m_, 2);
                }
            }
        }
    }
    for (const auto& per : data_.periodic) {
        double& c = state(per.index);
        c -= per.period * std::floor(c / per.period);
    }
}

// --- fixed-step Gauss-Legendre collocation (order 4, symplectic) ----------------

namespace {

struct GaussButcher {
    static constexpr double r3 = 1.7320508075688772;
    static constexpr double a11 = 0.25;
    static constexpr double a12 = 0.25 - r3 / 6.0;
    static constexpr double a21 = 0.25 + r3 / 6.0;
    static constexpr double a22 = 0.25;
};

class GaussStepper {
public:
    GaussStepper(const OdeSystem& sys, const IntegratorConfig& cfg)
        : sys_(sys), cfg_(cfg), d_(sys.dim()) {
        k1_ = Vec::Zero(d_);
        k2_ = Vec::Zero(d_);
    }

    void step(Vec& x, double dt, double t_now) {
        solve_stages(x, dt, t_now);
        x += 0.5 * dt * (k1_ + k2_);
        if (!x.allFinite()) {
            std::ostringstream os;
            os << "flow: non-finite state at t = " << t_now + dt;
            throw numerical_error(os.str());
        }
    }

    // Propagates tangent columns through the step; the variational stage
    // system is linear in the tangent given converged state stages and is
    // solved exactly.
    void step_with_tangent(Vec& x, Mat& V, double dt, double t_now) {
        solve_stages(x, dt, t_now);
        const Vec X1 = x + dt * (GaussButcher::a11 * k1_ + GaussButcher::a12 * k2_);
        const Vec X2 = x + dt * (GaussButcher::a21 * k1_ + GaussButcher::a22 * k2_);
        Mat J1, J2;
        sys_.jacobian(X1, J1);
        sys_.jacobian(X2, J2);
        const int d = d_;
        Mat M = Mat::Zero(2 * d, 2 * d);
        M.topLeftCorner(d, d) = Mat::Identity(d, d) - dt * GaussButcher::a11 * J1;
        M.topRightCorner(d, d) = -dt * GaussButcher::a12 * J1;
        M.bottomLeftCorner(d, d) = -dt * GaussButcher::a21 * J2;
        M.bottomRightCorner(d, d) = Mat::Identity(d, d) - dt * GaussButcher::a22 * J2;
        Mat rhs(2 * d, V.cols());
        rhs.topRows(d) = J1 * V;
        rhs.bottomRows(d) = J2 * V;
        const Mat L = M.partialPivLu().solve(rhs);
        V += 0.5 * dt * (L.topRows(d) + L.bottomRows(d));
        x += 0.5 * dt * (k1_ + k2_);
        if (!x.allFinite()) throw numerical_error("flow_with_tangent: non-finite state");
    }

private:
    void solve_stages(const Vec& x, double dt, double t_now) {
        Vec f0(d_);
        sys_.rhs(x, f0);
        k1_ = f0;
        k2_ = f0;
        Vec X1(d_), X2(d_), n1(d_), n2(d_);
        for (int it = 0; it < cfg_.stage_max_iterations; ++it) {
            X1 = x + dt * (GaussButcher::a11 * k1_ + GaussButcher::a12 * k2_);
            X2 = x + dt * (GaussButcher::a21 * k1_ + GaussButcher::a22 * k2_);
            sys_.rhs(X1, n1);
            sys_.rhs(X2, n2);
            const double delta = std::max((n1 - k1_).lpNorm<Eigen::Infinity>(),
                                          (n2 - k2_).lpNorm<Eigen::Infinity>());
            k1_.swap(n1);
            k2_.swap(n2);
            const double scale =
                1.0 + std::max(k1_.lpNorm<Eigen::Infinity>(), k2_.lpNorm<Eigen::Infinity>());
            if (delta <= cfg_.stage_tol * scale) return;
        }
        if (newton_stages(x, dt)) return;
        std::ostringstream os;
        os << "flow: implicit stage solver did not converge at t = " << t_now;
        throw numerical_error(os.str());
    }

    bool newton_stages(const Vec& x, double dt) {
        if (!sys_.has_jacobian()) return false;
        const int d = d_;
        Vec X1(d), X2(d), f1(d), f2(d);
        for (int it = 0; it < cfg_.stage_max_iterations; ++it) {
            X1 = x + dt * (GaussButcher::a11 * k1_ + GaussButcher::a12 * k2_);
            X2 = x + dt * (GaussButcher::a21 * k1_ + GaussButcher::a22 * k2_);
            sys_.rhs(X1, f1);
            sys_.rhs(X2, f2);
            Vec G(2 * d);
            G.head(d) = k1_ - f1;
            G.tail(d) = k2_ - f2;
            const double scale =
                1.0 + std::max(k1_.lpNorm<Eigen::Infinity>(), k2_.lpNorm<Eigen::Infinity>());
            if (G.lpNorm<Eigen::Infinity>() <= cfg_.stage_tol * scale) return true;
            Mat J1, J2;
            sys_.jacobian(X1, J1);
            sys_.jacobian(X2, J2);
            Mat M = Mat::Zero(2 * d, 2 * d);
            M.topLeftCorner(d, d) = Mat::Identity(d, d) - dt * GaussButcher::a11 * J1;
            M.topRightCorner(d, d) = -dt * GaussButcher::a12 * J1;
            M.bottomLeftCorner(d, d) = -dt * GaussButcher::a21 * J2;
            M.bottomRightCorner(d, d) = Mat::Identity(d, d) - dt * GaussButcher::a22 * J2;
            const Vec delta = M.partialPivLu().solve(-G);
            k1_ += delta.head(d);
            k2_ += delta.tail(d);
        }
        return false;
    }

    const OdeSystem& sys_;
    const IntegratorConfig& cfg_;
    int d_;
    Vec k1_, k2_;
};

// --- Dormand-Prince 5(4) ---------------------------------------------------------

struct Dp54 {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

}  // namespace

// --- trajectories ------------------------------------------------------------------

std::vector<Observable> integral_observables(const std::vector<NamedIntegral>& integrals) {
    std::vector<Observable> out;
    out.reserve(integrals.size());
    for (const auto& ni : integrals) {
        CotangentScalar f = ni.function;
        out.push_back({ni.name, [f](const Vec& x) { return f.value(PhasePoint::from_flat(x)); }});
    }
    return out;
}

void Trajectory::validate() const {
    if (times.size() < 2) return;
    const bool forward = times[1] > times[0];
    for (size_t i = 1; i < times.size(); ++i)
        if (forward ? times[i] <= times[i - 1] : times[i] >= times[i - 1])
            throw domain_error("Trajectory: sample times must be strictly monotone");
}

double Trajectory::drift(const std::string& name) const {
    for (size_t c = 0; c < observable_names.size(); ++c) {
        if (observable_names[c] != name) continue;
        double worst = 0.0;
        const double ref = observable_values.front()[c];
        for (const auto& row : observable_values)
            worst = std::max(worst, std::abs(row[c] - ref));
        return worst;
    }
    throw domain_error("Trajectory::drift: no observable named " + name);
}

namespace {

void record_sample(Trajectory& traj, double t, const Vec& x, const std::vector<Observable>& obs) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    std::vector<double> row;
    row.reserve(obs.size());
    for (const auto& o : obs) row.push_back(o.fn(x));
    traj.observable_values.push_back(std::move(row));
}

Trajectory flow_adaptive(const OdeSystem& sys, const Vec& x0, double T,
                         const IntegratorConfig& cfg, const std::vector<Observable>& obs) {
    Trajectory traj;
    for (const auto& o : obs) traj.observable_names.push_back(o.name);

    const int d = sys.dim();
    const double dir = T >= 0.0 ? 1.0 : -1.0;
    double t = 0.0;
    Vec x = x0;
    record_sample(traj, t, x, obs);

    Vec k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d);
    sys.rhs(x, k1);
    double h = dir * std::min(1e-2, std::abs(T) / 10.0);

    const long max_steps = 200'000'000;
    for (long step = 0; step < max_steps; ++step) {
        if (dir * (T - t) <= 1e-15 * std::abs(T)) break;
        if (dir * (t + h - T) > 0.0) h = T - t;

        const Vec x2 = x + h * Dp54::a21 * k1;
        sys.rhs(x2, k2);
        const Vec x3 = x + h * (Dp54::a31 * k1 + Dp54::a32 * k2);
        sys.rhs(x3, k3);
        const Vec x4 = x + h * (Dp54::a41 * k1 + Dp54::a42 * k2 + Dp54::a43 * k3);
        sys.rhs(x4, k4);
        const Vec x5 = x + h * (Dp54::a51 * k1 + Dp54::a52 * k2 + Dp54::a53 * k3 + Dp54::a54 * k4);
        sys.rhs(x5, k5);
        const Vec x6 = x + h * (Dp54::a61 * k1 + Dp54::a62 * k2 + Dp54::a63 * k3 +
                                Dp54::a64 * k4 + Dp54::a65 * k5);
        sys.rhs(x6, k6);
        const Vec xn = x + h * (Dp54::b1 * k1 + Dp54::b3 * k3 + Dp54::b4 * k4 + Dp54::b5 * k5 +
                                Dp54::b6 * k6);
        sys.rhs(xn, k7);
        const Vec err = h * (Dp54::e1 * k1 + Dp54::e3 * k3 + Dp54::e4 * k4 + Dp54::e5 * k5 +
                             Dp54::e6 * k6 + Dp54::e7 * k7);

        double err_norm = 0.0;
        for (int i = 0; i < d; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x(i)), std::abs(xn(i)));
            err_norm += (err(i) / sc) * (err(i) / sc);
        }
        err_norm = std::sqrt(err_norm / d);

        if (err_norm <= 1.0) {
            t += h;
            x = xn;
            k1 = k7;  // FSAL
            record_sample(traj, t, x, obs);
            if (!x.allFinite()) throw numerical_error("flow: non-finite state (adaptive)");
        }
        h *= std::clamp(0.9 * std::pow(std::max(err_norm, 1e-12), -0.2), 0.2, 5.0);
        if (std::abs(h) < 1e-14) throw numerical_error("flow: adaptive step collapsed below 1e-14");
    }
    traj.validate();
    return traj;
}

}  // namespace

Trajectory flow(const OdeSystem& sys, const Vec& x0, double T, const IntegratorConfig& cfg,
                const std::vector<Observable>& observables) {
    cfg.validate();
    if (T == 0.0) throw domain_error("flow: T must be nonzero");
    if (cfg.scheme == IntegratorConfig::Scheme::adaptive_embedded54)
        return flow_adaptive(sys, x0, T, cfg, observables);

    Trajectory traj;
    for (const auto& o : observables) traj.observable_names.push_back(o.name);

    const double dir = T >= 0.0 ? 1.0 : -1.0;
    const long n_steps = std::max(1L, static_cast<long>(std::ceil(std::abs(T) / cfg.dt - 1e-12)));

    GaussStepper stepper(sys, cfg);
    Vec x = x0;
    double t = 0.0;
    record_sample(traj, t, x, observables);
    for (long s = 0; s < n_steps; ++s) {
        const double h = (s + 1 == n_steps) ? T - t : dir * cfg.dt;
        stepper.step(x, h, t);
        t = (s + 1 == n_steps) ? T : t + h;
        if ((s + 1) % cfg.sample_stride == 0 || s + 1 == n_steps)
            record_sample(traj, t, x, observables);
    }
    traj.validate();
    return traj;
}

Trajectory flow(const CotangentScalar& H, const PhasePoint& x0, double T,
                const IntegratorConfig& cfg, const std::vector<NamedIntegral>& integrals) {
    HamiltonianSystem sys(H);
    return flow(sys, x0.flat(), T, cfg, integral_observables(integrals));
}

TangentFlowResult flow_with_tangent(const OdeSystem& sys, const Vec& x0, double T,
                                    const IntegratorConfig& cfg, const QuotientData* quotient,
                                    const Mat& tangent0) {
    cfg.validate();
    if (T <= 0.0) throw domain_error("flow_with_tangent: T must be positive");
    const int d = sys.dim();
    Mat V = tangent0.size() == 0 ? Mat(Mat::Identity(d, d)) : tangent0;
    if (V.rows() != d) throw domain_error("flow_with_tangent: tangent frame row mismatch");
    const int r = static_cast<int>(V.cols());

    std::optional<QuotientWrapper> wrapper;
    if (quotient) {
        const bool phase = dynamic_cast<const HamiltonianSystem*>(&sys) != nullptr;
        wrapper.emplace(*quotient, phase, phase ? d / 2 : d);
    }

    GaussStepper stepper(sys, cfg);
    Vec x = x0;
    double t = 0.0;
    const double t_burn = cfg.transient_fraction * T;

    Vec logs = Vec::Zero(r);
    double t_accum_start = -1.0;
    std::vector<std::pair<double, Vec>> history;  // (t, running rates)

    TangentFlowResult out;
    record_sample(out.trajectory, t, x, {});

    const long renorm_steps = std::max(1L, std::lround(cfg.renorm_interval / cfg.dt));
    long step_count = 0;
    double last_renorm_t = 0.0;
    while (t < T - 1e-12) {
        const double h = std::min(cfg.dt, T - t);
        stepper.step_with_tangent(x, V, h, t);
        t += h;
        ++step_count;
        if (step_count % renorm_steps == 0 || t >= T - 1e-12) {
            if (wrapper) wrapper->apply(x, &V);
            Eigen::HouseholderQR<Mat> qr(V);
            Mat Q = qr.householderQ() * Mat::Identity(d, r);
            const Mat R = Q.transpose() * V;
            const bool accumulate = t > t_burn;
            if (accumulate && t_accum_start < 0.0) t_accum_start = last_renorm_t;
            for (int i = 0; i < r; ++i) {
                const double rii = std::abs(R(i, i));
                if (rii == 0.0)
                    throw numerical_error("flow_with_tangent: tangent frame collapsed");
                if (accumulate) logs(i) += std::log(rii);
                if (R(i, i) < 0.0) Q.col(i) *= -1.0;
            }
            V = Q;
            if (accumulate && t > t_accum_start + 1e-9)
                history.emplace_back(t, Vec(logs / (t - t_accum_start)));
            record_sample(out.trajectory, t, x, {});
            last_renorm_t = t;
        }
    }

    const double horizon = t - std::max(t_accum_start, 0.0);
    out.effective_horizon = horizon;
    out.rates.resize(static_cast<size_t>(r));
    out.fluctuation.assign(static_cast<size_t>(r), 0.0);
    for (int i = 0; i < r; ++i) out.rates[static_cast<size_t>(i)] = logs(i) / horizon;

    const size_t q_count = std::min(history.size(), history.size() / 4 + 1);
    const size_t q_begin = history.size() - q_count;
    for (int i = 0; i < r; ++i) {
        double lo = out.rates[static_cast<size_t>(i)], hi = lo;
        for (size_t j = q_begin; j < history.size(); ++j) {
            lo = std::min(lo, history[j].second(i));
            hi = std::max(hi, history[j].second(i));
        }
        out.fluctuation[static_cast<size_t>(i)] = hi - lo;
    }
    return out;
}

// --- Poincare sections --------------------------------------------------------------

namespace {

struct SectionEval {
    double s;
    double ds;
};

SectionEval eval_section(const SectionSpec& sec, const OdeSystem& sys, const Vec& x) {
    Vec f;
    sys.rhs(x, f);
    if (sec.scalar) {
        double v;
        Vec g;
        sec.scalar->eval_grad(PhasePoint::from_flat(x), v, g);
        return {v, g.dot(f)};
    }
    if (sec.coordinate < 0) throw domain_error("SectionSpec: no section defined");
    return {x(sec.coordinate) - sec.offset, f(sec.coordinate)};
}

// cubic Hermite root of s(u) = level on [0, h], found by bisection on the
// interpolant
double hermite_root(double s0, double d0, double s1, double d1, double h, double level) {
    auto eval = [&](double u) {
        const double tt = u / h;
        const double h00 = (1 + 2 * tt) * (1 - tt) * (1 - tt);
        const double h10 = tt * (1 - tt) * (1 - tt);
        const double h01 = tt * tt * (3 - 2 * tt);
        const double h11 = tt * tt * (tt - 1);
        return h00 * s0 + h10 * h * d0 + h01 * s1 + h11 * h * d1 - level;
    };
    double lo = 0.0, hi = h;
    double flo = eval(lo);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

PoincareResult poincare_crossings(const CotangentScalar& H, const SectionSpec& section,
                                  const PhasePoint& x0, int n_crossings,
                                  const IntegratorConfig& cfg, double max_time) {
    cfg.validate();
    HamiltonianSystem sys(H);
    const int m = H.dim();

    {
        const SectionEval e0 = eval_section(section, sys, x0.flat());
        if (std::abs(e0.ds) < 1e-8)
            throw domain_error("poincare_crossings: section scalar is stationary at the seed");
    }

    std::optional<QuotientWrapper> wrapper;
    if (section.wrap) wrapper.emplace(*section.wrap, true, m);

    GaussStepper stepper(sys, cfg);
    PoincareResult out;
    Vec x = x0.flat();
    double t = 0.0;
    SectionEval prev = eval_section(section, sys, x);

    auto lattice_level = [&](double a, double b) -> std::optional<double> {
        const double lo = std::min(a, b), hi = std::max(a, b);
        const double k = std::ceil(lo / section.spacing - 1e-12);
        const double level = k * section.spacing;
        if (level > lo + 1e-14 && level < hi - 1e-14) return level;
        return std::nullopt;
    };

    while (static_cast<int>(out.crossings.size()) < n_crossings) {
        if (t > max_time) {
            if (out.crossings.empty())
                throw numerical_error("poincare_crossings: no crossing found within the time budget");
            out.budget_exhausted = true;
            break;
        }
        const Vec x_prev = x;
        const double t_prev = t;
        stepper.step(x, cfg.dt, t);
        const SectionEval cur = eval_section(section, sys, x);
        t += cfg.dt;

        std::optional<double> level;
        if (section.scalar) {
            if ((prev.s <= 0.0) != (cur.s <= 0.0)) level = 0.0;
        } else {
            level = lattice_level(prev.s, cur.s);
        }
        if (level) {
            double u = hermite_root(prev.s, prev.ds, cur.s, cur.ds, cfg.dt, *level);
            Vec xc = x_prev;
            SectionEval ec{0.0, 0.0};
            for (int it = 0; it < 12; ++it) {
                xc = x_prev;
                if (u > 1e-15) stepper.step(xc, u, t_prev);
                ec = eval_section(section, sys, xc);
                const double miss = ec.s - *level;
                if (std::abs(miss) < 1e-10 || std::abs(ec.ds) < 1e-14) break;
                u = std::clamp(u - miss / ec.ds, 0.0, cfg.dt);
            }
            if (std::abs(ec.ds) < 1e-8) {
                ++out.tangential_skipped;
            } else if (section.orientation == 0 || (section.orientation > 0) == (ec.ds > 0.0)) {
                Vec wrapped = xc;
                if (wrapper) {
                    std::optional<long> n_force;
                    if (!section.scalar && section.wrap->monodromy &&
                        section.coordinate == section.wrap->monodromy->fiber_index)
                        n_force = std::lround((*level + section.offset) / section.spacing);
                    wrapper->apply(wrapped, nullptr, n_force);
                }
                out.crossings.push_back(
                    {t_prev + u, PhasePoint::from_flat(wrapped), PhasePoint::from_flat(xc)});
            }
        }
        prev = cur;
    }
    return out;
}

}  // namespace srflow

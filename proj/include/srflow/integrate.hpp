#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srflow/models.hpp"
#include "srflow/phase.hpp"

namespace srflow {

struct IntegratorConfig {
    enum class Scheme { symplectic_gauss4, adaptive_embedded54 };
    Scheme scheme = Scheme::symplectic_gauss4;
    double dt = 1e-3;            // fixed step (symplectic scheme)
    double rel_tol = 1e-10;      // adaptive scheme
    double abs_tol = 1e-12;
    double stage_tol = 1e-14;    // implicit stage convergence
    int stage_max_iterations = 25;
    double renorm_interval = 1.0;     // tangent-basis QR cadence
    double transient_fraction = 0.1;  // discarded from exponent accumulation
    int sample_stride = 10;

    void validate() const {
        if (dt <= 0.0) throw domain_error("IntegratorConfig: dt must be positive");
        if (rel_tol <= 0.0 || abs_tol <= 0.0)
            throw domain_error("IntegratorConfig: tolerances must be positive");
        if (renorm_interval <= 0.0)
            throw domain_error("IntegratorConfig: renorm interval must be positive");
    }
};

// Right-hand side abstraction shared by Hamiltonian flows, Lie-Poisson flows
// and plain vector-field flows on configuration space.
class OdeSystem {
public:
    virtual ~OdeSystem() = default;
    virtual int dim() const = 0;
    virtual void rhs(const Vec& x, Vec& f) const = 0;
    virtual bool has_jacobian() const { return false; }
    virtual void jacobian(const Vec& x, Mat& J) const;
};

class HamiltonianSystem final : public OdeSystem {
public:
    explicit HamiltonianSystem(CotangentScalar H) : H_(std::move(H)) {}
    int dim() const override { return 2 * H_.dim(); }
    void rhs(const Vec& x, Vec& f) const override;
    bool has_jacobian() const override { return true; }
    void jacobian(const Vec& x, Mat& J) const override;
    const CotangentScalar& hamiltonian() const { return H_; }

private:
    CotangentScalar H_;
};

class VectorFlowSystem final : public OdeSystem {
public:
    explicit VectorFlowSystem(VectorField X) : X_(std::move(X)) {}
    int dim() const override { return X_.dimension(); }
    void rhs(const Vec& x, Vec& f) const override { f = X_.value(x); }
    bool has_jacobian() const override { return true; }
    void jacobian(const Vec& x, Mat& J) const override { J = X_.jacobian(x); }

private:
    VectorField X_;
};

class LiePoissonSystem final : public OdeSystem {
public:
    explicit LiePoissonSystem(LiePoissonModel model) : model_(std::move(model)) {}
    int dim() const override { return 3; }
    void rhs(const Vec& x, Vec& f) const override;
    bool has_jacobian() const override { return true; }
    void jacobian(const Vec& x, Mat& J) const override;

private:
    LiePoissonModel model_;
};

// Applies the covering identifications: periodic reduction plus, for mapping
// tori, the deck action on torus coordinates (and momenta when the state is a
// phase point). Tangent columns transform by the deck derivative.
class QuotientWrapper {
public:
    QuotientWrapper(const QuotientData& data, bool phase_space, int config_dim);
    // n_override forces the deck power (used when a section pins the fiber
    // level); by default it is floor(fiber / 1).
    void apply(Vec& state, Mat* tangent = nullptr,
               std::optional<long> n_override = std::nullopt) const;

private:
    QuotientData data_;
    bool phase_ = false;
    int m_ = 0;
};

struct Observable {
    std::string name;
    std::function<double(const Vec&)> fn;
};

std::vector<Observable> integral_observables(const std::vector<NamedIntegral>& integrals);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> observable_values;  // one row per sample

    void validate() const;
    // max |obs(t) - obs(0)| for the named column
    double drift(const std::string& name) const;
};

Trajectory flow(const OdeSystem& sys, const Vec& x0, double T, const IntegratorConfig& cfg,
                const std::vector<Observable>& observables = {});

Trajectory flow(const CotangentScalar& H, const PhasePoint& x0, double T,
                const IntegratorConfig& cfg, const std::vector<NamedIntegral>& integrals = {});

struct TangentFlowResult {
    Trajectory trajectory;
    std::vector<double> rates;        // accumulated log-growth per direction / time
    std::vector<double> fluctuation;  // spread of the running estimate, last quartile
    double effective_horizon = 0.0;
};

// Co-integrates the variational system along the flow; the tangent frame is
// re-orthonormalized on the renormalization cadence. When a quotient is
// given, state and tangent are mapped back to the fundamental domain at each
// renormalization so growth is measured in the quotient metric.
TangentFlowResult flow_with_tangent(const OdeSystem& sys, const Vec& x0, double T,
                                    const IntegratorConfig& cfg,
                                    const QuotientData* quotient = nullptr,
                                    const Mat& tangent0 = Mat());

// --- Poincare sections -------------------------------------------------------

struct SectionSpec {
    // Scalar section s = 0, or a coordinate-lattice section (the coordinate
    // passes through offset + spacing * Z).
    std::optional<CotangentScalar> scalar;
    int coordinate = -1;
    double spacing = 1.0;
    double offset = 0.0;
    int orientation = +1;  // +1 rising, -1 falling, 0 both
    std::optional<QuotientData> wrap;
};

struct Crossing {
    double time;
    PhasePoint state;          // wrapped per the section's rule
    PhasePoint covering_state; // pre-wrap state
};

struct PoincareResult {
    std::vector<Crossing> crossings;
    int tangential_skipped = 0;
    bool budget_exhausted = false;  // max_time hit before n_crossings found
};

PoincareResult poincare_crossings(const CotangentScalar& H, const SectionSpec& section,
                                  const PhasePoint& x0, int n_crossings,
                                  const IntegratorConfig& cfg, double max_time = 1e5);

}  // namespace srflow

#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srflow/integrate.hpp"
#include "srflow/models.hpp"

namespace srflow {

inline constexpr uint64_t kDefaultSeed = 12345;

struct IntegrabilityReport {
    std::string model;
    uint64_t seed = 0;
    std::map<std::string, double> integral_drift;          // per integral
    std::map<std::string, double> bracket_residual;        // per pair "A,B"
    std::map<int, int> rank_histogram;                     // rank -> count
    int bracket_samples = 0;
    int trajectories = 0;
    double horizon = 0.0;

    double max_drift() const;
    double max_bracket_residual() const;
    double rank_fraction(int rank) const;
};

IntegrabilityReport verify_first_integrals(const ModelSpec& model, int n_trajectories, double T,
                                           const IntegratorConfig& cfg, int bracket_samples = 1000,
                                           uint64_t seed = kDefaultSeed);

// Numerical rank of the known-integral phase gradients at x. Rows are
// normalized directions (flat-factor magnitudes are tracked in log scale) so
// the rank matches the analytic one away from the exact singular loci.
int independence_rank(const ModelSpec& model, const PhasePoint& x);

struct LyapunovSpectrum {
    std::vector<double> exponents;  // ascending
    double horizon = 0.0;
    double convergence = 0.0;       // worst last-quartile fluctuation
    bool flagged = false;           // convergence worse than 10% of the leading exponent

    double leading() const { return exponents.empty() ? 0.0 : exponents.back(); }
};

LyapunovSpectrum lyapunov_spectrum(const ModelSpec& model, const PhasePoint& x0, double T,
                                   const IntegratorConfig& cfg);

// Same computation for an arbitrary system (used for Reeb flows).
LyapunovSpectrum lyapunov_spectrum(const OdeSystem& sys, const Vec& x0, double T,
                                   const IntegratorConfig& cfg,
                                   const QuotientData* quotient = nullptr,
                                   const Mat& tangent0 = Mat());

// Exact entropy of a toral automorphism: sum of ln|lambda| over the spectrum
// outside the unit circle. Closed form for 2x2.
double toral_entropy(const Eigen::MatrixXi& A);

struct EntropyEstimate {
    double value = 0.0;
    std::string method;        // exact-spectral | spanning-count | lyapunov-proxy
    double uncertainty = 0.0;
    // diagnostics
    std::vector<double> eps_list;
    int n_min = 0, n_max = 0;
    double fit_residual = 0.0;
    std::string variant;                         // lattice-cover | grid-greedy
    std::vector<std::vector<double>> ln_counts;  // per eps, per n
    std::vector<double> per_eps_slope;
    uint64_t seed = 0;
};

struct TorusMap {
    std::optional<Eigen::Matrix2i> linear;
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> iterate;

    static TorusMap from_matrix(const Eigen::Matrix2i& A);
};

enum class SpanningMechanism { automatic, lattice_cover, grid_greedy };

// Cover-count entropy estimator: slope of ln S(f, eps, n) in n. Linear maps
// use the exact cover geometry of the iterated-metric balls; generic maps use
// the eps/4 grid with a first-fit greedy cover (budget-limited).
EntropyEstimate spanning_entropy(const TorusMap& f, const std::vector<double>& eps_list, int n_min,
                                 int n_max, SpanningMechanism mech = SpanningMechanism::automatic,
                                 uint64_t seed = kDefaultSeed, size_t max_points = (1u << 22));

// Entropy of the time-one map of v1 sgrad(H) + v2 sgrad(I2) + v3 sgrad(I3)
// for a suspension model, via the sum of positive Lyapunov exponents on the
// compact invariant set (a Pesin-style proxy; method tag lyapunov-proxy).
EntropyEstimate directional_entropy_profile(const ModelSpec& model, const Eigen::Vector3d& v,
                                            double T = 200.0,
                                            const IntegratorConfig& cfg = {});

struct CompositionRow {
    Eigen::Matrix2i f, g, fg;
    double h_f = 0.0, h_g = 0.0, h_fg = 0.0;
    bool commuting = false;
    bool violates_subadditivity = false;  // must stay false for commuting rows
};

std::vector<CompositionRow> composition_entropy_table(
    const std::vector<std::pair<Eigen::Matrix2i, Eigen::Matrix2i>>& pairs);

struct ReebReport {
    std::string model;
    uint64_t seed = 0;
    double pairing_residual = 0.0;      // max |alpha(nu) - 1|
    double contraction_residual = 0.0;  // max |d alpha(nu, xi_i)|
    double frame_pairing_residual = 0.0;  // max |alpha(xi_i)|
    double area_residual = 0.0;           // max |d alpha(xi1, xi2) + 1|
    // hyperbolic commutator identities
    double commutator_xi1 = 0.0;  // max ||[nu, xi1]||
    double commutator_xi2 = 0.0;  // max ||[nu, xi2] - ln^2(lambda) xi1||
    // unipotent case: component of nu - [xi1, xi2] away from xi1
    double alignment_residual = 0.0;
    std::vector<double> reeb_flow_exponents;
    double reeb_flow_leading = 0.0;
};

ReebReport reeb_verify(const ModelSpec& model, int samples,
                       double flow_T = 20000.0, uint64_t seed = kDefaultSeed);

}  // namespace srflow

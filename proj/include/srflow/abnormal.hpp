#pragma once

#include <optional>
#include <vector>

#include "srflow/models.hpp"
#include "srflow/phase.hpp"

namespace srflow {

// The annihilator manifold S = {<p, xi_i(q)> = 0} minus the zero section,
// with the restriction machinery for the canonical symplectic form.
class ConstraintManifold {
public:
    explicit ConstraintManifold(const ModelSpec& model);

    int config_dim() const { return m_; }
    int ambient_dim() const { return 2 * m_; }
    int constraint_count() const { return k_; }

    Vec constraint_values(const PhasePoint& x) const;
    Mat constraint_jacobian(const PhasePoint& x) const;  // k x 2m

    // Orthonormal basis of the tangent space of S at x (2m x (2m - k)).
    Mat tangent_basis(const PhasePoint& x) const;
    // Same basis rotated to match a reference frame, for sign-continuous
    // Pfaffian evaluation along curves.
    Mat tangent_basis_aligned(const PhasePoint& x, const Mat& reference) const;

    // Rank of the canonical form restricted to T_x S (always even).
    int restricted_form_rank(const PhasePoint& x) const;

    // Pfaffian of the restricted form in the given tangent basis.
    double pfaffian(const PhasePoint& x, const Mat& basis) const;

    // Newton projection onto the constraint set.
    PhasePoint project(const PhasePoint& x, double tol = 1e-12, int max_iter = 30) const;

    const ModelSpec& model() const { return *model_; }

private:
    const ModelSpec* model_;
    std::vector<CotangentScalar> constraints_;
    int m_ = 0, k_ = 0;
};

// Skew form matrix of the canonical Omega in an ambient basis B:
// K = B^T J B with J the (dq wedge dp) block structure.
Mat restricted_canonical_form(const Mat& basis);

// Pfaffian of an even-dimensional skew matrix (recursive expansion).
double pfaffian(const Mat& A);

inline constexpr double kZeroSectionRadius = 1e-6;

struct SigmaPoint {
    PhasePoint x;
    double pfaffian_value = 0.0;
    Mat basis;  // aligned tangent basis at the located point
};

// Root of the Pfaffian along the projected segment seed + t * direction,
// t in [0, t_max]. No sign change -> nullopt (the contact case).
std::optional<SigmaPoint> locate_sigma(const ConstraintManifold& cm, const PhasePoint& seed,
                                       const Vec& direction, double t_max = 2.0,
                                       int scan_points = 200);

// Unit kernel vector of the form restricted to T_x Sigma. Throws when the
// kernel is not one-dimensional (degenerate stratum).
Vec kernel_direction(const ConstraintManifold& cm, const PhasePoint& x_on_sigma);

struct AbnormalCurve {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<double> pfaffians;
    std::vector<Vec> kernels;

    double max_constraint_violation(const ConstraintManifold& cm) const;
};

// Integrates the kernel line field on Sigma with sign continuity and
// per-step projection back onto the constraint set.
AbnormalCurve trace_abnormal(const ConstraintManifold& cm, const PhasePoint& x0, double T,
                             double ds = 1e-2);

}  // namespace srflow

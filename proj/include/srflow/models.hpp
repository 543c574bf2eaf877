#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "srflow/fields.hpp"
#include "srflow/phase.hpp"

namespace srflow {

enum class MonodromyCase { hyperbolic, elliptic, parabolic, identity };

std::string to_string(MonodromyCase c);

// Gluing data for the covering-space chart: plain periodic coordinates plus,
// for mapping tori, the fiber monodromy. The deck generator lowers the fiber
// coordinate by one and acts by `matrix` on the torus coordinates, so moving
// up through an integer fiber level applies `matrix` once.
struct QuotientData {
    struct Periodic {
        int index;
        double period;
    };
    struct Monodromy {
        Eigen::Matrix2i matrix;        // effective deck matrix (det = 1)
        int fiber_index = 2;           // coordinate carrying the suspension circle
        Eigen::Matrix2d eigenbasis;    // columns eta_1, eta_2
        MonodromyCase case_tag = MonodromyCase::hyperbolic;
    };

    std::vector<Periodic> periodic;
    std::optional<Monodromy> monodromy;

    void validate() const;
};

// A complete sub-Riemannian system: orthonormal frame, known first
// integrals, optional contact data and quotient identifications.
struct ModelSpec {
    std::string name;
    int dimension = 0;
    Frame frame;
    std::vector<NamedIntegral> known_integrals;
    std::optional<OneFormField> contact_form;
    std::optional<VectorField> reeb_field;
    std::vector<OneFormField> annihilator;
    QuotientData quotient;
    std::map<std::string, double> parameters;
    // Per-coordinate sampling interval for verification sweeps.
    std::vector<std::pair<double, double>> sample_box;

    bool has_monodromy() const { return quotient.monodromy.has_value(); }
};

// Reduced left-invariant system on the dual of a 3-dimensional Lie algebra.
struct LiePoissonModel {
    std::string name;
    // structure[k](i, j) = c^k_{ij} with [e_i, e_j] = sum_k c^k_{ij} e_k
    std::array<Eigen::Matrix3d, 3> structure;
    Eigen::Vector3d xi1, xi2;  // 2H = <m, xi1>^2 + <m, xi2>^2
    ScalarField casimir;       // on R^3, possibly restricted to an open domain
    std::function<bool(const Eigen::Vector3d&)> casimir_domain;
    std::map<std::string, double> parameters;

    Eigen::Vector3d bracket(const Eigen::Vector3d& v, const Eigen::Vector3d& w) const {
        Eigen::Vector3d r;
        for (int k = 0; k < 3; ++k) r(k) = v.dot(structure[static_cast<size_t>(k)] * w);
        return r;
    }
};

struct CatalogEntry {
    std::variant<ModelSpec, LiePoissonModel> model;

    bool is_lie_poisson() const { return std::holds_alternative<LiePoissonModel>(model); }
    const ModelSpec& spec() const { return std::get<ModelSpec>(model); }
    const LiePoissonModel& lie_poisson() const { return std::get<LiePoissonModel>(model); }
};

// --- catalog ----------------------------------------------------------------

// Names: torus3, heisenberg, martinet, engel, suspension (expects "A" in
// parameters via make_suspension_model), lie:h3, lie:solvable-a/b/c,
// lie:so3, lie:sl2-a, lie:sl2-b.
CatalogEntry catalog_get(const std::string& name, const std::map<std::string, double>& parameters);

std::vector<std::string> catalog_names();

// Mapping-torus models. The matrix must be integer with det = 1; det = -1 is
// rejected (no contact structure exists on that quotient).
ModelSpec make_suspension_model(const Eigen::Matrix2i& A);

// The case integrals (I2, I3) of a suspension model, as functions of the
// eigenbasis momenta.
std::vector<NamedIntegral> suspension_integrals(const ModelSpec& model);

// Max deviation of frame fields and known integrals from invariance under
// the deck map (pushforward on fields, cotangent lift on integrals).
double verify_frame_invariance(const ModelSpec& model, int samples);

// Diagnostic: invariance residual of the frame built with the two candidate
// eigenvalue labelings; the construction keeps the passing one.
double suspension_labeling_residual(const Eigen::Matrix2i& A, bool swapped);

LiePoissonModel lie_poisson_model(const std::string& algebra_id,
                                  const std::map<std::string, double>& parameters);

// Fixed-seed sample points of the model's configuration box.
std::vector<Vec> sample_configurations(const ModelSpec& model, int count, uint64_t seed);

// Fixed-seed phase points on {H = 1/2}.
std::vector<PhasePoint> sample_energy_shell(const ModelSpec& model, int count, uint64_t seed);

}  // namespace srflow

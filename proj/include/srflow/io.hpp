#pragma once

#include <string>

#include <json.hpp>

#include "srflow/abnormal.hpp"
#include "srflow/analysis.hpp"
#include "srflow/integrate.hpp"
#include "srflow/models.hpp"

namespace srflow {

using json = nlohmann::json;

// Parses {"model": "...", ...} descriptors; matrix-valued parameters like
// "A": [[2,1],[1,1]] are flattened into the catalog's scalar parameter map.
CatalogEntry model_from_descriptor(const json& descriptor);
CatalogEntry model_from_descriptor_string(const std::string& text);

// Trajectory CSV: t,q1..qm,p1..pm,<observables...>, 17 significant digits.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, int config_dim);

// Abnormal curve CSV: t,q...,p...,pfaffian,kernel components.
void write_abnormal_csv(const std::string& path, const AbnormalCurve& curve, int config_dim);

std::string format_double(double v);  // %.17g

json to_json(const IntegrabilityReport& rep);
json to_json(const LyapunovSpectrum& spec);
json to_json(const EntropyEstimate& est);
json to_json(const ReebReport& rep);
json to_json(const std::vector<CompositionRow>& rows);

void write_json(const std::string& path, const json& doc);

}  // namespace srflow

#include "srflow/io.hpp"

#include <cstdio>
#include <fstream>

namespace srflow {

CatalogEntry model_from_descriptor(const json& descriptor) {
    if (!descriptor.is_object() || !descriptor.contains("model"))
        throw domain_error("model descriptor must be an object with a \"model\" field");
    const std::string name = descriptor.at("model").get<std::string>();
    std::map<std::string, double> params;
    for (const auto& [key, value] : descriptor.items()) {
        if (key == "model") continue;
        if (key == "A") {
            if (!value.is_array() || value.size() != 2 || !value[0].is_array() ||
                value[0].size() != 2 || value[1].size() != 2)
                throw domain_error("descriptor field \"A\" must be a 2x2 integer matrix");
            params["A11"] = value[0][0].get<double>();
            params["A12"] = value[0][1].get<double>();
            params["A21"] = value[1][0].get<double>();
            params["A22"] = value[1][1].get<double>();
            continue;
        }
        if (!value.is_number())
            throw domain_error("descriptor parameter \"" + key + "\" must be numeric");
        params[key] = value.get<double>();
    }
    return catalog_get(name, params);
}

CatalogEntry model_from_descriptor_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw domain_error(std::string("bad model descriptor JSON: ") + e.what());
    }
    return model_from_descriptor(doc);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int m) {
    auto out = open_out(path);
    out << "t";
    for (int i = 1; i <= m; ++i) out << ",q" << i;
    for (int i = 1; i <= m; ++i) out << ",p" << i;
    for (const auto& name : traj.observable_names) out << "," << name;
    out << "\n";
    for (size_t s = 0; s < traj.times.size(); ++s) {
        out << format_double(traj.times[s]);
        const Vec& x = traj.states[s];
        for (int i = 0; i < 2 * m; ++i) out << "," << format_double(x(i));
        for (double v : traj.observable_values[s]) out << "," << format_double(v);
        out << "\n";
    }
    if (!out) throw io_error("write failed: " + path);
}

void write_abnormal_csv(const std::string& path, const AbnormalCurve& curve, int m) {
    auto out = open_out(path);
    out << "t";
    for (int i = 1; i <= m; ++i) out << ",q" << i;
    for (int i = 1; i <= m; ++i) out << ",p" << i;
    out << ",pfaffian";
    for (int i = 1; i <= 2 * m; ++i) out << ",k" << i;
    out << "\n";
    for (size_t s = 0; s < curve.times.size(); ++s) {
        out << format_double(curve.times[s]);
        const Vec x = curve.points[s].flat();
        for (int i = 0; i < 2 * m; ++i) out << "," << format_double(x(i));
        out << "," << format_double(curve.pfaffians[s]);
        for (int i = 0; i < 2 * m; ++i) out << "," << format_double(curve.kernels[s](i));
        out << "\n";
    }
    if (!out) throw io_error("write failed: " + path);
}

json to_json(const IntegrabilityReport& rep) {
    json diag;
    diag["bracket_samples"] = rep.bracket_samples;
    diag["trajectories"] = rep.trajectories;
    diag["horizon"] = rep.horizon;
    diag["integral_drift"] = rep.integral_drift;
    diag["bracket_residual"] = rep.bracket_residual;
    json hist = json::object();
    for (const auto& [rank, count] : rep.rank_histogram) hist[std::to_string(rank)] = count;
    diag["rank_histogram"] = hist;
    return json{{"model", rep.model},
                {"seed", rep.seed},
                {"method", "integrability"},
                {"value", rep.max_drift()},
                {"uncertainty", rep.max_bracket_residual()},
                {"diagnostics", diag}};
}

json to_json(const LyapunovSpectrum& spec) {
    return json{{"method", "lyapunov-spectrum"},
                {"exponents", spec.exponents},
                {"value", spec.leading()},
                {"uncertainty", spec.convergence},
                {"diagnostics",
                 json{{"horizon", spec.horizon}, {"flagged", spec.flagged}}}};
}

json to_json(const EntropyEstimate& est) {
    json diag;
    diag["eps"] = est.eps_list;
    diag["n_min"] = est.n_min;
    diag["n_max"] = est.n_max;
    diag["fit_residual"] = est.fit_residual;
    diag["variant"] = est.variant;
    diag["per_eps_slope"] = est.per_eps_slope;
    diag["ln_counts"] = est.ln_counts;
    return json{{"seed", est.seed},
                {"method", est.method},
                {"value", est.value},
                {"uncertainty", est.uncertainty},
                {"diagnostics", diag}};
}

json to_json(const ReebReport& rep) {
    return json{{"model", rep.model},
                {"seed", rep.seed},
                {"method", "reeb-verify"},
                {"value", rep.pairing_residual},
                {"uncertainty", 0.0},
                {"diagnostics",
                 json{{"pairing_residual", rep.pairing_residual},
                      {"contraction_residual", rep.contraction_residual},
                      {"frame_pairing_residual", rep.frame_pairing_residual},
                      {"area_residual", rep.area_residual},
                      {"commutator_xi1", rep.commutator_xi1},
                      {"commutator_xi2", rep.commutator_xi2},
                      {"alignment_residual", rep.alignment_residual},
                      {"reeb_flow_exponents", rep.reeb_flow_exponents},
                      {"reeb_flow_leading", rep.reeb_flow_leading}}}};
}

json to_json(const std::vector<CompositionRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        auto mat = [](const Eigen::Matrix2i& M) {
            return json::array({json::array({M(0, 0), M(0, 1)}), json::array({M(1, 0), M(1, 1)})});
        };
        out.push_back(json{{"f", mat(row.f)},
                           {"g", mat(row.g)},
                           {"fg", mat(row.fg)},
                           {"h_f", row.h_f},
                           {"h_g", row.h_g},
                           {"h_fg", row.h_fg},
                           {"commuting", row.commuting},
                           {"violates_subadditivity", row.violates_subadditivity}});
    }
    return out;
}

void write_json(const std::string& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
    if (!out) throw io_error("write failed: " + path);
}

}  // namespace srflow

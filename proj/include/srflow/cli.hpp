#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace srflow::cli {

// Exit codes: 0 success, 1 domain error, 2 numerical failure, 3 I/O error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

struct BundleOptions {
    std::string only;  // substring filter on row labels, empty = all
    std::string out_path;
    bool quick = false;  // shorter horizons for smoke runs
};

struct BundleRow {
    std::string label;
    int criterion = 0;       // index into the reproduction checklist
    double measured = 0.0;
    double target = 0.0;
    std::string comparison;  // "<", "~" (relative), ">=", "range"
    double tolerance = 0.0;
    bool pass = false;
};

struct BundleResult {
    std::vector<BundleRow> rows;
    nlohmann::json document;
    bool all_pass = false;
};

// Full model x check reproduction matrix.
BundleResult report_bundle(const BundleOptions& options);

}  // namespace srflow::cli

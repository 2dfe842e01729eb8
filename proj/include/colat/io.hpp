#pragma once

// Data formats and report rendering.
//
// coalition-csv: optional "# key: value" metadata lines, then a header of
// component names plus "value", then one row per coalition with cells in
// {0,1}. Canonical files list rows in ascending mask order and survive a
// load/save round trip byte for byte.
//
// task-matrix-csv: a "# components: A,B,C" line fixing the universe order,
// then a header "task" plus one coalition label per column, then one row of
// finite scores per task.
//
// manifest-json: schema-versioned listing of configurations (and component
// orderings) to evaluate.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json

#include "colat/lattice.hpp"
#include "colat/regress.hpp"
#include "colat/select.hpp"
#include "colat/stats.hpp"
#include "colat/submod.hpp"

namespace colat {

using Json = nlohmann::ordered_json;

// Locale-independent number text: shortest round-trip form, and fixed-place
// form ('.' separator always; negative zero normalized).
std::string fmt_double(double v);
std::string fmt_fixed(double v, int places);

// ---- files -----------------------------------------------------------------

CoalitionTable load_coalition_csv(const std::filesystem::path& path);
CoalitionTable parse_coalition_csv(const std::string& text);
std::string coalition_csv_text(const CoalitionTable& table);
void save_coalition_csv(const CoalitionTable& table, const std::filesystem::path& path);

TaskMatrix load_task_matrix_csv(const std::filesystem::path& path);
TaskMatrix parse_task_matrix_csv(const std::string& text);
std::string task_matrix_csv_text(const TaskMatrix& matrix);
void save_task_matrix_csv(const TaskMatrix& matrix, const std::filesystem::path& path);

// One row per audited triple.
std::string audit_triples_csv_text(const SubmodularityAudit& audit_result);

// Crash-safe write: temp file in the target directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ---- manifests --------------------------------------------------------------

struct ManifestEntry {
    std::string id;
    Mask mask;
    std::vector<std::size_t> ordering;  // permutation of the active components
};

struct Manifest {
    Universe universe;
    std::vector<ManifestEntry> entries;
    std::vector<std::uint64_t> seeds;
    std::string notes;
};

enum class ManifestMode { full_factorial, listed };

// full-factorial emits all 2^k configurations in ascending mask order;
// listed emits the given coalitions. Each configuration appears `orderings`
// times: ordering 0 is the canonical component order, the rest are seeded
// Fisher-Yates permutations (deterministic in `seed`).
Manifest gen_manifest(const Universe& universe, ManifestMode mode,
                      std::span<const ComponentSet> listed, std::size_t orderings,
                      std::uint64_t seed, std::vector<std::uint64_t> run_seeds = {},
                      std::string notes = {});

Json to_json(const Manifest& manifest);
Manifest manifest_from_json(const Json& doc);

// ---- reports ----------------------------------------------------------------

enum class ReportFormat { text, json, markdown };
ReportFormat parse_report_format(std::string_view name);

// Every analysis result serializes to a schema-versioned document
// ({"schema": "colat-report/1", "kind": ...}); text/markdown renderers work
// off that document so saved JSON can be re-rendered later.
Json to_json(const ShapleyReport& report);
Json to_json(const HarsanyiSpectrum& spectrum);
Json to_json(const SubmodularityAudit& audit_result, const TopViolationsReport& top);
Json to_json(const RegressionFit& fit);
Json to_json(const CouplingEigen& eigen);
Json to_json(const SelectionReport& report);
Json to_json(const TestResult& result);
Json to_json(const MultiTestResult& result, std::span<const double> p_values);
Json to_json(const BootstrapCI& ci);
Json to_json(const ViolationRateEstimate& estimate);

// Model-comparison document wrapping a main-effects fit, a pairwise fit, and
// the pairwise coupling eigen-structure.
Json comparison_json(const RegressionFit& main_fit, const RegressionFit& pairwise_fit,
                     const CouplingEigen& eigen);

// Renders a report document: json dumps the document itself; text/markdown
// produce fixed-decimal human output (3 decimals for values, 4 for p).
std::string render_report(const Json& doc, ReportFormat format);

}  // namespace colat

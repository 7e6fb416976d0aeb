#pragma once

#include "pfr/formats.hpp"
#include "pfr/harness.hpp"
#include "pfr/matrix.hpp"
#include "pfr/pareto.hpp"
#include "pfr/selection.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pfr {

// Matrix CSV layout: header row is an empty cell followed by configuration
// ids; each data row is the dataset id followed by one value per column.
// Missing cells are empty fields. Doubles are written with %.17g so a
// write/read round trip is exact.
MeasurementMatrix read_matrix_csv(const std::string &path, MatrixKind kind);
void write_matrix_csv(const std::string &path, const MeasurementMatrix &m);

// Mask CSV: one observed cell per line as "i,j" (0-based), or "i,j,p" when
// sampling probabilities are attached. All lines must agree on which form.
ObservationMask read_mask_csv(const std::string &path, Eigen::Index rows, Eigen::Index cols);
void write_mask_csv(const std::string &path, const ObservationMask &mask);

// Configuration list: either an explicit array of
//   {"id"?, "format_a": {...}, "format_b": {...}}
// or {"formats_a": [...], "formats_b": [...]} whose cross product (a-major)
// is taken. Format objects are {"exponent_bits", "mantissa_bits", "bias"?}.
std::vector<PrecisionConfig> read_configs_json(const std::string &path);

// Architecture JSON: one object with the four descriptor fields, or an array
// of such objects each with an optional "name".
std::vector<std::pair<std::string, ArchitectureDescriptor>> read_arch_json(
    const std::string &path);

// Partial overrides of the defaults; unknown keys are rejected.
GpConfig read_gp_json(const std::string &path);
ImputeConfig read_impute_json(const std::string &path);

// One frontier point as reported: raw and normalized memory, the error, and
// whether that error was predicted rather than measured.
struct FrontierRow {
  int config_id = 0;
  double memory_bytes = 0.0;
  double memory_normalized = 0.0;
  double error = 0.0;
  bool estimated = false;
};

// Rows for a front, normalizing memory by [m_min, m_max]; a point is marked
// estimated unless its config id appears in `measured`.
std::vector<FrontierRow> frontier_rows(const ParetoFront &front, double m_min, double m_max,
                                       const std::vector<int> &measured);

void write_front_json(const std::string &path, const std::vector<FrontierRow> &rows);
void write_front_csv(const std::string &path, const std::vector<FrontierRow> &rows);

void write_report_json(const std::string &path, const RunReport &report);
// Plot-ready aggregate table, one technique x budget row per line.
void write_report_csv(const std::string &path, const RunReport &report);

// some/path/report.json -> some/path/report.csv (appends .csv otherwise).
std::string sibling_csv_path(const std::string &json_path);

} // namespace pfr

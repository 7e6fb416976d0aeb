#include "pfr/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pfr {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::ifstream open_in(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string &s, const std::string &what) {
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error("bad " + what + ": '" + s + "'");
  return v;
}

long long parse_int(const std::string &s, const std::string &what) {
  char *end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error("bad " + what + ": '" + s + "'");
  return v;
}

ordered_json parse_json_file(const std::string &path) {
  std::ifstream in = open_in(path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

PrecisionFormat format_from_json(const ordered_json &j) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "exponent_bits" && it.key() != "mantissa_bits" && it.key() != "bias")
      throw std::runtime_error("unknown format key: " + it.key());
  PrecisionFormat f;
  f.exponent_bits = j.at("exponent_bits").get<int>();
  f.mantissa_bits = j.at("mantissa_bits").get<int>();
  if (j.contains("bias")) f.bias = j.at("bias").get<int>();
  f.validate();
  return f;
}

ArchitectureDescriptor arch_from_json(const ordered_json &j) {
  ArchitectureDescriptor a;
  a.weight_count = j.at("weight_count").get<std::int64_t>();
  a.activation_elements_per_sample = j.at("activation_elements_per_sample").get<std::int64_t>();
  a.batch_size = j.at("batch_size").get<std::int64_t>();
  a.optimizer_state_multiplier = j.at("optimizer_state_multiplier").get<double>();
  return a;
}

} // namespace

MeasurementMatrix read_matrix_csv(const std::string &path, MatrixKind kind) {
  std::ifstream in = open_in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line != "\r") lines.push_back(line);
  if (lines.size() < 2) throw std::runtime_error(path + ": need a header and at least one row");

  MeasurementMatrix m;
  m.kind = kind;
  const std::vector<std::string> header = split_line(lines[0]);
  if (header.size() < 2) throw std::runtime_error(path + ": header has no configuration ids");
  for (std::size_t c = 1; c < header.size(); ++c)
    m.col_ids.push_back(static_cast<int>(parse_int(header[c], "configuration id")));

  const Eigen::Index d = static_cast<Eigen::Index>(m.col_ids.size());
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size() - 1);
  m.values.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<std::string> fields = split_line(lines[static_cast<std::size_t>(i) + 1]);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1)
      throw std::runtime_error(path + ": row " + std::to_string(i) + " has " +
                               std::to_string(fields.size() - 1) + " cells, expected " +
                               std::to_string(d));
    m.row_ids.push_back(fields[0]);
    for (Eigen::Index j = 0; j < d; ++j) {
      const std::string &cell = fields[static_cast<std::size_t>(j) + 1];
      m.values(i, j) =
          cell.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(cell, "cell");
    }
  }
  m.validate();
  return m;
}

void write_matrix_csv(const std::string &path, const MeasurementMatrix &m) {
  m.validate();
  for (const std::string &id : m.row_ids)
    if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos)
      throw std::invalid_argument("dataset id not representable in CSV: " + id);
  std::ofstream out = open_out(path);
  for (int id : m.col_ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << m.row_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << ',';
      if (!std::isnan(m.values(i, j))) out << fmt(m.values(i, j));
    }
    out << '\n';
  }
}

ObservationMask read_mask_csv(const std::string &path, Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in = open_in(path);
  ObservationMask mask;
  mask.observed = ArrayXXb::Constant(rows, cols, false);
  std::string line;
  int with_p = -1; // -1 undecided, then 0/1
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 2 && f.size() != 3)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected i,j or i,j,p");
    const int has_p = f.size() == 3 ? 1 : 0;
    if (with_p == -1) {
      with_p = has_p;
      if (has_p) mask.probs = Eigen::MatrixXd::Ones(rows, cols);
    } else if (with_p != has_p) {
      throw std::runtime_error(path + ": lines must consistently include probabilities");
    }
    const long long i = parse_int(f[0], "row index"), j = parse_int(f[1], "column index");
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": cell out of range");
    if (mask.observed(i, j))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate cell");
    mask.observed(i, j) = true;
    if (has_p) mask.probs(i, j) = parse_double(f[2], "probability");
  }
  mask.validate();
  return mask;
}

void write_mask_csv(const std::string &path, const ObservationMask &mask) {
  mask.validate();
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      if (!mask.observed(i, j)) continue;
      out << i << ',' << j;
      if (mask.has_probs()) out << ',' << fmt(mask.probs(i, j));
      out << '\n';
    }
}

std::vector<PrecisionConfig> read_configs_json(const std::string &path) {
  const ordered_json j = parse_json_file(path);
  std::vector<PrecisionConfig> configs;
  if (j.is_array()) {
    int next_id = 0;
    for (const auto &item : j) {
      PrecisionConfig c;
      c.id = item.contains("id") ? item.at("id").get<int>() : next_id;
      c.format_a = format_from_json(item.at("format_a"));
      c.format_b = format_from_json(item.at("format_b"));
      configs.push_back(c);
      ++next_id;
    }
  } else if (j.is_object() && j.contains("formats_a") && j.contains("formats_b")) {
    int id = 0;
    for (const auto &a : j.at("formats_a"))
      for (const auto &b : j.at("formats_b"))
        configs.push_back({id++, format_from_json(a), format_from_json(b)});
  } else {
    throw std::runtime_error(path + ": expected a config array or formats_a/formats_b tables");
  }
  if (configs.empty()) throw std::runtime_error(path + ": no configurations");
  std::set<int> ids;
  for (const PrecisionConfig &c : configs)
    if (!ids.insert(c.id).second)
      throw std::runtime_error(path + ": duplicate config id " + std::to_string(c.id));
  return configs;
}

std::vector<std::pair<std::string, ArchitectureDescriptor>> read_arch_json(
    const std::string &path) {
  const ordered_json j = parse_json_file(path);
  std::vector<std::pair<std::string, ArchitectureDescriptor>> out;
  if (j.is_object()) {
    out.emplace_back("arch", arch_from_json(j));
  } else if (j.is_array()) {
    int idx = 0;
    for (const auto &item : j) {
      std::string name = item.contains("name") ? item.at("name").get<std::string>()
                                               : "arch" + std::to_string(idx);
      out.emplace_back(std::move(name), arch_from_json(item));
      ++idx;
    }
  } else {
    throw std::runtime_error(path + ": expected an architecture object or array");
  }
  if (out.empty()) throw std::runtime_error(path + ": no architectures");
  return out;
}

GpConfig read_gp_json(const std::string &path) {
  const ordered_json j = parse_json_file(path);
  GpConfig g;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "length_scale") g.length_scale = it.value().get<double>();
    else if (it.key() == "noise_var") g.noise_var = it.value().get<double>();
    else if (it.key() == "xi") g.xi = it.value().get<double>();
    else throw std::runtime_error(path + ": unknown key " + it.key());
  }
  return g;
}

ImputeConfig read_impute_json(const std::string &path) {
  const ordered_json j = parse_json_file(path);
  ImputeConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "lambda") c.lambda = it.value().get<double>();
    else if (it.key() == "decay") c.decay = it.value().get<double>();
    else if (it.key() == "stages") c.stages = it.value().get<int>();
    else if (it.key() == "max_iters") c.max_iters = it.value().get<int>();
    else if (it.key() == "tol") c.tol = it.value().get<double>();
    else throw std::runtime_error(path + ": unknown key " + it.key());
  }
  c.validate();
  return c;
}

std::vector<FrontierRow> frontier_rows(const ParetoFront &front, double m_min, double m_max,
                                       const std::vector<int> &measured) {
  if (!(m_max > m_min)) throw std::invalid_argument("memory range must be nonempty");
  std::vector<FrontierRow> rows;
  rows.reserve(front.points.size());
  for (const ParetoPoint &p : front.points) {
    FrontierRow r;
    r.config_id = p.config_id;
    r.memory_bytes = p.memory;
    r.memory_normalized = (p.memory - m_min) / (m_max - m_min);
    r.error = p.error;
    r.estimated = std::find(measured.begin(), measured.end(), p.config_id) == measured.end();
    rows.push_back(r);
  }
  return rows;
}

void write_front_json(const std::string &path, const std::vector<FrontierRow> &rows) {
  ordered_json arr = ordered_json::array();
  for (const FrontierRow &r : rows) {
    ordered_json o;
    o["config_id"] = r.config_id;
    o["memory_bytes"] = r.memory_bytes;
    o["memory_normalized"] = r.memory_normalized;
    o["error"] = r.error;
    o["estimated"] = r.estimated;
    arr.push_back(std::move(o));
  }
  open_out(path) << arr.dump(2) << '\n';
}

void write_front_csv(const std::string &path, const std::vector<FrontierRow> &rows) {
  std::ofstream out = open_out(path);
  out << "config_id,memory_bytes,memory_normalized,error,estimated\n";
  for (const FrontierRow &r : rows)
    out << r.config_id << ',' << fmt(r.memory_bytes) << ',' << fmt(r.memory_normalized) << ','
        << fmt(r.error) << ',' << (r.estimated ? 1 : 0) << '\n';
}

void write_report_json(const std::string &path, const RunReport &report) {
  ordered_json j;
  j["setting"] = report.setting;
  j["rank"] = report.rank;
  if (report.memory_cap) j["memory_cap"] = *report.memory_cap;
  else j["memory_cap"] = nullptr;
  j["impute"] = {{"lambda", report.impute.lambda},
                 {"decay", report.impute.decay},
                 {"stages", report.impute.stages},
                 {"max_iters", report.impute.max_iters},
                 {"tol", report.impute.tol}};
  j["gp"] = {{"length_scale", report.gp.length_scale},
             {"noise_var", report.gp.noise_var},
             {"xi", report.gp.xi}};
  j["techniques"] = report.techniques;
  j["budgets"] = report.budgets;
  j["seeds"] = report.seeds;
  ordered_json aggs = ordered_json::array();
  for (const AggregateRow &a : report.aggregates) {
    ordered_json o;
    o["technique"] = a.technique;
    o["budget"] = a.budget;
    o["convergence_mean"] = a.convergence_mean;
    o["convergence_se"] = a.convergence_se;
    o["hyperdiff_mean"] = a.hyperdiff_mean;
    o["hyperdiff_se"] = a.hyperdiff_se;
    o["relative_error_mean"] = a.relative_error_mean;
    o["relative_error_se"] = a.relative_error_se;
    o["chosen_true_error_mean"] = a.chosen_true_error_mean;
    o["chosen_true_error_se"] = a.chosen_true_error_se;
    o["memory_fraction_mean"] = a.memory_fraction_mean;
    aggs.push_back(std::move(o));
  }
  j["aggregates"] = std::move(aggs);
  ordered_json recs = ordered_json::array();
  for (const SplitRecord &r : report.records) {
    ordered_json o;
    o["seed"] = r.seed;
    o["dataset"] = r.dataset;
    o["technique"] = r.technique;
    o["budget"] = r.budget;
    o["selected"] = r.selected;
    o["memory_fraction"] = r.memory_fraction;
    o["convergence"] = r.convergence;
    o["hyperdiff"] = r.hyperdiff;
    o["relative_error"] = r.relative_error;
    o["chosen_config"] = r.chosen_config;
    o["chosen_true_error"] = r.chosen_true_error;
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  open_out(path) << j.dump(2) << '\n';
}

void write_report_csv(const std::string &path, const RunReport &report) {
  std::ofstream out = open_out(path);
  out << "technique,budget,convergence_mean,convergence_se,hyperdiff_mean,hyperdiff_se,"
         "relative_error_mean,relative_error_se,chosen_true_error_mean,chosen_true_error_se,"
         "memory_fraction_mean\n";
  for (const AggregateRow &a : report.aggregates)
    out << a.technique << ',' << a.budget << ',' << fmt(a.convergence_mean) << ','
        << fmt(a.convergence_se) << ',' << fmt(a.hyperdiff_mean) << ',' << fmt(a.hyperdiff_se)
        << ',' << fmt(a.relative_error_mean) << ',' << fmt(a.relative_error_se) << ','
        << fmt(a.chosen_true_error_mean) << ',' << fmt(a.chosen_true_error_se) << ','
        << fmt(a.memory_fraction_mean) << '\n';
}

std::string sibling_csv_path(const std::string &json_path) {
  const std::string suffix = ".json";
  if (json_path.size() > suffix.size() &&
      json_path.compare(json_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return json_path.substr(0, json_path.size() - suffix.size()) + ".csv";
  return json_path + ".csv";
}

} // namespace pfr

#include "pfr/completion.hpp"
#include "pfr/formats.hpp"
#include "pfr/harness.hpp"
#include "pfr/io.hpp"
#include "pfr/matrix.hpp"
#include "pfr/pareto.hpp"
#include "pfr/selection.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace {

long long parse_ll(const std::string &tok) {
  char *end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') throw std::runtime_error("bad integer: " + tok);
  return v;
}

// "3..8" (inclusive) or "3,5,7".
std::vector<long long> parse_int_list(const std::string &spec) {
  std::vector<long long> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const long long a = parse_ll(spec.substr(0, dots));
    const long long b = parse_ll(spec.substr(dots + 2));
    if (b < a) throw std::runtime_error("empty range: " + spec);
    for (long long x = a; x <= b; ++x) out.push_back(x);
  } else {
    std::string cur;
    for (char c : spec + ",") {
      if (c == ',') {
        if (!cur.empty()) out.push_back(parse_ll(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
  if (out.empty()) throw std::runtime_error("empty list: " + spec);
  return out;
}

std::vector<std::string> split_names(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd &v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::Index find_row(const pfr::MeasurementMatrix &m, const std::string &id) {
  for (std::size_t i = 0; i < m.row_ids.size(); ++i)
    if (m.row_ids[i] == id) return static_cast<Eigen::Index>(i);
  throw std::runtime_error("dataset id not found: " + id);
}

void check_same_columns(const pfr::MeasurementMatrix &a, const pfr::MeasurementMatrix &b,
                        const std::string &what) {
  if (a.col_ids != b.col_ids) throw std::runtime_error("configuration ids differ: " + what);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"error-memory frontier estimation over low-precision training configurations"};
  app.require_subcommand(1);

  // ---- sample ----
  struct {
    std::string error, memory, scheme = "uniform", out = "mask.csv";
    double ratio = 0.2, pmax = 0.5;
    std::uint64_t seed = 0;
  } smp;
  CLI::App *sample = app.add_subcommand("sample", "draw an observation mask over an error matrix");
  sample->add_option("--error", smp.error, "error matrix CSV")->required();
  sample->add_option("--memory", smp.memory, "memory matrix CSV (needed for nonuniform)");
  sample->add_option("--scheme", smp.scheme, "uniform|nonuniform")
      ->check(CLI::IsMember({"uniform", "nonuniform"}));
  sample->add_option("--ratio", smp.ratio, "uniform sampling rate");
  sample->add_option("--pmax", smp.pmax, "probability ceiling for nonuniform sampling");
  sample->add_option("--seed", smp.seed, "RNG seed");
  sample->add_option("--out", smp.out, "output mask CSV");
  sample->callback([&] {
    const pfr::MeasurementMatrix E = pfr::read_matrix_csv(smp.error, pfr::MatrixKind::Error);
    pfr::ObservationMask mask;
    if (smp.scheme == "uniform") {
      mask = pfr::uniform_mask(E.rows(), E.cols(), smp.ratio, smp.seed);
    } else {
      if (smp.memory.empty()) throw std::runtime_error("nonuniform sampling needs --memory");
      const pfr::MeasurementMatrix M = pfr::read_matrix_csv(smp.memory, pfr::MatrixKind::Memory);
      M.require_full();
      if (M.rows() != E.rows() || M.cols() != E.cols())
        throw std::runtime_error("error and memory shapes differ");
      mask = pfr::sample_mask(pfr::nonuniform_probs(M.values, smp.pmax), smp.seed);
    }
    pfr::write_mask_csv(smp.out, mask);
    std::printf("wrote %s (%lld of %lld cells observed)\n", smp.out.c_str(),
                static_cast<long long>(mask.count()),
                static_cast<long long>(mask.rows() * mask.cols()));
  });

  // ---- complete ----
  struct {
    std::string error, mask, impute, out = "Ehat.csv";
    bool weighted = false;
    double lambda = 0.1, decay = 0.7, tol = 1e-5;
    int stages = 10, max_iters = 500, rank = 5;
  } cmp;
  CLI::App *complete = app.add_subcommand("complete", "fill a partially observed error matrix");
  complete->add_option("--error", cmp.error, "error matrix CSV")->required();
  complete->add_option("--mask", cmp.mask, "observation mask CSV")->required();
  complete->add_flag("--weighted", cmp.weighted, "inverse-propensity weighting (mask needs p)");
  CLI::Option *olam = complete->add_option("--lambda", cmp.lambda, "final nuclear penalty");
  CLI::Option *odec = complete->add_option("--decay", cmp.decay, "per-stage penalty decay");
  CLI::Option *ostg = complete->add_option("--stages", cmp.stages, "annealing stages");
  CLI::Option *oitr = complete->add_option("--max-iters", cmp.max_iters, "iterations per stage");
  CLI::Option *otol = complete->add_option("--tol", cmp.tol, "relative-change stopping tolerance");
  complete->add_option("--impute", cmp.impute, "completion config JSON (flags override it)");
  complete->add_option("--rank", cmp.rank, "truncation rank for the output (0 keeps full)");
  complete->add_option("--out", cmp.out, "output estimate CSV");
  complete->callback([&] {
    pfr::ImputeConfig cfg =
        cmp.impute.empty() ? pfr::ImputeConfig{} : pfr::read_impute_json(cmp.impute);
    if (olam->count()) cfg.lambda = cmp.lambda;
    if (odec->count()) cfg.decay = cmp.decay;
    if (ostg->count()) cfg.stages = cmp.stages;
    if (oitr->count()) cfg.max_iters = cmp.max_iters;
    if (otol->count()) cfg.tol = cmp.tol;
    cfg.validate();
    const pfr::MeasurementMatrix E = pfr::read_matrix_csv(cmp.error, pfr::MatrixKind::Error);
    const pfr::ObservationMask mask = pfr::read_mask_csv(cmp.mask, E.rows(), E.cols());
    const pfr::PartialMatrix partial = pfr::apply_mask(E.values, mask);
    if (cmp.weighted && !mask.has_probs())
      throw std::runtime_error("--weighted needs a mask with sampling probabilities");
    Eigen::MatrixXd filled = cmp.weighted ? pfr::weighted_softimpute(partial, mask.probs, cfg)
                                          : pfr::softimpute(partial, cfg);
    if (cmp.rank > 0) filled = pfr::truncated_factorize(filled, cmp.rank).reconstruct();
    pfr::MeasurementMatrix out = E;
    // estimates are clipped into the valid error range on output
    out.values = filled.cwiseMax(0.0).cwiseMin(1.0);
    pfr::write_matrix_csv(cmp.out, out);
    std::printf("wrote %s\n", cmp.out.c_str());
  });

  // ---- pareto ----
  struct {
    std::string error, memory, row, out = "front.json";
    bool estimated = false;
  } par;
  CLI::App *pareto = app.add_subcommand("pareto", "extract one dataset's error-memory frontier");
  pareto->add_option("--error", par.error, "error (or estimate) matrix CSV")->required();
  pareto->add_option("--memory", par.memory, "memory matrix CSV")->required();
  pareto->add_option("--row", par.row, "dataset id")->required();
  pareto->add_flag("--estimated", par.estimated, "mark all frontier errors as estimated");
  pareto->add_option("--out", par.out, "output frontier JSON (CSV written alongside)");
  pareto->callback([&] {
    const pfr::MeasurementMatrix E = pfr::read_matrix_csv(par.error, pfr::MatrixKind::Error);
    const pfr::MeasurementMatrix M = pfr::read_matrix_csv(par.memory, pfr::MatrixKind::Memory);
    check_same_columns(E, M, par.error + " vs " + par.memory);
    const Eigen::Index ei = find_row(E, par.row), mi = find_row(M, par.row);
    std::vector<pfr::ParetoPoint> pts;
    for (Eigen::Index j = 0; j < E.cols(); ++j) {
      if (std::isnan(E.values(ei, j)) || std::isnan(M.values(mi, j)))
        throw std::runtime_error("row " + par.row + " has missing cells");
      pts.push_back({M.values(mi, j), E.values(ei, j), E.col_ids[static_cast<std::size_t>(j)]});
    }
    const pfr::ParetoFront front = pfr::pareto_front(pts);
    const double lo = M.values.row(mi).minCoeff(), hi = M.values.row(mi).maxCoeff();
    const std::vector<int> measured = par.estimated ? std::vector<int>{} : E.col_ids;
    const std::vector<pfr::FrontierRow> rows = pfr::frontier_rows(front, lo, hi, measured);
    pfr::write_front_json(par.out, rows);
    pfr::write_front_csv(pfr::sibling_csv_path(par.out), rows);
    std::printf("wrote %s (%zu frontier points)\n", par.out.c_str(), rows.size());
  });

  // ---- select ----
  struct {
    std::string train, memory_new, oracle, technique = "ed-mf", gp, out = "estimate.json";
    int budget = 3, rank = 3;
    double mem_cap = 0.0;
    std::uint64_t seed = 0;
  } sel;
  CLI::App *select = app.add_subcommand("select", "measure a new dataset and estimate its frontier");
  select->add_option("--train", sel.train, "completed training error matrix CSV")->required();
  select->add_option("--memory-new", sel.memory_new, "new dataset memory row CSV")->required();
  select->add_option("--oracle", sel.oracle, "new dataset true error row CSV")->required();
  select->add_option("--technique", sel.technique, "ed-mf|qr-mf|random-mf|bo-mf|bo-full");
  select->add_option("--budget", sel.budget, "measurement budget");
  select->add_option("--rank", sel.rank, "embedding rank");
  CLI::Option *ocap = select->add_option("--mem-cap", sel.mem_cap, "memory cap in bytes");
  select->add_option("--seed", sel.seed, "RNG seed");
  select->add_option("--gp", sel.gp, "GP hyperparameter JSON");
  select->add_option("--out", sel.out, "output estimate JSON (frontier CSV alongside)");
  select->callback([&] {
    const pfr::MeasurementMatrix train = pfr::read_matrix_csv(sel.train, pfr::MatrixKind::Error);
    train.require_full();
    const pfr::MeasurementMatrix Mnew =
        pfr::read_matrix_csv(sel.memory_new, pfr::MatrixKind::Memory);
    Mnew.require_full();
    const pfr::MeasurementMatrix Enew = pfr::read_matrix_csv(sel.oracle, pfr::MatrixKind::Error);
    Enew.require_full();
    check_same_columns(train, Mnew, "train vs memory row");
    check_same_columns(train, Enew, "train vs oracle row");
    const Eigen::VectorXd m_new = Mnew.values.row(0).transpose();
    const Eigen::VectorXd e_new = Enew.values.row(0).transpose();
    const pfr::Technique tech = pfr::parse_technique(sel.technique);
    const pfr::GpConfig gp = sel.gp.empty() ? pfr::GpConfig{} : pfr::read_gp_json(sel.gp);
    std::optional<double> cap;
    if (ocap->count()) cap = sel.mem_cap;
    const pfr::MetaTestResult res = pfr::meta_test_pipeline(
        train.values, m_new, tech, sel.budget, cap,
        [&e_new](Eigen::Index j) { return e_new(j); }, sel.rank, gp, sel.seed);

    std::vector<int> selected_ids;
    for (Eigen::Index j : res.estimate.selected)
      selected_ids.push_back(train.col_ids[static_cast<std::size_t>(j)]);
    pfr::ParetoFront mapped = res.front;
    for (pfr::ParetoPoint &p : mapped.points)
      p.config_id = train.col_ids[static_cast<std::size_t>(p.config_id)];
    const std::vector<pfr::FrontierRow> rows =
        pfr::frontier_rows(mapped, m_new.minCoeff(), m_new.maxCoeff(), selected_ids);

    nlohmann::ordered_json j;
    j["technique"] = pfr::technique_name(tech);
    j["budget"] = sel.budget;
    j["rank"] = sel.rank;
    j["seed"] = sel.seed;
    if (cap) j["mem_cap"] = *cap;
    else j["mem_cap"] = nullptr;
    j["selected"] = selected_ids;
    j["e_obs"] = to_std(res.estimate.e_obs);
    j["x_new"] = to_std(res.estimate.x_new);
    j["config_ids"] = train.col_ids;
    j["e_hat"] = to_std(res.estimate.e_hat);
    nlohmann::ordered_json jf = nlohmann::ordered_json::array();
    for (const pfr::FrontierRow &r : rows)
      jf.push_back({{"config_id", r.config_id},
                    {"memory_bytes", r.memory_bytes},
                    {"memory_normalized", r.memory_normalized},
                    {"error", r.error},
                    {"estimated", r.estimated}});
    j["front"] = std::move(jf);
    j["chosen"] = {{"config_id", train.col_ids[static_cast<std::size_t>(res.chosen.config_id)]},
                   {"memory_bytes", res.chosen.memory},
                   {"error", res.chosen.error}};
    std::ofstream out(sel.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + sel.out);
    out << j.dump(2) << '\n';
    pfr::write_front_csv(pfr::sibling_csv_path(sel.out), rows);
    std::printf("wrote %s (chosen config %d)\n", sel.out.c_str(),
                train.col_ids[static_cast<std::size_t>(res.chosen.config_id)]);
  });

  // ---- loocv ----
  struct {
    std::string error, memory, setting, techniques = "ed-mf,qr-mf,random-mf,bo-mf,bo-full";
    std::string budgets = "3..8", seeds = "0..199", impute, gp, out = "report.json";
    int rank = 3;
    double ratio = 0.2, pmax = 0.5, cap = -1.0;
  } lcv;
  CLI::App *loocv = app.add_subcommand("loocv", "leave-one-dataset-out benchmark");
  loocv->add_option("--error", lcv.error, "error matrix CSV (fully observed)")->required();
  loocv->add_option("--memory", lcv.memory, "memory matrix CSV")->required();
  loocv->add_option("--setting", lcv.setting, "I..VI")->required();
  loocv->add_option("--techniques", lcv.techniques, "comma-separated technique names");
  loocv->add_option("--budgets", lcv.budgets, "list or a..b range");
  loocv->add_option("--seeds", lcv.seeds, "list or a..b range");
  loocv->add_option("--rank", lcv.rank, "embedding rank");
  loocv->add_option("--ratio", lcv.ratio, "uniform sampling rate (settings III/IV)");
  loocv->add_option("--pmax", lcv.pmax, "nonuniform probability ceiling (settings V/VI)");
  loocv->add_option("--cap", lcv.cap, "memory cap override in bytes (default: median of M)");
  loocv->add_option("--impute", lcv.impute, "completion config JSON");
  loocv->add_option("--gp", lcv.gp, "GP hyperparameter JSON");
  loocv->add_option("--out", lcv.out, "output report JSON (aggregate CSV alongside)");
  loocv->callback([&] {
    const pfr::MeasurementMatrix E = pfr::read_matrix_csv(lcv.error, pfr::MatrixKind::Error);
    const pfr::MeasurementMatrix M = pfr::read_matrix_csv(lcv.memory, pfr::MatrixKind::Memory);
    const pfr::LoocvSetting setting = pfr::make_setting(lcv.setting, lcv.ratio, lcv.pmax, lcv.cap);
    std::vector<pfr::Technique> techs;
    for (const std::string &name : split_names(lcv.techniques))
      techs.push_back(pfr::parse_technique(name));
    std::vector<int> budgets;
    for (long long b : parse_int_list(lcv.budgets)) budgets.push_back(static_cast<int>(b));
    std::vector<std::uint64_t> seeds;
    for (long long s : parse_int_list(lcv.seeds)) {
      if (s < 0) throw std::runtime_error("seeds must be nonnegative");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
    const pfr::ImputeConfig impute =
        lcv.impute.empty() ? pfr::ImputeConfig{} : pfr::read_impute_json(lcv.impute);
    const pfr::GpConfig gp = lcv.gp.empty() ? pfr::GpConfig{} : pfr::read_gp_json(lcv.gp);
    const pfr::RunReport report =
        pfr::run_meta_loocv(E, M, setting, techs, budgets, seeds, lcv.rank, impute, gp);
    pfr::write_report_json(lcv.out, report);
    pfr::write_report_csv(pfr::sibling_csv_path(lcv.out), report);
    std::printf("wrote %s (%zu records)\n", lcv.out.c_str(), report.records.size());
  });

  // ---- synth ----
  struct {
    long long n = 87, d = 99, rank = 5;
    double noise = 0.01;
    std::uint64_t seed = 0;
    std::string out_error = "E.csv", out_memory = "M.csv";
  } syn;
  CLI::App *synth = app.add_subcommand("synth", "generate a synthetic error/memory matrix pair");
  synth->add_option("--n", syn.n, "datasets");
  synth->add_option("--d", syn.d, "configurations");
  synth->add_option("--rank", syn.rank, "latent rank");
  synth->add_option("--noise", syn.noise, "logit noise standard deviation");
  synth->add_option("--seed", syn.seed, "RNG seed");
  synth->add_option("--out-error", syn.out_error, "output error CSV");
  synth->add_option("--out-memory", syn.out_memory, "output memory CSV");
  synth->callback([&] {
    const auto pair = pfr::synth_lowrank(syn.n, syn.d, syn.rank, syn.noise, syn.seed);
    pfr::write_matrix_csv(syn.out_error, pair.first);
    pfr::write_matrix_csv(syn.out_memory, pair.second);
    std::printf("wrote %s and %s\n", syn.out_error.c_str(), syn.out_memory.c_str());
  });

  // ---- memory ----
  struct {
    std::string configs, arch, out = "M.csv";
  } mem;
  CLI::App *memory = app.add_subcommand("memory", "memory footprint per configuration");
  memory->add_option("--configs", mem.configs, "configuration list JSON")->required();
  memory->add_option("--arch", mem.arch, "architecture descriptor JSON")->required();
  memory->add_option("--out", mem.out, "output memory CSV");
  memory->callback([&] {
    const std::vector<pfr::PrecisionConfig> configs = pfr::read_configs_json(mem.configs);
    const auto archs = pfr::read_arch_json(mem.arch);
    pfr::MeasurementMatrix M;
    M.kind = pfr::MatrixKind::Memory;
    M.values.resize(static_cast<Eigen::Index>(archs.size()),
                    static_cast<Eigen::Index>(configs.size()));
    for (const pfr::PrecisionConfig &c : configs) M.col_ids.push_back(c.id);
    for (std::size_t i = 0; i < archs.size(); ++i) {
      M.row_ids.push_back(archs[i].first);
      for (std::size_t j = 0; j < configs.size(); ++j)
        M.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            pfr::memory_bytes(configs[j], archs[i].second).total_bytes;
    }
    pfr::write_matrix_csv(mem.out, M);
    std::printf("wrote %s (%zu x %zu)\n", mem.out.c_str(), archs.size(), configs.size());
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "whitemetric/discrepancies.hpp"
#include "whitemetric/errors.hpp"
#include "whitemetric/io.hpp"
#include "whitemetric/model_eval.hpp"
#include "whitemetric/property_suite.hpp"
#include "whitemetric/transport.hpp"

using namespace whitemetric;
using namespace whitemetric::cli;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_starts;
  std::optional<double> radius;
  std::optional<std::size_t> max_iter;
  std::optional<double> sup_tol;
  std::optional<std::size_t> dense_limit;
  std::optional<std::size_t> mc_draws;
  std::optional<std::string> format;
  std::optional<std::string> whitening;
};

RunConfig resolve(const GlobalFlags& g) {
  RunConfig cfg;
  if (!g.config.empty()) cfg.load_file(g.config);
  auto put = [&](const char* key, const auto& opt) {
    if (!opt) return;
    std::ostringstream s;
    s.precision(17);
    s << *opt;
    cfg.set(key, s.str());
  };
  put("seed", g.seed);
  put("n_starts", g.n_starts);
  put("radius", g.radius);
  put("max_iter", g.max_iter);
  put("sup_tol", g.sup_tol);
  put("dense_limit", g.dense_limit);
  put("mc_draws", g.mc_draws);
  put("format", g.format);
  put("whitening", g.whitening);
  return cfg;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    std::string cell = s.substr(start, comma - start);
    const auto b = cell.find_first_not_of(' ');
    const auto e = cell.find_last_not_of(' ');
    cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
    try {
      out.push_back(parse_cell(cell, 0, out.size() + 1));
    } catch (const ParseError&) {
      throw UsageError("cannot parse '" + cell + "' as a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

json metadata_json(const DiscrepancyResult& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metadata) {
    if (const double* d = std::get_if<double>(&v)) {
      m[k] = *d;
    } else {
      m[k] = std::get<std::string>(v);
    }
  }
  return m;
}

json result_json(const DiscrepancyResult& r) {
  return json{{"kind", std::string(to_string(r.kind))},
              {"value", r.value},
              {"exact", r.exact},
              {"metadata", metadata_json(r)}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Top-level scalars as a two-line CSV, or the whole object as JSON.
void emit(const json& body, const RunConfig& cfg, std::ostream& out = std::cout) {
  const json full = with_meta(body, cfg);
  if (cfg.format == "csv") {
    std::string header;
    std::string values;
    for (auto it = full.begin(); it != full.end(); ++it) {
      if (it.value().is_structured()) continue;
      header += (header.empty() ? "" : ",") + it.key();
      values += (values.empty() ? "" : ",") +
                (it.value().is_string() ? it.value().get<std::string>() : dump(it.value()));
    }
    out << header << '\n' << values << '\n';
    return;
  }
  out << dump(full) << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write '" + path + "'", 0, 0);
  return f;
}

std::vector<std::string> header_names(const CsvTable& t) {
  std::vector<std::string> names;
  for (const std::string& h : t.header) {
    if (h != kWeightColumn) names.push_back(h);
  }
  return names;
}

// Subcommands.

int run_whiten(const RunConfig& cfg, const std::string& input, const std::string& out_path,
               const std::string& process, const std::string& matrix_path) {
  const CsvTable t = read_csv_file(input);
  const EmpiricalMeasure m = measure_from_csv(t);
  WhiteningProcess proc = cfg.whitening_process();
  if (!process.empty()) {
    const auto parsed = parse_whitening_process(process);
    if (!parsed) throw UsageError("unknown whitening process '" + process + "'");
    proc = *parsed;
  }
  const WhiteningMatrix w = whitening_for(m, proc);
  const EmpiricalMeasure white = whiten_empirical(m, w);
  const Matrix cov = estimate_covariance(white);
  if (!out_path.empty()) {
    std::ofstream f = open_out(out_path);
    write_measure_csv(f, white, header_names(t), {meta_comment(cfg)});
  }
  if (!matrix_path.empty()) {
    std::ofstream f = open_out(matrix_path);
    write_measure_csv(f, EmpiricalMeasure(w.matrix()), header_names(t), {meta_comment(cfg)});
  }
  if (cfg.format == "csv" && out_path.empty()) {
    write_measure_csv(std::cout, white, header_names(t), {meta_comment(cfg)});
    return kExitOk;
  }
  json body{{"process", std::string(to_string(w.process()))},
            {"matrix", matrix_json(w.matrix())},
            {"whitened_mean", vector_json(w.whitened_mean())},
            {"covariance_residual", identity_residual(cov)},
            {"points", m.size()},
            {"dim", m.dim()}};
  if (!out_path.empty()) body["output"] = out_path;
  emit(body, cfg);
  return kExitOk;
}

int run_ot(const RunConfig& cfg, const std::string& src_path, const std::string& dst_path,
           const std::string& method, std::optional<double> epsilon, const std::string& cost,
           const std::string& plan_out) {
  const EmpiricalMeasure src = read_measure(src_path);
  const EmpiricalMeasure dst = read_measure(dst_path);
  const GroundCost ground =
      cost == "sqeuclidean" ? GroundCost::squared_euclidean : GroundCost::euclidean;
  TransportPlan plan;
  if (method == "exact") {
    ExactOtOptions o;
    o.cost = ground;
    o.dense_limit = cfg.dense_limit;
    plan = solve_w1_exact(src, dst, o);
  } else {
    SinkhornOptions o;
    o.epsilon = epsilon.value_or(cfg.sinkhorn_epsilon);
    o.max_iter = cfg.sinkhorn_max_iter;
    o.tolerance = cfg.sinkhorn_tol;
    o.cost = ground;
    plan = solve_sinkhorn(src, dst, o);
  }
  if (!plan_out.empty()) {
    std::ofstream f = open_out(plan_out);
    f << "# " << meta_comment(cfg) << '\n';
    for (Index j = 0; j < plan.coupling.cols(); ++j) f << (j ? "," : "") << "t" << j;
    f << '\n';
    for (Index i = 0; i < plan.coupling.rows(); ++i) {
      for (Index j = 0; j < plan.coupling.cols(); ++j) {
        f << (j ? "," : "") << format_number(plan.coupling(i, j));
      }
      f << '\n';
    }
  }
  emit(json{{"cost", plan.cost},
            {"marginal_error", plan.marginal_error},
            {"method", plan.method},
            {"iterations", plan.iterations},
            {"ground_cost", cost}},
       cfg);
  return kExitOk;
}

int run_cf(const RunConfig& cfg, const std::string& input, const std::string& xi_text,
           bool whiten) {
  EmpiricalMeasure m = read_measure(input);
  if (whiten) m = whiten_empirical(m, whitening_for(m, cfg.whitening_process()));
  const std::vector<double> xs = parse_list(xi_text);
  const Vector xi = Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size()));
  const CharFnEvaluation e = ecf_eval(m, xi);
  json gre = json::array();
  json gim = json::array();
  for (Index k = 0; k < e.gradient.size(); ++k) {
    gre.push_back(e.gradient(k).real());
    gim.push_back(e.gradient(k).imag());
  }
  emit(json{{"re", e.value.real()}, {"im", e.value.imag()}, {"grad_re", gre}, {"grad_im", gim}},
       cfg);
  return kExitOk;
}

GaussianMeasure gaussian_input(const std::string& path, const std::string& cov_path) {
  if (!cov_path.empty()) return read_gaussian(path, cov_path);
  const EmpiricalMeasure m = read_measure(path);
  return GaussianMeasure(estimate_mean(m), estimate_covariance(m));
}

int run_disc(const RunConfig& cfg, const std::string& kind, const std::string& a_path,
             const std::string& b_path, bool gaussian, const std::string& a_cov,
             const std::string& b_cov) {
  const WhiteningProcess proc = cfg.whitening_process();
  if (gaussian || kind == "gini-upper") {
    const GaussianMeasure a = gaussian_input(a_path, a_cov);
    const GaussianMeasure b = gaussian_input(b_path, b_cov);
    if (kind == "wasserstein") return emit(result_json(white_wasserstein_gaussian(a, b)), cfg), kExitOk;
    if (kind == "fourier") return emit(result_json(white_fourier_gaussian(a, b)), cfg), kExitOk;
    if (kind == "gini-upper") return emit(result_json(gini_gaussian_upper(a, b)), cfg), kExitOk;
    if (kind == "gini") {
      const McEstimate mc =
          gini_gaussian_mc(a, b, static_cast<Index>(cfg.mc_draws), cfg.seed);
      emit(json{{"kind", "gini"},
                {"value", mc.estimate},
                {"exact", false},
                {"metadata", {{"std_error", mc.std_error}, {"draws", cfg.mc_draws}}}},
           cfg);
      return kExitOk;
    }
    throw UsageError("kind '" + kind + "' has no Gaussian form");
  }
  const EmpiricalMeasure a = read_measure(a_path);
  const EmpiricalMeasure b = read_measure(b_path);
  DiscrepancyResult r;
  if (kind == "wasserstein") {
    r = white_wasserstein(a, b, proc);
  } else if (kind == "fourier") {
    r = white_fourier(a, b, cfg.search(), proc);
  } else if (kind == "gini") {
    r = gini_discrepancy(a, b, proc);
  } else {
    r = d1_discrepancy(a, b, cfg.search(), proc);
  }
  emit(result_json(r), cfg);
  return kExitOk;
}

int run_tau(const RunConfig& cfg, const std::string& input, bool gaussian,
            const std::string& cov_path) {
  if (gaussian) {
    const GaussianMeasure g = gaussian_input(input, cov_path);
    emit(json{{"kind", "tau"}, {"value", tau_gaussian(g)}, {"cvn", cvn_gaussian(g)}, {"exact", true}}, cfg);
    return kExitOk;
  }
  const EmpiricalMeasure m = read_measure(input);
  EmpiricalMeasure w = whiten_empirical(m, whitening_for(m, cfg.whitening_process()));
  const Vector mean = estimate_mean(w);
  const SupSearchResult s = tau_search(empirical_cf(std::move(w)), mean, cfg.search());
  emit(json{{"kind", "tau"}, {"value", s.value},
            {"exact", false},
            {"argmax", vector_json(s.argmax)},
            {"argmax_norm", s.argmax.norm()},
            {"evaluations", s.evaluations}},
       cfg);
  return kExitOk;
}

int run_gauss(const RunConfig& cfg, const std::string& kind, const std::string& mean1,
              const std::string& cov1, const std::string& mean2, const std::string& cov2) {
  const GaussianMeasure a = read_gaussian(mean1, cov1);
  auto second = [&] {
    if (mean2.empty() || cov2.empty()) {
      throw UsageError("kind '" + kind + "' needs --mean2 and --cov2");
    }
    return read_gaussian(mean2, cov2);
  };
  json body{{"kind", kind}, {"exact", true}};
  if (kind == "w2") {
    body["value"] = gaussian_w2(a, second());
  } else if (kind == "wasserstein") {
    body["value"] = white_wasserstein_gaussian(a, second()).value;
  } else if (kind == "fourier") {
    body["value"] = white_fourier_gaussian(a, second()).value;
  } else if (kind == "gini-upper") {
    body["value"] = gini_gaussian_upper(a, second()).value;
  } else if (kind == "tau") {
    body["value"] = tau_gaussian(a);
  } else {
    body["value"] = cvn_gaussian(a);
  }
  emit(body, cfg);
  return kExitOk;
}

json suite_json(const std::vector<CheckReport>& reports) {
  json checks = json::array();
  bool passed = true;
  for (const CheckReport& r : reports) {
    passed = passed && r.passed();
    checks.push_back(json{{"check_name", r.check_name},
                          {"instances", r.instances},
                          {"failures", r.failures},
                          {"worst_slack", r.worst_slack},
                          {"seed", r.seed}});
  }
  return json{{"checks", checks}, {"passed", passed}};
}

int run_selftest(const RunConfig& cfg, const std::string& json_path) {
  const std::vector<CheckReport> reports = run_suite(cfg.seed);
  const json body = suite_json(reports);
  if (!json_path.empty()) {
    std::ofstream f = open_out(json_path);
    f << dump(with_meta(body, cfg)) << '\n';
  }
  emit(body, cfg);
  return body["passed"].get<bool>() ? kExitOk : kExitCheckFailed;
}

json report_json(const EvalReport& r) {
  json models = json::array();
  for (const ModelScores& m : r.models) {
    json e{{"name", m.name}, {"rmse_o", m.rmse_original}, {"rmse_w", m.rmse_normalised}};
    if (m.whitened_original) {
      e["wass"] = m.whitened_original->wass;
      e["gini_upper"] = m.whitened_original->gini_upper;
      e["wass_w"] = m.whitened_normalised->wass;
      e["gini_upper_w"] = m.whitened_normalised->gini_upper;
    } else {
      e["wass"] = nullptr;
      e["gini_upper"] = nullptr;
      e["error"] = m.error;
    }
    models.push_back(e);
  }
  json winners = json::object();
  for (const auto& [metric, name] : r.winners) winners[metric] = name;
  return json{{"models", models},
              {"winners", winners},
              {"whitened_gap", r.whitened_gap},
              {"whitened_consistent", r.whitened_consistent}};
}

void write_report_csv(std::ostream& out, const EvalReport& r, const RunConfig& cfg) {
  out << "# " << meta_comment(cfg) << '\n';
  out << "name,rmse_o,rmse_w,wass,gini_upper,error\n";
  for (const ModelScores& m : r.models) {
    out << m.name << ',' << format_number(m.rmse_original) << ','
        << format_number(m.rmse_normalised) << ',';
    if (m.whitened_original) {
      out << format_number(m.whitened_original->wass) << ','
          << format_number(m.whitened_original->gini_upper) << ",\n";
    } else {
      out << ",," << m.error << '\n';
    }
  }
}

int run_modelcmp(const RunConfig& cfg, const std::string& data_path,
                 std::optional<std::size_t> synthetic, const std::string& models,
                 double split_ratio, const std::string& out_path, const std::string& csv_path,
                 bool flip_demo) {
  if (data_path.empty() == !synthetic) {
    throw UsageError("give exactly one of --data and --synthetic");
  }
  const RegressionDataset d =
      synthetic ? synth_esg_dataset(static_cast<Index>(*synthetic), cfg.seed)
                : read_dataset(data_path);
  std::vector<PredictorSpec> specs;
  std::stringstream ss(models);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      specs.push_back(parse_predictor(item));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  if (specs.size() < 2) throw UsageError("--models needs at least two entries");
  const EvalReport report = evaluate_models(d, specs, cfg.seed, split_ratio);
  json body = report_json(report);
  body["rows"] = d.size();
  body["split_ratio"] = split_ratio;
  bool consistent = report.whitened_consistent;
  if (flip_demo) {
    const FlipDemo demo = rmse_flip_demo(cfg.seed);
    const EvalReport fr = compare_predictions(demo.truth, {demo.pred_a, demo.pred_b}, {"a", "b"});
    body["flip_demo"] = report_json(fr);
    consistent = consistent && fr.whitened_consistent;
  }
  if (!csv_path.empty()) {
    std::ofstream f = open_out(csv_path);
    write_report_csv(f, report, cfg);
  }
  if (!out_path.empty()) {
    std::ofstream f = open_out(out_path);
    f << dump(with_meta(body, cfg)) << '\n';
  }
  emit(body, cfg);
  return consistent ? kExitOk : kExitCheckFailed;
}

int fail(int code, const std::string& name, const std::string& message) {
  std::cerr << dump(error_json(name, message, code)) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-invariant whitened discrepancies between multivariate distributions",
               "whitemetric"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--n-starts", g.n_starts, "Sup-search random starts");
  app.add_option("--radius", g.radius, "Sup-search radius");
  app.add_option("--max-iter", g.max_iter, "Sup-search local iterations");
  app.add_option("--sup-tol", g.sup_tol, "Sup-search tolerance");
  app.add_option("--dense-limit", g.dense_limit, "Largest N*M for exact transport");
  app.add_option("--mc-draws", g.mc_draws, "Monte Carlo draws");
  app.add_option("--format", g.format, "json or csv");
  app.add_option("--whitening", g.whitening, "zca-cor, cholesky or identity");

  std::string input, out, a, b, a_cov, b_cov, cov, kind, method = "exact", cost = "euclidean";
  std::string xi, plan_out, json_path, csv_path, data_path, models = "lin,lins,knn";
  std::string mean1, cov1, mean2, cov2;
  std::optional<double> epsilon;
  std::optional<std::size_t> synthetic;
  double split_ratio = 0.8;
  bool gaussian = false;
  bool whiten_first = false;
  bool flip_demo = false;

  auto* whiten = app.add_subcommand("whiten", "Whiten a point cloud");
  whiten->add_option("--input", input, "Input CSV")->required();
  std::string process, matrix_path;
  whiten->add_option("--output,--out", out, "Whitened CSV output");
  whiten->add_option("--process", process, "zca-cor, cholesky or identity");
  whiten->add_option("--emit-matrix", matrix_path, "Whitening matrix CSV output");

  auto* ot = app.add_subcommand("ot", "Optimal transport between two point clouds");
  ot->add_option("--src", a, "Source CSV")->required();
  ot->add_option("--dst", b, "Target CSV")->required();
  ot->add_option("--method", method, "exact or sinkhorn")
      ->check(CLI::IsMember({"exact", "sinkhorn"}));
  ot->add_option("--epsilon", epsilon, "Sinkhorn regularisation");
  ot->add_option("--cost", cost, "euclidean or sqeuclidean")
      ->check(CLI::IsMember({"euclidean", "sqeuclidean"}));
  ot->add_option("--plan-out", plan_out, "Coupling CSV output");

  auto* cf = app.add_subcommand("cf", "Empirical characteristic function at one frequency");
  cf->add_option("--input", input, "Input CSV")->required();
  cf->add_option("--xi", xi, "Comma-separated frequency")->required();
  cf->add_flag("--whiten", whiten_first, "Whiten before evaluating");

  auto* disc = app.add_subcommand("disc", "Whitened discrepancy between two samples");
  disc->add_option("--kind", kind, "wasserstein, fourier, gini, gini-upper or d1")
      ->required()
      ->check(CLI::IsMember({"wasserstein", "fourier", "gini", "gini-upper", "d1"}));
  disc->add_option("--a", a, "First CSV (sample, or mean row with --a-cov)")->required();
  disc->add_option("--b", b, "Second CSV (sample, or mean row with --b-cov)")->required();
  disc->add_flag("--gaussian", gaussian, "Use Gaussian closed forms");
  disc->add_option("--a-cov", a_cov, "Covariance CSV for --a");
  disc->add_option("--b-cov", b_cov, "Covariance CSV for --b");

  auto* tau = app.add_subcommand("tau", "Inequality index tau");
  tau->add_option("--input", input, "Sample CSV, or mean row with --cov")->required();
  tau->add_flag("--gaussian", gaussian, "Closed form from Gaussian moments");
  tau->add_option("--cov", cov, "Covariance CSV");

  auto* gauss = app.add_subcommand("gauss", "Gaussian closed forms");
  gauss->add_option("--kind", kind, "w2, wasserstein, fourier, gini-upper, tau or cvn")
      ->required()
      ->check(CLI::IsMember({"w2", "wasserstein", "fourier", "gini-upper", "tau", "cvn"}));
  gauss->add_option("--mean1", mean1, "Mean CSV")->required();
  gauss->add_option("--cov1", cov1, "Covariance CSV")->required();
  gauss->add_option("--mean2", mean2, "Second mean CSV");
  gauss->add_option("--cov2", cov2, "Second covariance CSV");

  auto* selftest = app.add_subcommand("selftest", "Run the randomized property suite");
  selftest->add_option("--json", json_path, "Report output");

  auto* modelcmp = app.add_subcommand("modelcmp", "Compare regression models");
  modelcmp->add_option("--data", data_path, "Dataset CSV");
  modelcmp->add_option("--synthetic", synthetic, "Generate a synthetic dataset of N rows");
  modelcmp->add_option("--models", models, "Comma-separated: lin, lins, knn, knn=K");
  modelcmp->add_option("--split", split_ratio, "Training fraction")->check(CLI::Range(0.0, 1.0));
  modelcmp->add_option("--out", out, "Report JSON output");
  modelcmp->add_option("--csv", csv_path, "Report CSV output");
  modelcmp->add_flag("--flip-demo", flip_demo, "Add the RMSE rescaling demonstration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitUsage, "UsageError", e.what());
  }

  try {
    const RunConfig cfg = resolve(g);
    if (*whiten) return run_whiten(cfg, input, out, process, matrix_path);
    if (*ot) return run_ot(cfg, a, b, method, epsilon, cost, plan_out);
    if (*cf) return run_cf(cfg, input, xi, whiten_first);
    if (*disc) return run_disc(cfg, kind, a, b, gaussian, a_cov, b_cov);
    if (*tau) return run_tau(cfg, input, gaussian, cov);
    if (*gauss) return run_gauss(cfg, kind, mean1, cov1, mean2, cov2);
    if (*selftest) return run_selftest(cfg, json_path);
    if (*modelcmp) {
      return run_modelcmp(cfg, data_path, synthetic, models, split_ratio, out, csv_path,
                          flip_demo);
    }
  } catch (const UsageError& e) {
    return fail(kExitUsage, "UsageError", e.what());
  } catch (const Error& e) {
    return fail(kExitData, to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(kExitData, "InternalError", e.what());
  }
  return kExitUsage;
}

#include "msgd/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "msgd/io.hpp"
#include "msgd/models.hpp"
#include "msgd/noise.hpp"
#include "msgd/optim.hpp"
#include "msgd/parallel.hpp"
#include "msgd/rng.hpp"
#include "msgd/sde.hpp"
#include "msgd/stats.hpp"
#include "msgd/theory.hpp"

namespace msgd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ExperimentContext {
  std::uint64_t seed = 0;
  fs::path out;
  std::vector<std::string> labels;

  RngStream stream(const std::string& label) {
    labels.push_back(label);
    return derive_stream(seed, label);
  }

  /// Register a label used inside a worker without creating the stream here.
  void note_label(const std::string& label) { labels.push_back(label); }
};

void add_assertion(ExperimentResult& result, const std::string& name, bool passed,
                   double observed, double limit) {
  result.assertions.push_back({name, passed, observed, limit});
  result.passed = result.passed && passed;
}

template <typename T>
T config_value(const json& config, const std::string& key, const T& fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

std::string empty_or(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string();
}

json report_to_json(const MomentReport& report) {
  json j;
  j["kind"] = to_string(report.spec.kind);
  j["n"] = report.spec.n;
  j["b"] = report.spec.b;
  if (report.spec.B) j["B"] = *report.spec.B;
  j["draws"] = report.draw_count;
  j["max_abs_mean_dev"] = report.max_abs_mean_dev;
  j["max_mean_dev_in_se"] = report.max_mean_dev_in_se;
  j["frob_rel_cov_dev"] = report.frob_rel_cov_dev;
  if (report.frob_rel_cov_dev_vs_full_sgd) {
    j["frob_rel_cov_dev_vs_full_sgd"] = *report.frob_rel_cov_dev_vs_full_sgd;
  }
  j["empirical_mean"] = std::vector<double>(
      report.empirical_mean.data(), report.empirical_mean.data() + report.empirical_mean.size());
  std::vector<std::vector<double>> cov;
  for (Eigen::Index i = 0; i < report.empirical_cov.rows(); ++i) {
    cov.emplace_back(report.empirical_cov.row(i).begin(), report.empirical_cov.row(i).end());
  }
  j["empirical_cov"] = cov;
  return j;
}

// ------------------------------------------------------------- moments

ExperimentResult run_moments(ExperimentContext& ctx, const json& config) {
  const int n = config_value(config, "n", 10);
  const int b = config_value(config, "b", 3);
  const int B = config_value(config, "B", 6);
  const long draws = config_value<long>(config, "draws", 100000);
  const double mean_limit = config_value(config, "mean_se_limit", 4.0);
  const double cov_limit = config_value(config, "cov_dev_limit", 0.05);

  std::vector<std::string> kind_names;
  if (config.contains("kinds")) {
    kind_names = config_value<std::vector<std::string>>(config, "kinds", {});
  } else {
    for (NoiseKind k :
         {NoiseKind::SgdWithReplacement, NoiseKind::SgdWithoutReplacement,
          NoiseKind::GaussianCov, NoiseKind::GaussianFisher, NoiseKind::Bernoulli,
          NoiseKind::SparseGaussianFisher, NoiseKind::TheoremSubsample,
          NoiseKind::TheoremGaussian}) {
      kind_names.push_back(to_string(k));
    }
  }
  if (kind_names.empty()) throw ConfigError("moments: empty kind list");

  ExperimentResult result;
  CsvWriter csv(ctx.out / "results.csv",
                {"kind", "n", "b", "B", "draws", "max_abs_mean_dev",
                 "max_mean_dev_in_se", "frob_rel_cov_dev",
                 "frob_rel_cov_dev_vs_full_sgd"});

  for (const std::string& name : kind_names) {
    SamplingSpec spec;
    try {
      spec.kind = noise_kind_from_string(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    spec.n = n;
    spec.b = b;
    if (kind_uses_outer_batch(spec.kind)) spec.B = B;
    try {
      validate(spec);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }

    RngStream s = ctx.stream("moments/" + name);
    const MomentReport report = empirical_moments(spec, s, draws);

    csv.field(name)
        .field(spec.n)
        .field(spec.b)
        .field(empty_or(spec.B))
        .field(static_cast<long>(draws))
        .field(report.max_abs_mean_dev)
        .field(report.max_mean_dev_in_se)
        .field(report.frob_rel_cov_dev)
        .field(report.frob_rel_cov_dev_vs_full_sgd
                   ? format_double(*report.frob_rel_cov_dev_vs_full_sgd)
                   : std::string());
    csv.end_row();

    write_matrix_csv(ctx.out / ("cov_theoretical_" + name + ".csv"),
                     theoretical_sampling_cov(spec));
    write_matrix_csv(ctx.out / ("cov_empirical_" + name + ".csv"), report.empirical_cov);
    std::ofstream(ctx.out / ("moment_report_" + name + ".json"))
        << report_to_json(report).dump(2) << "\n";

    add_assertion(result, "mean_4se_" + name, report.max_mean_dev_in_se <= mean_limit,
                  report.max_mean_dev_in_se, mean_limit);
    add_assertion(result, "cov_dev_" + name, report.frob_rel_cov_dev < cov_limit,
                  report.frob_rel_cov_dev, cov_limit);
  }
  return result;
}

// --------------------------------------------------------- equivalence

ExperimentResult run_equivalence(ExperimentContext& ctx, const json& config) {
  const int n = config_value(config, "n", 400);
  const int b = config_value(config, "b", 3);
  const long draws = config_value<long>(config, "draws", 10000);
  if (n < 2 || b < 1 || b > n) throw ConfigError("equivalence: need 2 <= n, 1 <= b <= n");
  if (draws < 2) throw ConfigError("equivalence: need draws >= 2");

  RngStream s = ctx.stream("equivalence");
  CsvWriter csv(ctx.out / "results.csv", {"draw", "rel_dist"});
  const double scale = 1.0 / std::sqrt(static_cast<double>(b) * n);
  double sum = 0.0;
  for (long k = 0; k < draws; ++k) {
    const Eigen::VectorXd eps = s.gaussian_vector(n);
    const Eigen::VectorXd v_fisher = scale * eps;
    // V_C = V_F - mean(eps) * scale * ones; the distance is the centering term.
    const double dist = std::abs(eps.mean()) * scale * std::sqrt(static_cast<double>(n));
    const double rel = dist / v_fisher.norm();
    sum += rel;
    csv.field(k).field(rel);
    csv.end_row();
  }
  const double mean_rel = sum / static_cast<double>(draws);
  const double limit = 2.0 / std::sqrt(static_cast<double>(n));

  ExperimentResult result;
  result.details["mean_rel_dist"] = mean_rel;
  result.details["limit"] = limit;
  add_assertion(result, "fisher_cov_shared_eps", mean_rel < limit, mean_rel, limit);
  return result;
}

// ----------------------------------------------------------- train-toy

struct ToyParams {
  int seeds = 10;
  int steps = 3000;
  int eval_every = 300;
  double eta = 0.1;
  int b = 8;
  int big_batch = 80;
  int sparse_batch = 80;
  int hidden = 8;
  int train_n = 256;
  int test_n = 4000;
  double spread = 1.0;
  double init_scale = 0.5;
  std::vector<Eigen::VectorXd> centers;
};

Trajectory run_toy_method(const std::string& method, const MlpModel& model,
                          const ClassificationData& data, const Eigen::VectorXd& theta0,
                          const OptimizerConfig& ocfg, const ToyParams& params,
                          RngStream& s) {
  const int n = data.train.size();
  const EvalSpec eval{&data.test, true};
  auto msgd_spec = [&](NoiseKind kind) {
    SamplingSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.b = params.b;
    if (kind_uses_outer_batch(kind)) spec.B = params.sparse_batch;
    return spec;
  };

  if (method == "gd") {
    return run_msgd(model, data.train, eval, theta0, ocfg, std::nullopt, s);
  }
  if (method == "sgd") {
    return run_msgd(model, data.train, eval, theta0, ocfg,
                    msgd_spec(NoiseKind::SgdWithReplacement), s);
  }
  if (method == "msgd_cov") {
    return run_msgd(model, data.train, eval, theta0, ocfg,
                    msgd_spec(NoiseKind::GaussianCov), s);
  }
  if (method == "msgd_fisher") {
    return run_msgd(model, data.train, eval, theta0, ocfg,
                    msgd_spec(NoiseKind::GaussianFisher), s);
  }
  if (method == "msgd_bernoulli") {
    return run_msgd(model, data.train, eval, theta0, ocfg,
                    msgd_spec(NoiseKind::Bernoulli), s);
  }
  if (method == "msgd_sparse") {
    return run_msgd(model, data.train, eval, theta0, ocfg,
                    msgd_spec(NoiseKind::SparseGaussianFisher), s);
  }
  if (method == "gld_iso") {
    return run_gld(model, data.train, eval, theta0, ocfg, GldMode::Isotropic,
                   params.b, s);
  }
  if (method == "gld_diag") {
    return run_gld(model, data.train, eval, theta0, ocfg, GldMode::Diagonal,
                   params.b, s);
  }
  if (method == "minibatch_plain") {
    return run_minibatch_msgd(model, data.train, eval, theta0, ocfg, params.big_batch,
                              std::nullopt, 0.0, s);
  }
  if (method == "minibatch_compensated") {
    SamplingSpec inner;
    inner.kind = NoiseKind::GaussianFisher;
    inner.n = params.big_batch;
    inner.b = params.b;
    const double scale =
        minibatch_compensation_scale(n, params.b, params.big_batch, inner);
    return run_minibatch_msgd(model, data.train, eval, theta0, ocfg, params.big_batch,
                              inner, scale, s);
  }
  throw ConfigError("train-toy: unknown method '" + method + "'");
}

ExperimentResult run_train_toy(ExperimentContext& ctx, const json& config) {
  ToyParams params;
  params.seeds = config_value(config, "seeds", params.seeds);
  params.steps = config_value(config, "steps", params.steps);
  params.eval_every = config_value(config, "eval_every", params.eval_every);
  params.eta = config_value(config, "eta", params.eta);
  params.b = config_value(config, "b", params.b);
  params.big_batch = config_value(config, "big_batch", 10 * params.b);
  params.sparse_batch = config_value(config, "sparse_batch", params.big_batch);
  params.hidden = config_value(config, "hidden", params.hidden);
  params.train_n = config_value(config, "train_n", params.train_n);
  params.test_n = config_value(config, "test_n", params.test_n);
  params.spread = config_value(config, "spread", params.spread);
  params.init_scale = config_value(config, "init_scale", params.init_scale);
  if (params.seeds < 1) throw ConfigError("train-toy: seeds must be >= 1");
  if (params.big_batch > params.train_n || params.b > params.train_n) {
    throw ConfigError("train-toy: batch sizes must not exceed train_n");
  }

  auto raw_centers = config_value<std::vector<std::vector<double>>>(
      config, "centers", {{-1.5, 0.0}, {1.5, 0.0}});
  for (const auto& c : raw_centers) {
    params.centers.push_back(
        Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  }
  if (params.centers.size() < 2) throw ConfigError("train-toy: need >= 2 centers");

  const std::vector<std::string> default_methods = {
      "gd",         "sgd",          "msgd_cov",        "msgd_fisher",
      "msgd_bernoulli", "msgd_sparse", "gld_iso",        "gld_diag",
      "minibatch_plain", "minibatch_compensated"};
  const auto methods =
      config_value<std::vector<std::string>>(config, "methods", default_methods);
  if (methods.empty()) throw ConfigError("train-toy: empty method list");

  const MlpModel model(static_cast<int>(params.centers.front().size()), params.hidden,
                       MlpLoss::Logistic);
  OptimizerConfig ocfg;
  ocfg.eta = params.eta;
  ocfg.steps = params.steps;
  ocfg.eval_every = params.eval_every;

  struct Cell {
    Trajectory traj;
    double final_acc = 0.0;
  };
  std::vector<std::vector<Cell>> grid(methods.size(),
                                      std::vector<Cell>(params.seeds));

  // Labels registered up front so metadata stays deterministic.
  for (int k = 0; k < params.seeds; ++k) {
    ctx.note_label("toy/data/seed" + std::to_string(k));
    ctx.note_label("toy/init/seed" + std::to_string(k));
    for (const auto& m : methods) {
      ctx.note_label("toy/run/" + m + "/seed" + std::to_string(k));
    }
  }

  parallel_for(params.seeds, [&](int k) {
    RngStream data_stream =
        derive_stream(ctx.seed, "toy/data/seed" + std::to_string(k));
    const ClassificationData data = generate_classification_data(
        params.centers, params.spread, params.train_n, params.test_n, data_stream);
    RngStream init_stream =
        derive_stream(ctx.seed, "toy/init/seed" + std::to_string(k));
    const Eigen::VectorXd theta0 = model.init_params(init_stream, params.init_scale);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      RngStream run_stream = derive_stream(
          ctx.seed, "toy/run/" + methods[mi] + "/seed" + std::to_string(k));
      Cell& cell = grid[mi][static_cast<std::size_t>(k)];
      cell.traj = run_toy_method(methods[mi], model, data, theta0, ocfg, params,
                                 run_stream);
      cell.final_acc = cell.traj.records.back().test_acc;
    }
  });

  ExperimentResult result;
  CsvWriter csv(ctx.out / "results.csv",
                {"method", "seed", "final_test_acc", "final_test_loss",
                 "final_train_loss", "diverged"});
  std::map<std::string, double> mean_acc;
  int diverged_count = 0;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    double acc_sum = 0.0;
    for (int k = 0; k < params.seeds; ++k) {
      const Cell& cell = grid[mi][static_cast<std::size_t>(k)];
      const EvalRecord& last = cell.traj.records.back();
      csv.field(methods[mi])
          .field(k)
          .field(cell.final_acc)
          .field(last.test_loss)
          .field(last.train_loss)
          .field(static_cast<long>(cell.traj.diverged ? 1 : 0));
      csv.end_row();
      acc_sum += cell.final_acc;
      diverged_count += cell.traj.diverged ? 1 : 0;

      CsvWriter traj(ctx.out / ("traj_" + methods[mi] + "_seed" + std::to_string(k) +
                                ".csv"),
                     {"iter", "train_loss", "test_loss", "test_acc"});
      for (const EvalRecord& rec : cell.traj.records) {
        traj.field(rec.iter).field(rec.train_loss).field(rec.test_loss).field(
            rec.test_acc);
        traj.end_row();
      }
    }
    mean_acc[methods[mi]] = acc_sum / params.seeds;
  }

  for (const auto& [name, acc] : mean_acc) {
    result.details["mean_final_test_acc"][name] = acc;
  }
  add_assertion(result, "no_divergence", diverged_count == 0,
                static_cast<double>(diverged_count), 0.0);

  if (config.contains("assert_parity_pp")) {
    const double pp = config_value(config, "assert_parity_pp", 2.0) / 100.0;
    const std::vector<std::string> family = {"sgd", "msgd_cov", "msgd_fisher",
                                             "msgd_bernoulli"};
    std::vector<std::string> present;
    for (const auto& m : family) {
      if (mean_acc.count(m)) present.push_back(m);
    }
    for (std::size_t i = 0; i < present.size(); ++i) {
      for (std::size_t j = i + 1; j < present.size(); ++j) {
        const double gap = std::abs(mean_acc[present[i]] - mean_acc[present[j]]);
        add_assertion(result, "parity_" + present[i] + "_vs_" + present[j], gap <= pp,
                      gap, pp);
      }
    }
    if (mean_acc.count("minibatch_compensated") && mean_acc.count("sgd")) {
      const double gap = std::abs(mean_acc["minibatch_compensated"] - mean_acc["sgd"]);
      add_assertion(result, "parity_minibatch_compensated_vs_sgd", gap <= pp, gap, pp);
    }
  }
  if (mean_acc.count("gld_diag") && mean_acc.count("msgd_bernoulli")) {
    // Directional contrast, reported but never asserted.
    result.details["gld_diag_minus_msgd_bernoulli_pp"] =
        100.0 * (mean_acc["gld_diag"] - mean_acc["msgd_bernoulli"]);
  }
  return result;
}

// ------------------------------------------------------------ theorem1

struct CurveSpec {
  RecursionKind kind;
  int B;
  std::string label;
};

ExperimentResult run_theorem1(ExperimentContext& ctx, const json& config) {
  const int p = config_value(config, "p", 4);
  const double sigma2 = config_value(config, "sigma2", 0.01);
  const int b = config_value(config, "b", 1);
  const double eta = config_value(config, "eta", 0.01);
  const long iters = config_value<long>(config, "iters", 100000);
  const int seeds = config_value(config, "seeds", 50);
  if (p < 1 || seeds < 2 || iters < 1) {
    throw ConfigError("theorem1: need p >= 1, seeds >= 2, iters >= 1");
  }

  const RegressionProblem problem = RegressionProblem::isotropic(p, sigma2);
  const double limit = stability_limit(problem, b);
  if (!(eta > 0.0) || eta >= limit) {
    throw ConfigError(
        "theorem1: step size violates the stability condition eta < "
        "2b/(R^2+(b-1)lambda) = " +
        format_double(limit));
  }

  Eigen::VectorXd theta0 = problem.theta_star();
  if (config.contains("theta0_offset")) {
    const auto& off = config.at("theta0_offset");
    if (off.is_number()) {
      theta0.array() += off.get<double>() / std::sqrt(static_cast<double>(p));
    } else {
      const auto vec = off.get<std::vector<double>>();
      if (static_cast<int>(vec.size()) != p) {
        throw ConfigError("theorem1: theta0_offset length must equal p");
      }
      theta0 += Eigen::Map<const Eigen::VectorXd>(vec.data(), p);
    }
  }

  std::vector<long> log_points = config_value<std::vector<long>>(
      config, "log_points", {10, 100, 1000, 3162, 10000, 31623, 100000});
  std::erase_if(log_points, [&](long n) { return n > iters || n < 1; });
  if (log_points.empty()) throw ConfigError("theorem1: no usable log points");

  std::vector<CurveSpec> curves;
  if (config.contains("curves")) {
    for (const auto& c : config.at("curves")) {
      CurveSpec spec;
      try {
        spec.kind = recursion_kind_from_string(c.at("kind").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("theorem1: bad curve entry: ") + e.what());
      }
      spec.B = (spec.kind == RecursionKind::SmallBatchSgd) ? b
                                                           : c.value("B", 4 * b);
      curves.push_back(spec);
    }
  } else {
    curves.push_back({RecursionKind::SmallBatchSgd, b, ""});
    for (int B : {4, 16, 64}) curves.push_back({RecursionKind::TheoremSubsample, B, ""});
    curves.push_back({RecursionKind::TheoremGaussian, 16, ""});
  }
  for (auto& c : curves) {
    if (c.kind != RecursionKind::SmallBatchSgd && c.B < b) {
      throw ConfigError("theorem1: curve needs B >= b");
    }
    c.label = std::string(to_string(c.kind)) +
              (c.kind == RecursionKind::SmallBatchSgd ? "" : "_B" + std::to_string(c.B));
  }

  // risks[curve][seed][log point]
  std::vector<std::vector<std::vector<double>>> risks(
      curves.size(), std::vector<std::vector<double>>(seeds));
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    for (int k = 0; k < seeds; ++k) {
      ctx.note_label("theorem1/" + curves[ci].label + "/seed" + std::to_string(k));
    }
    parallel_for(seeds, [&, ci](int k) {
      RngStream s = derive_stream(
          ctx.seed, "theorem1/" + curves[ci].label + "/seed" + std::to_string(k));
      const AveragedRun run =
          run_online_recursion(problem, curves[ci].B, b, eta, iters, curves[ci].kind,
                               log_points, theta0, s);
      std::vector<double>& out = risks[ci][static_cast<std::size_t>(k)];
      out.reserve(run.risk_curve.size());
      for (const auto& [n, risk] : run.risk_curve) out.push_back(risk);
    });
  }

  CsvWriter csv(ctx.out / "results.csv",
                {"n", "kind", "B", "b", "eta", "seed", "excess_risk"});
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    for (int k = 0; k < seeds; ++k) {
      for (std::size_t li = 0; li < log_points.size(); ++li) {
        csv.field(log_points[li])
            .field(std::string(to_string(curves[ci].kind)))
            .field(curves[ci].B)
            .field(b)
            .field(eta)
            .field(k)
            .field(risks[ci][static_cast<std::size_t>(k)][li]);
        csv.end_row();
      }
    }
  }

  const BoundConstants constants = theorem1_constants(problem, b, eta, theta0);
  {
    CsvWriter bound_csv(ctx.out / "bound.csv", {"n", "bound"});
    for (long n : log_points) {
      bound_csv.field(n).field(theorem1_bound(problem, b, eta, theta0, n));
      bound_csv.end_row();
    }
  }

  ExperimentResult result;
  result.details["r_squared"] = problem.r_squared();
  result.details["lambda"] = problem.lambda();
  result.details["trace_sigma"] = problem.trace_sigma();
  result.details["lambda_min"] = problem.lambda_min();
  result.details["stability_limit"] = limit;
  result.details["bound_c1"] = constants.c1;
  result.details["bound_c2"] = constants.c2;

  const bool assert_bound = config_value(config, "assert_bound", true);
  const bool assert_rate = config_value(config, "assert_rate", true);
  const bool assert_equiv = config_value(config, "assert_equivalence", true);
  const double bound_slack = config_value(config, "bound_slack", 1.05);
  const double rate_tol = config_value(config, "rate_tol", 0.15);
  const long rate_min_n = config_value<long>(config, "rate_fit_min_n", 1000);

  CsvWriter summary(ctx.out / "summary.csv",
                    {"kind", "B", "n", "mean_excess", "se", "ci95_half", "bound"});
  // mean and CI per (curve, log point)
  std::vector<std::vector<std::pair<double, double>>> stats_by_curve(curves.size());
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    for (std::size_t li = 0; li < log_points.size(); ++li) {
      std::vector<double> vals(seeds);
      for (int k = 0; k < seeds; ++k) {
        vals[static_cast<std::size_t>(k)] = risks[ci][static_cast<std::size_t>(k)][li];
      }
      const auto [mean, ci95] = mean_ci(vals, 0.95);
      const double se = ci95 / normal_two_sided_quantile(0.95);
      stats_by_curve[ci].emplace_back(mean, se);
      summary.field(std::string(to_string(curves[ci].kind)))
          .field(curves[ci].B)
          .field(log_points[li])
          .field(mean)
          .field(se)
          .field(ci95)
          .field(theorem1_bound(problem, b, eta, theta0, log_points[li]));
      summary.end_row();
    }
  }

  if (assert_bound) {
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
      double worst = 0.0;
      for (std::size_t li = 0; li < log_points.size(); ++li) {
        const auto [mean, se] = stats_by_curve[ci][li];
        const double bound = theorem1_bound(problem, b, eta, theta0, log_points[li]);
        worst = std::max(worst, (mean + 2.0 * se) / (bound_slack * bound));
      }
      add_assertion(result, "bound_validity_" + curves[ci].label, worst <= 1.0, worst,
                    1.0);
    }
  }
  if (assert_rate && sigma2 > 0.0) {
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t li = 0; li < log_points.size(); ++li) {
        if (log_points[li] >= rate_min_n) {
          pts.emplace_back(static_cast<double>(log_points[li]),
                           stats_by_curve[ci][li].first);
        }
      }
      if (pts.size() >= 3) {
        const FitResult fit = loglog_slope(pts);
        result.details["rate_slope"][curves[ci].label] = fit.slope;
        add_assertion(result, "rate_slope_" + curves[ci].label,
                      std::abs(fit.slope + 1.0) <= rate_tol, fit.slope, rate_tol);
      }
    }
  }
  if (assert_equiv && curves.size() >= 2) {
    const auto check_points =
        config_value<std::vector<long>>(config, "equivalence_points", {1000, 10000});
    int failing_pairs = 0;
    int checked = 0;
    for (long n : check_points) {
      const auto it = std::find(log_points.begin(), log_points.end(), n);
      if (it == log_points.end()) continue;
      const auto li = static_cast<std::size_t>(it - log_points.begin());
      const double z = normal_two_sided_quantile(0.95);
      for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        for (std::size_t cj = ci + 1; cj < curves.size(); ++cj) {
          const auto [m1, se1] = stats_by_curve[ci][li];
          const auto [m2, se2] = stats_by_curve[cj][li];
          ++checked;
          if (!intervals_overlap(m1, z * se1, m2, z * se2)) ++failing_pairs;
        }
      }
    }
    result.details["equivalence_pairs_checked"] = checked;
    add_assertion(result, "class_equivalence_ci_overlap", failing_pairs == 0,
                  static_cast<double>(failing_pairs), 0.0);
  }
  return result;
}

// ----------------------------------------------------------- sde-order

ExperimentResult run_sde_order(ExperimentContext& ctx, const json& config) {
  const int d = config_value(config, "d", 2);
  const int n_samples = config_value(config, "N", 10);
  const double ridge = config_value(config, "ridge", 0.1);
  const double data_sigma2 = config_value(config, "data_sigma2", 0.25);
  const double horizon = config_value(config, "T", 1.0);
  const int m = config_value(config, "m", 64);
  const int trials = config_value(config, "trials", 200);
  const int b = config_value(config, "b", 1);
  const auto etas = config_value<std::vector<double>>(config, "etas",
                                                      {0.04, 0.02, 0.01, 0.005});
  const double slope_tol = config_value(config, "slope_tol", 0.3);
  if (d < 1 || n_samples < 1 || m < 1 || trials < 2 || b < 1) {
    throw ConfigError("sde-order: bad dimensions");
  }
  if (etas.size() < 3) throw ConfigError("sde-order: need >= 3 step sizes");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0) || (i > 0 && etas[i] >= etas[i - 1])) {
      throw ConfigError("sde-order: etas must be positive and strictly decreasing");
    }
    const double steps = horizon / etas[i];
    if (std::abs(steps - std::llround(steps)) > 1e-9 * steps) {
      throw ConfigError("sde-order: every eta must divide the horizon T");
    }
  }

  const LinearRegressionModel model(d, ridge);
  const RegressionProblem problem = RegressionProblem::isotropic(d, data_sigma2);
  RngStream data_stream = ctx.stream("sde/data");
  const Dataset data = generate_regression_data(problem, n_samples, data_stream);
  const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(d);

  for (std::size_t i = 0; i < etas.size(); ++i) {
    for (int t = 0; t < trials; ++t) {
      ctx.note_label("sde/eta" + std::to_string(i) + "/trial" + std::to_string(t));
    }
  }
  const StrongErrorCurve curve = strong_error_curve(model, data, theta0, etas, m,
                                                    horizon, b, trials, ctx.seed, "sde");

  CsvWriter csv(ctx.out / "results.csv", {"eta", "trial", "max_sq_error"});
  for (const StrongErrorPoint& point : curve.points) {
    for (int t = 0; t < point.trials; ++t) {
      csv.field(point.eta).field(t).field(point.per_trial[static_cast<std::size_t>(t)]);
      csv.end_row();
    }
  }
  CsvWriter summary(ctx.out / "summary.csv",
                    {"eta", "mean_max_sq_error", "ci95_half", "trials"});
  for (const StrongErrorPoint& point : curve.points) {
    summary.field(point.eta)
        .field(point.mean_max_sq_error)
        .field(point.ci_half)
        .field(point.trials);
    summary.end_row();
  }
  CsvWriter fit_csv(ctx.out / "fit.csv",
                    {"slope", "intercept", "slope_stderr", "r_squared"});
  fit_csv.field(curve.fit.slope)
      .field(curve.fit.intercept)
      .field(curve.fit.slope_stderr)
      .field(curve.fit.r_squared);
  fit_csv.end_row();

  ExperimentResult result;
  result.details["slope"] = curve.fit.slope;
  result.details["r_squared"] = curve.fit.r_squared;
  add_assertion(result, "order_slope", std::abs(curve.fit.slope - 2.0) <= slope_tol,
                curve.fit.slope, slope_tol);
  return result;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& experiment_catalog() {
  static const std::vector<std::pair<std::string, std::string>> catalog = {
      {"moments",
       "Monte Carlo moments of every sampling-noise kind against the closed forms"},
      {"equivalence",
       "shared-noise distance between the Fisher and covariance Gaussian noises"},
      {"train-toy",
       "MSGD variants, GLD baselines and compensated mini-batch MSGD on Gaussian blobs"},
      {"theorem1",
       "averaged online least squares: bound validity, rate and noise-class equivalence"},
      {"sde-order",
       "strong-error order of Gaussian MSGD against its coupled SDE discretization"},
  };
  return catalog;
}

ExperimentResult run_experiment(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (!config.contains("experiment") || !config.at("experiment").is_string()) {
    throw ConfigError("config needs a string 'experiment' field");
  }
  const std::string name = config.at("experiment").get<std::string>();
  if (!config.contains("seed") || !config.at("seed").is_number_unsigned()) {
    throw ConfigError("config needs an unsigned integer 'seed'");
  }
  if (!config.contains("output_dir") || !config.at("output_dir").is_string()) {
    throw ConfigError("config needs a string 'output_dir'");
  }

  ExperimentContext ctx;
  ctx.seed = config.at("seed").get<std::uint64_t>();
  ctx.out = fs::path(config.at("output_dir").get<std::string>());
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + ctx.out.string());

  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  if (name == "moments") {
    result = run_moments(ctx, config);
  } else if (name == "equivalence") {
    result = run_equivalence(ctx, config);
  } else if (name == "train-toy") {
    result = run_train_toy(ctx, config);
  } else if (name == "theorem1") {
    result = run_theorem1(ctx, config);
  } else if (name == "sde-order") {
    result = run_sde_order(ctx, config);
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json meta;
  meta["experiment"] = name;
  meta["root_seed"] = ctx.seed;
  meta["generator"] = kGeneratorName;
  meta["stream_labels"] = ctx.labels;
  meta["config"] = config;
  meta["wall_time_seconds"] = result.wall_time_seconds;
  json asserts = json::array();
  for (const AssertionRecord& a : result.assertions) {
    asserts.push_back({{"name", a.name},
                       {"passed", a.passed},
                       {"observed", a.observed},
                       {"limit", a.limit}});
  }
  meta["assertions"] = asserts;
  meta["passed"] = result.passed;
  meta["details"] = result.details;
  std::ofstream(ctx.out / "metadata.json") << meta.dump(2) << "\n";
  return result;
}

}  // namespace msgd

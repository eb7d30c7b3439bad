// Command-line front end: training, evaluation, synthetic data generation,
// and the desk-scale experiment harness.
//
// Exit codes: 0 success, 1 data/runtime error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <dropreg/dropreg.hpp>

namespace {

using namespace dropreg;

struct CommonArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path);
}

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes a report to --out (or stdout when --out is empty) in --format.
void emit_report(const CommonArgs& common, const nlohmann::json& j, const std::string& csv) {
  std::string text = common.format == "csv" ? csv : j.dump(2) + "\n";
  if (common.out.empty())
    std::fwrite(text.data(), 1, text.size(), stdout);
  else
    write_text(common.out, text);
}

/// Wall-clock goes to stderr only so report files stay byte-reproducible.
struct StderrTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  ~StderrTimer() {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "runtime_seconds %.3f\n", s);
  }
};

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data_path;
  std::string unlabeled_path;
  std::string family = "logistic";
  std::string penalty = "none";
  std::string estimator = "quad";
  double lambda = 1.0;
  double delta = 0.5;
  double sigma2 = 1.0;
  double alpha = 0.4;
  bool alpha_set = false;
  std::uint64_t mc_samples = 100;
  bool normalize = false;
};

int cmd_train(const CommonArgs& common, const TrainArgs& a) {
  Family f = family_from_name(a.family);
  Dataset data = read_sparse_dataset(a.data_path);
  check_labels(f, data);

  GlmModel model;
  model.family = f;
  Dataset train = data;

  bool noised = a.penalty == "dropout" || a.penalty == "additive";
  NoiseModel noise = a.penalty == "additive" ? NoiseModel::additive(a.sigma2)
                                             : NoiseModel::dropout(a.delta);

  std::string penalty_name;
  FitReport fit;
  if (!a.unlabeled_path.empty()) {
    if (!noised)
      throw std::runtime_error("semi-supervised training needs --penalty dropout or additive");
    Dataset raw = read_sparse_dataset(a.unlabeled_path);
    if (raw.dim > train.dim)
      throw std::runtime_error("unlabeled dimension " + std::to_string(raw.dim) +
                               " exceeds labeled dimension " + std::to_string(train.dim));
    UnlabeledSet unlabeled;
    unlabeled.dim = train.dim;
    unlabeled.rows = std::move(raw.rows);
    if (a.normalize) {
      // Scaling factors come from the union of both parts so the penalty
      // stays comparable across them.
      Dataset joint;
      joint.dim = train.dim;
      joint.rows = train.rows;
      joint.rows.insert(joint.rows.end(), unlabeled.rows.begin(), unlabeled.rows.end());
      joint.labels.assign(joint.rows.size(), 0.0);
      auto [unused, report] = normalize_columns(joint, ScalingMode::unit_second_moment);
      (void)unused;
      model.scaling = report.factors;
      ScalingReport scaling;
      scaling.factors = model.scaling;
      train = apply_scaling(train, scaling);
      Dataset wrapped;
      wrapped.dim = unlabeled.dim;
      wrapped.rows = std::move(unlabeled.rows);
      wrapped.labels.assign(wrapped.rows.size(), 0.0);
      unlabeled.rows = apply_scaling(wrapped, scaling).rows;
    }
    fit = fit_semisup(f, train, unlabeled, noise, DiscountAlpha::of(a.alpha));
    penalty_name = "semisup-quad";
  } else {
    if (a.normalize) {
      auto [scaled, report] = normalize_columns(data, ScalingMode::unit_second_moment);
      train = std::move(scaled);
      model.scaling = report.factors;
    }
    PenaltyMode mode;
    if (a.penalty == "none") {
      mode = PenaltyMode::none();
      penalty_name = "none";
    } else if (a.penalty == "l2") {
      mode = PenaltyMode::l2(a.lambda);
      penalty_name = "l2";
    } else if (a.estimator == "mc") {
      mode = PenaltyMode::mc_noising(noise, a.mc_samples, common.seed);
      penalty_name = a.penalty + "-mc";
    } else {
      mode = PenaltyMode::quad_noising(noise);
      penalty_name = a.penalty + "-quad";
    }
    fit = fit_glm(f, train, mode);
  }

  model.noised = noised;
  if (noised) model.noise = noise;
  model.beta = fit.beta;
  std::string model_path = common.out.empty() ? "model.json" : common.out;
  save_model(model, model_path);

  std::printf("penalty %s\n", penalty_name.c_str());
  std::printf("objective %s\n", num17(fit.objective).c_str());
  std::printf("gradient_norm %s\n", num17(fit.gradient_norm).c_str());
  std::printf("converged %s\n", fit.converged ? "true" : "false");
  std::printf("iterations %zu\n", static_cast<std::size_t>(fit.iterations));
  std::printf("model %s\n", model_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model_path;
  std::string data_path;
  std::string mask_path;
};

std::vector<bool> read_mask(const std::string& path, std::size_t rows) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<bool> mask;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == "0")
      mask.push_back(false);
    else if (line == "1")
      mask.push_back(true);
    else
      throw std::runtime_error(path + ": mask entries must be 0 or 1, got '" + line + "'");
  }
  if (mask.size() != rows)
    throw std::runtime_error(path + ": mask has " + std::to_string(mask.size()) +
                             " entries for " + std::to_string(rows) + " rows");
  return mask;
}

int cmd_eval(const CommonArgs& common, const EvalArgs& a) {
  GlmModel model = load_model(a.model_path);
  Dataset data = read_sparse_dataset(a.data_path);
  if (data.dim > model.dim())
    throw std::runtime_error("dimension mismatch: model has " + std::to_string(model.dim()) +
                             " features, data has " + std::to_string(data.dim));
  data.dim = model.dim();
  check_labels(model.family, data);
  if (!model.scaling.empty()) {
    ScalingReport scaling;
    scaling.factors = model.scaling;
    data = apply_scaling(data, scaling);
  }
  std::vector<bool> mask(data.n(), true);
  if (!a.mask_path.empty()) mask = read_mask(a.mask_path, data.n());

  std::size_t rows = 0, correct = 0;
  double loss_sum = 0.0, sq_err_sum = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (!mask[i]) continue;
    ++rows;
    loss_sum += example_loss(model.family, data.rows[i], data.labels[i], model.beta);
    double mu = predict_mean(model.family, data.rows[i], model.beta);
    if (model.family == Family::logistic && (mu >= 0.5 ? 1.0 : 0.0) == data.labels[i]) ++correct;
    if (model.family == Family::linear) {
      double e = mu - data.labels[i];
      sq_err_sum += e * e;
    }
  }
  if (rows == 0) throw std::runtime_error("no rows selected for evaluation");

  nlohmann::json metrics = {{"rows", rows}, {"mean_loss", loss_sum / static_cast<double>(rows)}};
  std::string csv = "metric,value\nrows," + std::to_string(rows) + "\nmean_loss," +
                    num17(loss_sum / static_cast<double>(rows)) + "\n";
  if (model.family == Family::logistic) {
    double acc = static_cast<double>(correct) / static_cast<double>(rows);
    metrics["accuracy"] = acc;
    csv += "accuracy," + num17(acc) + "\n";
  }
  if (model.family == Family::linear) {
    double mse = sq_err_sum / static_cast<double>(rows);
    metrics["mse"] = mse;
    csv += "mse," + num17(mse) + "\n";
  }
  nlohmann::json j = {{"name", "eval"},
                      {"parameters",
                       {{"model", a.model_path}, {"data", a.data_path}, {"mask", a.mask_path}}},
                      {"metrics", metrics}};
  emit_report(common, j, csv);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::uint64_t n = 75;
  std::string mask_out;
  std::string beta_out;
};

int cmd_simulate(const CommonArgs& common, const SimulateArgs& a) {
  if (common.out.empty()) throw std::runtime_error("simulate needs --out for the dataset path");
  SimConfig config;
  config.n = a.n;
  config.seed = common.seed;
  SimDataset sim = generate_rare_feature_dataset(config);
  write_sparse_dataset(sim.data, common.out);
  if (!a.mask_out.empty()) {
    std::string text;
    for (bool s : sim.signal_mask) text += s ? "1\n" : "0\n";
    write_text(a.mask_out, text);
  }
  if (!a.beta_out.empty()) {
    std::string text;
    for (double b : sim.beta_true) text += num17(b) + "\n";
    write_text(a.beta_out, text);
  }
  std::size_t signal_rows = 0;
  for (bool s : sim.signal_mask) signal_rows += s ? 1 : 0;
  std::printf("rows %zu\n", sim.data.n());
  std::printf("dim %u\n", sim.data.dim);
  std::printf("signal_rows %zu\n", signal_rows);
  std::printf("data %s\n", common.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// experiment harness commands

int cmd_table3(const CommonArgs& common, const Table3Options& options) {
  StderrTimer timer;
  Table3Report report = run_table3(options);
  emit_report(common, table3_json(report), table3_csv(report));
  return 0;
}

int cmd_trace(const CommonArgs& common, const TraceOptions& options) {
  StderrTimer timer;
  TraceReport report = run_penalty_trace(options);
  emit_report(common, trace_json(report), trace_csv(report));
  return 0;
}

int cmd_fisher(const CommonArgs& common, const FisherOptions& options) {
  StderrTimer timer;
  FisherReport report = run_fisher_compare(options);
  emit_report(common, fisher_json(report), fisher_csv(report));
  return 0;
}

int cmd_fig1a(const CommonArgs& common, const Fig1aOptions& options) {
  StderrTimer timer;
  Fig1aReport report = run_fig1a(options);
  emit_report(common, fig1a_json(report), fig1a_csv(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-noising regularization for generalized linear models"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--seed", common.seed, "Root seed for all randomized work");
  app.add_option("--out", common.out, "Output path (model, dataset, or report)");
  app.add_option("--format", common.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Fit a model and save it");
  train->fallthrough();
  train->add_option("--data", train_args.data_path, "Training data path")->required();
  train->add_option("--family", train_args.family, "Model family")
      ->check(CLI::IsMember({"linear", "logistic", "poisson"}));
  train->add_option("--penalty", train_args.penalty, "Penalty kind")
      ->check(CLI::IsMember({"none", "l2", "dropout", "additive"}));
  train->add_option("--estimator", train_args.estimator,
                    "Noising penalty estimator: quadratic surrogate or Monte Carlo")
      ->check(CLI::IsMember({"quad", "mc"}));
  train->add_option("--lambda", train_args.lambda, "L2 strength");
  train->add_option("--delta", train_args.delta, "Dropout probability");
  train->add_option("--sigma2", train_args.sigma2, "Additive noise variance");
  train->add_option("--mc-samples", train_args.mc_samples, "Monte Carlo sample count");
  train->add_option("--unlabeled", train_args.unlabeled_path,
                    "Unlabeled data path (engages the semi-supervised penalty)");
  train->add_option("--alpha", train_args.alpha, "Unlabeled discount factor");
  train->add_flag("--normalize", train_args.normalize,
                  "Scale columns to unit second moment before fitting");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
  eval->fallthrough();
  eval->add_option("--model", eval_args.model_path, "Model path")->required();
  eval->add_option("--data", eval_args.data_path, "Evaluation data path")->required();
  eval->add_option("--mask", eval_args.mask_path, "0/1 file restricting rows scored");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a rare-feature dataset");
  simulate->fallthrough();
  simulate->add_option("--n", sim_args.n, "Number of rows")->required();
  simulate->add_option("--mask-out", sim_args.mask_out, "Write the per-row signal mask here");
  simulate->add_option("--beta-out", sim_args.beta_out, "Write the true coefficients here");

  Table3Options t3;
  CLI::App* table3 = app.add_subcommand("table3", "Dropout vs L2 on the rare-feature task");
  table3->fallthrough();
  table3->add_option("--runs", t3.runs, "Number of repetitions");
  table3->add_option("--train-n", t3.train_n, "Training rows per run");
  table3->add_option("--test-n", t3.test_n, "Test rows per run");
  table3->add_option("--delta", t3.delta, "Dropout probability");
  table3->add_option("--lambda", t3.lambda, "Ridge strength for the L2 arm");

  TraceOptions tr;
  CLI::App* trace = app.add_subcommand("trace", "Penalty vs surrogate along a fit");
  trace->fallthrough();
  trace->add_option("--n", tr.n, "Training rows");
  trace->add_option("--dim", tr.dim, "Feature count");
  trace->add_option("--delta", tr.delta, "Dropout probability");
  trace->add_option("--mc-samples", tr.mc_samples, "Monte Carlo samples per step");

  FisherOptions fi;
  CLI::App* fisher = app.add_subcommand("fisher", "AdaGrad vs dropout-descent diagonals");
  fisher->fallthrough();
  fisher->add_option("--n", fi.n, "Stream length");
  fisher->add_option("--dim", fi.dim, "Feature count");
  fisher->add_option("--active-dims", fi.active_dims, "Coordinates with nonzero truth");
  fisher->add_option("--eta", fi.eta, "Learning rate");
  fisher->add_option("--epsilon", fi.epsilon, "Update damping floor");

  Fig1aOptions f1;
  CLI::App* fig1a = app.add_subcommand("fig1a", "Exact vs quadratic logistic penalty grid");
  fig1a->fallthrough();
  fig1a->add_option("--p", f1.p_grid, "Prediction probabilities to tabulate");
  fig1a->add_option("--sigma2", f1.sigma2_grid, "Noise variances to tabulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(common, train_args);
    if (*eval) return cmd_eval(common, eval_args);
    if (*simulate) return cmd_simulate(common, sim_args);
    if (*table3) {
      t3.seed = common.seed;
      return cmd_table3(common, t3);
    }
    if (*trace) {
      tr.seed = common.seed;
      return cmd_trace(common, tr);
    }
    if (*fisher) {
      fi.seed = common.seed;
      return cmd_fisher(common, fi);
    }
    if (*fig1a) return cmd_fig1a(common, f1);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

// Command-line interface for training, scoring, evaluating, sweeping, and
// inspecting sparse additive classifiers.
//
// Exit codes: 0 success, 2 usage or data problems, 3 solver divergence,
// 1 internal faults. Errors are a single stderr line:
//   csam: error: <kind>: <message>
// Every command writes a machine-readable JSON report. Reports, models,
// traces, and predictions are byte-identical across runs with the same
// flags and seed; wall-clock timings appear on stdout only.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "csam/data.hpp"
#include "csam/format.hpp"
#include "csam/metrics.hpp"
#include "csam/model.hpp"
#include "csam/optimizer.hpp"

using json = nlohmann::json;
using namespace csam;

namespace {

// ---------------------------------------------------------------------------
// Flag bundles shared by the subcommands.

struct DataFlags {
  std::string data;
  std::string label_column = "label";
  std::string encoding = "01";
  std::string id_column;

  CsvOptions csv_options() const {
    CsvOptions options;
    options.label_column = label_column;
    options.encoding = encoding == "pm1" ? LabelEncoding::plus_minus_one
                                         : LabelEncoding::zero_one;
    options.id_column = id_column;
    return options;
  }
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool with_encoding = true) {
  cmd->add_option("--data", f.data, "Input delimited text file (CSV or TSV)")
      ->required();
  cmd->add_option("--label-column", f.label_column, "Name of the label column")
      ->capture_default_str();
  if (with_encoding)
    cmd->add_option("--label-encoding", f.encoding,
                    "Label encoding: 01 (0/1) or pm1 (-1/+1)")
        ->check(CLI::IsMember({"01", "pm1"}))
        ->capture_default_str();
  cmd->add_option("--id-column", f.id_column,
                  "Column holding row identifiers (default: row numbers)");
}

struct ModelFlags {
  std::string basis = "bspline";
  Index basis_dim = 8;
  Index spline_order = 4;
  double lambda = 5e-4;
  double sigma = 1.0;
  int q = 2;
  double eta = 0.1;
  double epsilon = 1e-4;
  int outer_max_iter = 50;
  int inner_max_iter = 200;
  std::uint64_t seed = 0;
  bool warm_start = false;
  std::vector<double> weights;

  BasisConfig basis_config() const {
    BasisConfig basis_cfg;
    basis_cfg.family =
        basis == "trig" ? BasisFamily::trig : BasisFamily::bspline;
    basis_cfg.dimension = basis_dim;
    basis_cfg.spline_order = spline_order;
    return basis_cfg;
  }

  SolverConfig solver_config() const {
    SolverConfig config;
    config.lambda = lambda;
    config.sigma = sigma;
    config.q = penalty_norm_from_int(q);
    config.eta = eta;
    config.epsilon = epsilon;
    config.outer_max_iter = outer_max_iter;
    config.inner_max_iter = inner_max_iter;
    config.seed = seed;
    config.warm_start = warm_start;
    if (!weights.empty())
      config.feature_weights = Eigen::Map<const Vector>(
          weights.data(), static_cast<Index>(weights.size()));
    return config;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_lambda_sigma) {
  cmd->add_option("--basis", f.basis, "Basis family per feature")
      ->check(CLI::IsMember({"bspline", "trig"}))
      ->capture_default_str();
  cmd->add_option("--basis-dim", f.basis_dim, "Basis functions per feature")
      ->capture_default_str();
  cmd->add_option("--spline-order", f.spline_order,
                  "B-spline order (4 = cubic); ignored for trig")
      ->capture_default_str();
  if (with_lambda_sigma) {
    cmd->add_option("--lambda", f.lambda, "Sparsity penalty weight")
        ->capture_default_str();
    cmd->add_option("--sigma", f.sigma, "Loss scale")->capture_default_str();
  }
  cmd->add_option("--q", f.q, "Block norm of the penalty: 1 or 2")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--eta", f.eta, "Inner solver augmented penalty")
      ->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Stopping tolerance")
      ->capture_default_str();
  cmd->add_option("--outer-max-iter", f.outer_max_iter,
                  "Maximum outer passes")
      ->capture_default_str();
  cmd->add_option("--inner-max-iter", f.inner_max_iter,
                  "Maximum inner iterations per pass")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Coefficient initialization seed")
      ->capture_default_str();
  cmd->add_flag("--warm-start", f.warm_start,
                "Reuse inner solver state across outer passes");
  cmd->add_option("--weights", f.weights,
                  "Comma-separated per-feature penalty weights")
      ->delimiter(',');
}

json model_flags_json(const ModelFlags& f, bool with_lambda_sigma) {
  json j;
  j["basis"] = f.basis;
  j["basis_dim"] = f.basis_dim;
  j["spline_order"] = f.spline_order;
  if (with_lambda_sigma) {
    j["lambda"] = f.lambda;
    j["sigma"] = f.sigma;
  }
  j["q"] = f.q;
  j["eta"] = f.eta;
  j["epsilon"] = f.epsilon;
  j["outer_max_iter"] = f.outer_max_iter;
  j["inner_max_iter"] = f.inner_max_iter;
  j["seed"] = f.seed;
  j["warm_start"] = f.warm_start;
  j["feature_weights"] = f.weights;
  return j;
}

json data_flags_json(const DataFlags& f) {
  json j;
  j["data"] = f.data;
  j["label_column"] = f.label_column;
  j["label_encoding"] = f.encoding;
  j["id_column"] = f.id_column;
  return j;
}

// ---------------------------------------------------------------------------
// Output writers.

void write_report_file(const std::string& path, const json& report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << report.dump(2) << '\n';
  if (!os) throw IoError("failed while writing " + path);
}

void write_trace_file(const std::string& path, const SolverTrace& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "iteration\tobjective\tpenalized_risk\tinner_iterations\t"
        "primal_residual_inf\tdelta_coef_inf\tinner_converged\n";
  for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
    const OuterIteration& row = trace.iterations[t];
    os << t + 1 << '\t' << format_double(row.objective) << '\t'
       << format_double(row.penalized_risk) << '\t' << row.inner_iterations
       << '\t' << format_double(row.primal_inf) << '\t'
       << format_double(row.dcoef_inf) << '\t'
       << (row.inner_converged ? 1 : 0) << '\n';
  }
  if (!os) throw IoError("failed while writing " + path);
}

void report_load(json& report, const char* key, const std::string& path,
                 const LoadReport& lr) {
  report["inputs"][key] = path;
  report["inputs"][std::string(key) + "_rows_read"] = lr.rows_read;
  report["inputs"][std::string(key) + "_rows_kept"] = lr.rows_kept;
  report["inputs"][std::string(key) + "_rows_rejected"] = lr.rejections.size();
}

void warn_rejections(const LoadReport& lr) {
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < lr.rejections.size() && i < kShown; ++i) {
    const RowRejection& r = lr.rejections[i];
    std::cerr << "csam: warning: skipped data row " << r.row;
    if (!r.column.empty()) std::cerr << " (column '" << r.column << "')";
    std::cerr << ": " << r.reason << " [value '" << r.value << "']\n";
  }
  if (lr.rejections.size() > kShown)
    std::cerr << "csam: warning: " << lr.rejections.size() - kShown
              << " further rows were skipped\n";
}

Vector score_labels(const Vector& scores) {
  Vector labels(scores.size());
  for (Index i = 0; i < scores.size(); ++i)
    labels[i] = scores[i] >= 0.0 ? 1.0 : -1.0;
  return labels;
}

double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// ---------------------------------------------------------------------------
// Failure mapping: one stderr line, a best-effort error report, and a
// process exit code.

struct Failure {
  int exit_code;
  const char* kind;
};

Failure classify(const std::exception& e) {
  if (dynamic_cast<const SolverError*>(&e)) return {3, "solver"};
  if (dynamic_cast<const ConfigError*>(&e)) return {2, "usage"};
  if (dynamic_cast<const Error*>(&e)) return {2, "data"};
  return {1, "internal"};
}

int run_command(const std::string& name, const std::string& report_path,
                json report, const std::function<void(json&)>& body) {
  report["command"] = name;
  report["outputs"]["report"] = report_path;
  try {
    body(report);
    report["status"] = "ok";
    report["exit_status"] = 0;
    write_report_file(report_path, report);
    return 0;
  } catch (const std::exception& e) {
    const Failure failure = classify(e);
    std::cerr << "csam: error: " << failure.kind << ": " << e.what() << '\n';
    report["status"] = "error";
    report["error"]["kind"] = failure.kind;
    report["error"]["message"] = e.what();
    report["exit_status"] = failure.exit_code;
    try {
      write_report_file(report_path, report);
    } catch (...) {
      // The report is diagnostic; the stderr line above already tells the
      // story when even that write fails.
    }
    return failure.exit_code;
  }
}

std::string default_path(const std::string& explicit_path,
                         const std::string& base, const char* suffix) {
  return explicit_path.empty() ? base + suffix : explicit_path;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  DataFlags data;
  ModelFlags model;
  std::string model_out;
  std::string trace_out;
  std::string report;
};

int run_train(const TrainArgs& args) {
  const std::string trace_path =
      default_path(args.trace_out, args.model_out, ".trace.tsv");
  const std::string report_path =
      default_path(args.report, args.model_out, ".report.json");

  json report;
  report["config"] = model_flags_json(args.model, true);
  report["config"].update(data_flags_json(args.data));

  return run_command("train", report_path, std::move(report), [&](json& rep) {
    LoadReport lr;
    const Dataset data = load_csv(args.data.data, args.data.csv_options(), &lr);
    warn_rejections(lr);
    report_load(rep, "data", args.data.data, lr);

    const auto start = std::chrono::steady_clock::now();
    SolverTrace trace;
    const TrainedModel model = TrainedModel::train(
        data.features, args.model.basis_config(), args.model.solver_config(),
        &trace);
    const double elapsed = seconds_since(start);
    for (const std::string& w : trace.warnings)
      std::cerr << "csam: warning: " << w << '\n';

    model.save(args.model_out);
    write_trace_file(trace_path, trace);

    const double train_accuracy =
        accuracy(score_labels(model.scores(data.features.values)),
                 data.features.labels);

    rep["outputs"]["model"] = args.model_out;
    rep["outputs"]["trace"] = trace_path;
    rep["outputs"]["converged"] = trace.converged;
    rep["outputs"]["outer_iterations"] = trace.iterations.size();
    rep["outputs"]["warnings"] = trace.warnings;
    rep["metrics"]["train_accuracy"] = train_accuracy;

    std::cout << "trained on " << data.features.n() << " rows x "
              << data.features.p() << " features in "
              << trace.iterations.size() << " outer passes ("
              << (trace.converged ? "converged" : "budget exhausted")
              << ") [" << format_double(elapsed) << " s]\n"
              << "train accuracy: " << format_double(train_accuracy) << '\n'
              << "model: " << args.model_out << "\ntrace: " << trace_path
              << "\nreport: " << report_path << '\n';
  });
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  DataFlags data;
  std::string out;
  std::string report;
};

int run_predict(const PredictArgs& args) {
  const std::string report_path =
      default_path(args.report, args.out, ".report.json");

  json report;
  report["config"]["model"] = args.model;
  report["config"].update(data_flags_json(args.data));

  return run_command("predict", report_path, std::move(report),
                     [&](json& rep) {
    const TrainedModel model = TrainedModel::load(args.model);
    LoadReport lr;
    const MatrixCsv input = load_matrix_csv(
        args.data.data, {args.data.label_column}, args.data.id_column, &lr);
    warn_rejections(lr);
    report_load(rep, "data", args.data.data, lr);
    rep["inputs"]["model"] = args.model;

    if (input.values.cols() != model.num_features())
      throw DataError("model expects " + std::to_string(model.num_features()) +
                      " feature columns, " + args.data.data + " provides " +
                      std::to_string(input.values.cols()));

    const Vector scores = model.scores(input.values);
    std::ofstream os(args.out, std::ios::binary);
    if (!os) throw IoError("cannot open " + args.out + " for writing");
    os << "id,score,label\n";
    for (Index i = 0; i < scores.size(); ++i)
      os << input.ids[static_cast<std::size_t>(i)] << ','
         << format_double(scores[i]) << ','
         << (scores[i] >= 0.0 ? 1 : -1) << '\n';
    if (!os) throw IoError("failed while writing " + args.out);

    rep["outputs"]["predictions"] = args.out;
    rep["outputs"]["rows_written"] = scores.size();
    std::cout << "wrote " << scores.size() << " predictions to " << args.out
              << '\n';
  });
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model;
  DataFlags data;
  std::string labels;  // optional separate truth file
  std::string report;
};

int run_eval(const EvalArgs& args) {
  const std::string report_path =
      default_path(args.report, args.data.data, ".eval.report.json");

  json report;
  report["config"]["model"] = args.model;
  report["config"]["labels"] = args.labels;
  report["config"].update(data_flags_json(args.data));

  return run_command("eval", report_path, std::move(report), [&](json& rep) {
    const TrainedModel model = TrainedModel::load(args.model);
    rep["inputs"]["model"] = args.model;

    Matrix X;
    Vector truth;
    if (!args.labels.empty()) {
      LoadReport features_lr;
      const MatrixCsv input =
          load_matrix_csv(args.data.data, {args.data.label_column},
                          args.data.id_column, &features_lr);
      warn_rejections(features_lr);
      report_load(rep, "data", args.data.data, features_lr);

      LoadReport labels_lr;
      const LabeledIds labeled =
          load_labels_csv(args.labels, args.data.csv_options(), &labels_lr);
      warn_rejections(labels_lr);
      report_load(rep, "labels", args.labels, labels_lr);

      if (input.ids.size() != labeled.ids.size())
        throw DataError(args.data.data + " has " +
                        std::to_string(input.ids.size()) + " rows but " +
                        args.labels + " has " +
                        std::to_string(labeled.ids.size()));
      for (std::size_t i = 0; i < input.ids.size(); ++i)
        if (input.ids[i] != labeled.ids[i])
          throw DataError("row identifiers disagree at position " +
                          std::to_string(i) + ": '" + input.ids[i] +
                          "' in " + args.data.data + " vs '" +
                          labeled.ids[i] + "' in " + args.labels);
      X = input.values;
      truth = labeled.labels;
    } else {
      LoadReport lr;
      const Dataset data =
          load_csv(args.data.data, args.data.csv_options(), &lr);
      warn_rejections(lr);
      report_load(rep, "data", args.data.data, lr);
      X = data.features.values;
      truth = data.features.labels;
    }

    if (X.cols() != model.num_features())
      throw DataError("model expects " + std::to_string(model.num_features()) +
                      " feature columns, " + args.data.data + " provides " +
                      std::to_string(X.cols()));
    if (X.rows() == 0) throw DataError("no rows to evaluate");

    const Vector scores = model.scores(X);
    const double acc = accuracy(score_labels(scores), truth);
    const double ap = average_precision(scores, truth);
    const Index positives = (truth.array() > 0.0).count();

    rep["metrics"]["accuracy"] = acc;
    rep["metrics"]["average_precision"] = ap;
    rep["metrics"]["examples"] = X.rows();
    rep["metrics"]["positives"] = positives;

    std::cout << "accuracy: " << format_double(acc)
              << "\naverage precision: " << format_double(ap) << "\n("
              << X.rows() << " examples, " << positives << " positives)\n"
              << "report: " << report_path << '\n';
  });
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  DataFlags data;
  ModelFlags model;
  std::vector<double> lambda_grid;
  std::vector<double> sigma_grid{1.0};
  double val_fraction = 0.2;
  std::string out;
  std::string trace_out;
  std::string report;
};

int run_sweep(const SweepArgs& args) {
  const std::string trace_path =
      default_path(args.trace_out, args.out, ".trace.tsv");
  const std::string report_path =
      default_path(args.report, args.out, ".report.json");

  json report;
  report["config"] = model_flags_json(args.model, false);
  report["config"].update(data_flags_json(args.data));
  report["config"]["val_fraction"] = args.val_fraction;

  return run_command("sweep", report_path, std::move(report), [&](json& rep) {
    std::vector<double> lambdas =
        args.lambda_grid.empty() ? default_lambda_grid() : args.lambda_grid;
    std::vector<double> sigmas = args.sigma_grid;
    std::sort(lambdas.begin(), lambdas.end());
    std::sort(sigmas.begin(), sigmas.end());
    for (double v : lambdas)
      if (!(v > 0.0))
        throw ConfigError("lambda grid entries must be positive");
    for (double v : sigmas)
      if (!(v > 0.0)) throw ConfigError("sigma grid entries must be positive");
    if (!(args.val_fraction > 0.0 && args.val_fraction < 1.0))
      throw ConfigError("val fraction must lie strictly between 0 and 1");
    rep["config"]["lambda_grid"] = lambdas;
    rep["config"]["sigma_grid"] = sigmas;

    LoadReport lr;
    const Dataset data = load_csv(args.data.data, args.data.csv_options(), &lr);
    warn_rejections(lr);
    report_load(rep, "data", args.data.data, lr);

    SplitFractions fractions{1.0 - args.val_fraction, args.val_fraction, 0.0};
    const Split split = split_dataset(data, fractions, args.model.seed);
    if (split.train.features.n() < 1 || split.val.features.n() < 1)
      throw DataError("the train/validation split left a part empty (" +
                      std::to_string(split.train.features.n()) + " train, " +
                      std::to_string(split.val.features.n()) +
                      " validation rows)");
    rep["inputs"]["train_rows"] = split.train.features.n();
    rep["inputs"]["val_rows"] = split.val.features.n();

    const auto start = std::chrono::steady_clock::now();
    const BasisConfig basis = args.model.basis_config();
    json candidates = json::array();
    bool have_best = false;
    double best_lambda = 0.0, best_sigma = 0.0, best_accuracy = 0.0;
    for (double sigma : sigmas) {
      for (double lambda : lambdas) {
        SolverConfig config = args.model.solver_config();
        config.lambda = lambda;
        config.sigma = sigma;
        json row;
        row["lambda"] = lambda;
        row["sigma"] = sigma;
        try {
          SolverTrace trace;
          const TrainedModel candidate = TrainedModel::train(
              split.train.features, basis, config, &trace);
          const double val_accuracy = accuracy(
              score_labels(candidate.scores(split.val.features.values)),
              split.val.features.labels);
          row["status"] = "ok";
          row["converged"] = trace.converged;
          row["val_accuracy"] = val_accuracy;
          std::cout << "lambda=" << format_double(lambda)
                    << " sigma=" << format_double(sigma)
                    << " val_accuracy=" << format_double(val_accuracy)
                    << (trace.converged ? "" : " (budget exhausted)") << '\n';
          const bool better =
              !have_best || val_accuracy > best_accuracy ||
              (val_accuracy == best_accuracy &&
               (lambda < best_lambda ||
                (lambda == best_lambda && sigma < best_sigma)));
          if (better) {
            have_best = true;
            best_lambda = lambda;
            best_sigma = sigma;
            best_accuracy = val_accuracy;
          }
        } catch (const SolverError& e) {
          row["status"] = "solver_error";
          row["message"] = e.what();
          std::cout << "lambda=" << format_double(lambda)
                    << " sigma=" << format_double(sigma)
                    << " failed: " << e.what() << '\n';
        }
        candidates.push_back(std::move(row));
      }
    }
    rep["outputs"]["candidates"] = candidates;
    if (!have_best)
      throw SolverError("every sweep candidate diverged", SolverTrace{});

    SolverConfig final_config = args.model.solver_config();
    final_config.lambda = best_lambda;
    final_config.sigma = best_sigma;
    SolverTrace trace;
    const TrainedModel model = TrainedModel::train(data.features, basis,
                                                   final_config, &trace);
    for (const std::string& w : trace.warnings)
      std::cerr << "csam: warning: " << w << '\n';
    model.save(args.out);
    write_trace_file(trace_path, trace);
    const double train_accuracy =
        accuracy(score_labels(model.scores(data.features.values)),
                 data.features.labels);
    const double elapsed = seconds_since(start);

    rep["outputs"]["chosen"]["lambda"] = best_lambda;
    rep["outputs"]["chosen"]["sigma"] = best_sigma;
    rep["outputs"]["chosen"]["val_accuracy"] = best_accuracy;
    rep["outputs"]["model"] = args.out;
    rep["outputs"]["trace"] = trace_path;
    rep["outputs"]["converged"] = trace.converged;
    rep["metrics"]["train_accuracy"] = train_accuracy;
    rep["metrics"]["val_accuracy"] = best_accuracy;

    std::cout << "selected lambda=" << format_double(best_lambda)
              << " sigma=" << format_double(best_sigma) << " (val accuracy "
              << format_double(best_accuracy) << ")\n"
              << "refit on all " << data.features.n() << " rows ["
              << format_double(elapsed) << " s total]\n"
              << "model: " << args.out << "\nreport: " << report_path << '\n';
  });
}

// ---------------------------------------------------------------------------
// rank

struct RankArgs {
  std::string model;
  double tau = 1e-3;
  std::string curves_dir;
  Index grid_size = 101;
  std::string report;
};

int run_rank(const RankArgs& args) {
  const std::string report_path =
      default_path(args.report, args.model, ".rank.report.json");

  json report;
  report["config"]["model"] = args.model;
  report["config"]["tau"] = args.tau;
  report["config"]["curves_dir"] = args.curves_dir;
  report["config"]["grid_size"] = args.grid_size;

  return run_command("rank", report_path, std::move(report), [&](json& rep) {
    const TrainedModel model = TrainedModel::load(args.model);
    rep["inputs"]["model"] = args.model;
    rep["inputs"]["features"] = model.num_features();

    const Vector norms = model.feature_group_norms();
    const std::vector<Index> kept = model.select_features(args.tau);

    json retained = json::array();
    for (Index j : kept) {
      json row;
      row["feature"] = j;
      row["norm"] = norms[j];
      retained.push_back(std::move(row));
      std::cout << "feature " << j << ": norm " << format_double(norms[j])
                << '\n';
    }
    if (kept.empty()) std::cout << "no informative features retained\n";
    rep["outputs"]["retained"] = retained;

    json curve_files = json::array();
    if (!args.curves_dir.empty()) {
      std::filesystem::create_directories(args.curves_dir);
      for (Index j : kept) {
        const auto curve = model.component_curve(j, args.grid_size);
        const std::string path = args.curves_dir + "/feature_" +
                                 std::to_string(j) + ".tsv";
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("cannot open " + path + " for writing");
        os << "x\tvalue\n";
        for (const auto& [x, value] : curve)
          os << format_double(x) << '\t' << format_double(value) << '\n';
        if (!os) throw IoError("failed while writing " + path);
        curve_files.push_back(path);
      }
    }
    rep["outputs"]["curve_files"] = curve_files;
    std::cout << "report: " << report_path << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sparse additive binary classification with a bounded robust loss"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Fit a model on labeled data");
  add_data_flags(train_cmd, train_args.data);
  add_model_flags(train_cmd, train_args.model, true);
  train_cmd->add_option("--model-out", train_args.model_out,
                        "Where to write the trained model")
      ->required();
  train_cmd->add_option("--trace-out", train_args.trace_out,
                        "Solver trace TSV (default: <model-out>.trace.tsv)");
  train_cmd->add_option("--report", train_args.report,
                        "JSON report (default: <model-out>.report.json)");

  PredictArgs predict_args;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Score unlabeled data with a model");
  predict_cmd->add_option("--model", predict_args.model, "Trained model file")
      ->required();
  add_data_flags(predict_cmd, predict_args.data, false);
  predict_cmd->add_option("--out", predict_args.out,
                          "Predictions CSV (id,score,label)")
      ->required();
  predict_cmd->add_option("--report", predict_args.report,
                          "JSON report (default: <out>.report.json)");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Measure a model against labeled data");
  eval_cmd->add_option("--model", eval_args.model, "Trained model file")
      ->required();
  add_data_flags(eval_cmd, eval_args.data);
  eval_cmd->add_option(
      "--labels", eval_args.labels,
      "Separate truth file (id + label); rows must align with --data");
  eval_cmd->add_option("--report", eval_args.report,
                       "JSON report (default: <data>.eval.report.json)");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Grid-search lambda (and sigma) on a validation split");
  add_data_flags(sweep_cmd, sweep_args.data);
  add_model_flags(sweep_cmd, sweep_args.model, false);
  sweep_cmd->add_option("--lambda-grid", sweep_args.lambda_grid,
                        "Comma-separated lambda grid (default: built-in)")
      ->delimiter(',');
  sweep_cmd->add_option("--sigma-grid", sweep_args.sigma_grid,
                        "Comma-separated sigma grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--val-fraction", sweep_args.val_fraction,
                        "Fraction of rows held out for validation")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_args.out,
                        "Where to write the winning model (refit on all rows)")
      ->required();
  sweep_cmd->add_option("--trace-out", sweep_args.trace_out,
                        "Refit trace TSV (default: <out>.trace.tsv)");
  sweep_cmd->add_option("--report", sweep_args.report,
                        "JSON report (default: <out>.report.json)");

  RankArgs rank_args;
  CLI::App* rank_cmd = app.add_subcommand(
      "rank", "Rank features of a trained model and export their curves");
  rank_cmd->add_option("--model", rank_args.model, "Trained model file")
      ->required();
  rank_cmd->add_option("--tau", rank_args.tau,
                       "Relative group-norm retention threshold")
      ->capture_default_str();
  rank_cmd->add_option("--curves-dir", rank_args.curves_dir,
                       "Directory for per-feature component curves");
  rank_cmd->add_option("--grid-size", rank_args.grid_size,
                       "Points per component curve")
      ->capture_default_str();
  rank_cmd->add_option("--report", rank_args.report,
                       "JSON report (default: <model>.rank.report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "csam: error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (train_cmd->parsed()) return run_train(train_args);
    if (predict_cmd->parsed()) return run_predict(predict_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (sweep_cmd->parsed()) return run_sweep(sweep_args);
    if (rank_cmd->parsed()) return run_rank(rank_args);
  } catch (const std::exception& e) {
    // run_command handles command failures; reaching here means argument
    // plumbing itself failed.
    std::cerr << "csam: error: internal: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "csam: error: usage: no command selected\n";
  return 2;
}

// Command-line front end: one subcommand per pipeline step plus run-all,
// sweep and bench.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "locec/errors.hpp"
#include "locec/graph_io.hpp"
#include "locec/model_io.hpp"
#include "locec/pipeline.hpp"
#include "locec/synthgen.hpp"
#include "locec/text_io.hpp"

namespace fs = std::filesystem;
using namespace locec;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Options shared by most subcommands.
struct Options {
  std::string data = ".";
  std::size_t k = 20;
  std::string classifier = "commcnn";
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  double split = 0.8;
  double labeled_fraction = 1.0;
  std::string labels = "family,colleague,schoolmate";
  // CommCnn training
  std::size_t epochs = 0;  // 0: pipeline default
  double learning_rate = 1e-2;
  double momentum = 0.0;
  std::size_t batch_size = 32;
  std::size_t channels = 16;
  std::size_t hidden = 64;
  double loss_threshold = -1.0;  // negative: pipeline default
  bool class_weighting = false;
  // regression
  double l2 = 1e-4;
  bool no_swap = false;
  bool verbose = false;
  std::string config;

  std::string path(const std::string& name) const { return (fs::path(data) / name).string(); }
  GraphPaths graph_paths() const { return {path("edges.tsv"), path("features.tsv"), path("interactions.tsv")}; }

  PipelineConfig pipeline() const {
    PipelineConfig c;
    try {
      c.labels = LabelSet::parse(labels);
      c.classifier.kind = parse_classifier_kind(classifier);
      c.classifier.k = k;
      c.classifier.cnn = pipeline_cnn_defaults();
      if (epochs > 0) c.classifier.cnn.max_epochs = epochs;
      if (loss_threshold >= 0.0) c.classifier.cnn.loss_threshold = loss_threshold;
      c.classifier.cnn.learning_rate = learning_rate;
      c.classifier.cnn.momentum = momentum;
      c.classifier.cnn.batch_size = batch_size;
      c.classifier.cnn.channels = channels;
      c.classifier.cnn.hidden = hidden;
      c.classifier.cnn.class_weighting = class_weighting;
      c.classifier.baseline.l2 = l2;
      c.classifier.baseline.class_weighting = class_weighting;
      c.edge.regression.l2 = l2;
      c.edge.swap_augmentation = !no_swap;
      c.workers = workers;
      c.seed = seed;
      c.split = split;
      c.labeled_fraction = labeled_fraction;
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (verbose) c.log = &std::cerr;
    return c;
  }
};

void add_data_option(CLI::App* app, Options& o) {
  app->add_option("--data", o.data, "Directory holding the input and output files")->capture_default_str();
}

void add_common_options(CLI::App* app, Options& o) {
  add_data_option(app, o);
  app->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app->add_option("--labels", o.labels, "Comma-separated label set")->capture_default_str();
  app->add_flag("--verbose,-v", o.verbose, "Progress messages on stderr");
  app->add_option("--config", o.config, "key=value file with option defaults")->check(CLI::ExistingFile);
}

void add_split_options(CLI::App* app, Options& o) {
  app->add_option("--split", o.split, "Training share of the labelled edges")->capture_default_str();
  app->add_option("--labeled-fraction", o.labeled_fraction, "Share of the training split that is used")
      ->capture_default_str();
}

void add_model_options(CLI::App* app, Options& o) {
  app->add_option("--k", o.k, "Feature-matrix rows")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--classifier", o.classifier, "commcnn or baseline")
      ->check(CLI::IsMember({"commcnn", "baseline"}))
      ->capture_default_str();
  app->add_option("--epochs", o.epochs, "CommCnn maximum epochs (0: default)");
  app->add_option("--learning-rate", o.learning_rate, "CommCnn step size")->capture_default_str();
  app->add_option("--momentum", o.momentum, "CommCnn momentum")->capture_default_str();
  app->add_option("--batch-size", o.batch_size, "CommCnn mini-batch size")->check(CLI::PositiveNumber);
  app->add_option("--channels", o.channels, "CommCnn channels")->check(CLI::PositiveNumber);
  app->add_option("--hidden", o.hidden, "CommCnn hidden width")->check(CLI::PositiveNumber);
  app->add_option("--loss-threshold", o.loss_threshold, "Stop once the epoch loss is below this");
  app->add_flag("--class-weighting", o.class_weighting, "Inverse-frequency class weights");
  app->add_option("--l2", o.l2, "L2 penalty of the regression models")->capture_default_str();
}

Graph load(const Options& o) { return load_graph(o.graph_paths()); }

CommunityStore load_communities(const Options& o, const Graph& g) {
  return read_communities(o.path("communities.tsv"), g);
}

std::vector<std::pair<Edge, std::size_t>> internal_edges(const Graph& g, const std::vector<LabeledEdge>& edges,
                                                         const LabelSet& labels) {
  std::vector<std::pair<Edge, std::size_t>> out;
  const auto known = to_edge_labels(g, edges, labels);  // validates ids and edges
  for (const auto& e : edges) {
    if (const auto l = labels.index_of(e.label)) {
      out.emplace_back(canonical_edge(*g.internal_id(e.u), *g.internal_id(e.v)), *l);
    }
  }
  return out;
}

void write_json(const std::string& path, const std::string& json) {
  auto out = text::open_output(path);
  out << json << '\n';
}

/// Turns the lines of a "--config FILE" into "--key=value" arguments for
/// every key not given on the command line. Keys may use '_' for '-'.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.empty() || args[0] == "generate") return args;  // generate has its own config format
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) return args;  // reported by the option's own check
  std::string raw;
  std::size_t number = 0;
  std::vector<std::string> extra;
  while (std::getline(in, raw)) {
    ++number;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    std::string key(text::trim(line.substr(0, eq)));
    std::string value(text::trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(),
                                   [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    if (!given) extra.push_back(flag + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ------------------------------------------------------------ subcommands

int cmd_generate(const std::string& config_path, std::optional<std::size_t> n, std::optional<std::uint64_t> seed,
                 std::optional<double> p_out, const Options& o) {
  GenConfig cfg = config_path.empty() ? GenConfig{} : read_gen_config(config_path);
  if (n) cfg.n_users = *n;
  if (seed) cfg.seed = *seed;
  if (p_out) cfg.p_out = *p_out;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto data = generate(cfg);
  write_synthetic(o.data, data);
  auto cfg_out = text::open_output(o.path("generator.cfg"));
  cfg_out << format_gen_config(cfg);
  print_summary(std::cout, summarize(data.graph, data.truth, data.groups));
  return kOk;
}

int cmd_split(const Options& o) {
  const auto cfg = o.pipeline();
  const auto truth = read_edge_labels(o.path("labels.tsv"));
  const auto [train, test] = protocol_split(truth, cfg);
  write_edge_labels(o.path("train_labels.tsv"), train);
  write_edge_labels(o.path("test_labels.tsv"), test);
  std::cout << "train\t" << train.size() << "\ntest\t" << test.size() << '\n';
  return kOk;
}

int cmd_detect(const Options& o) {
  const auto g = load(o);
  const auto start = std::chrono::steady_clock::now();
  const auto p1 = run_phase1(g, o.workers);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto v : p1.capped_egos) {
    std::cerr << "warning: ego network of node " << g.external_id(v) << " exceeds the member cap\n";
  }
  write_communities(o.path("communities.tsv"), p1.communities, g);
  std::cout << "communities\t" << p1.communities.total_communities() << "\nseconds\t" << secs << '\n';
  return kOk;
}

int cmd_build_features(const Options& o) {
  const auto cfg = o.pipeline();
  const auto g = load(o);
  const auto store = load_communities(o, g);
  write_community_inputs(o.path("community_inputs.tsv"), g, store, cfg.classifier.kind, cfg.classifier.k, o.workers);
  return kOk;
}

int cmd_train_community(const Options& o) {
  auto cfg = o.pipeline();
  const auto g = load(o);
  const auto store = load_communities(o, g);
  const auto train = read_edge_labels(o.path("train_labels.tsv"));
  const auto training = community_training_set(store, to_edge_labels(g, train, cfg.labels), cfg.labels.size());
  std::cout << "labelled communities\t" << training.refs.size() << '\n';
  cfg.classifier.cnn.seed = derive_seed(cfg.seed, kCommunityTrainStream);
  cfg.classifier.cnn.log = cfg.log;
  TrainingCurve curve;
  const auto model = train_community_classifier(g, store, training, cfg.labels, cfg.classifier, o.workers, &curve);
  save_community_classifier(o.path("community_model.bin"), model);
  if (!curve.epoch_loss.empty()) {
    auto out = text::open_output(o.path("training_curve.tsv"));
    for (std::size_t i = 0; i < curve.epoch_loss.size(); ++i) out << i + 1 << '\t' << curve.epoch_loss[i] << '\n';
    std::cout << "epochs\t" << curve.epoch_loss.size() << "\nfinal_loss\t" << curve.epoch_loss.back() << '\n';
  }
  return kOk;
}

int cmd_classify(const Options& o) {
  const auto g = load(o);
  const auto store = load_communities(o, g);
  const auto model = load_community_classifier(o.path("community_model.bin"));
  const auto results = run_phase2(g, store, model, o.workers);
  write_class_results(o.path("class_results.tsv"), results, store, g);
  return kOk;
}

int cmd_train_edge(const Options& o) {
  const auto cfg = o.pipeline();
  const auto g = load(o);
  const auto store = load_communities(o, g);
  const auto results = read_class_results(o.path("class_results.tsv"), store, g);
  const auto tightness = compute_tightness(g, store, o.workers);
  const EdgeContext ctx{store, results, tightness};
  const auto train = read_edge_labels(o.path("train_labels.tsv"));
  const auto model = lr_train(edge_training_data(ctx, internal_edges(g, train, cfg.labels)), cfg.labels, cfg.edge);
  save_edge_labeler(o.path("edge_model.bin"), model);
  return kOk;
}

int cmd_label_edges(const Options& o) {
  const auto g = load(o);
  const auto store = load_communities(o, g);
  const auto results = read_class_results(o.path("class_results.tsv"), store, g);
  const auto tightness = compute_tightness(g, store, o.workers);
  const auto model = load_edge_labeler(o.path("edge_model.bin"));
  const auto predictions = run_phase3(g, {store, results, tightness}, model, o.workers);
  write_predictions(o.path("predictions.tsv"), g, predictions, model.labels());
  return kOk;
}

int cmd_evaluate(const Options& o, std::string predictions, std::string truth, const std::string& json) {
  const auto cfg = o.pipeline();
  if (predictions.empty()) predictions = o.path("predictions.tsv");
  if (truth.empty()) truth = o.path("test_labels.tsv");
  const auto report = evaluate(read_predictions(predictions), read_edge_labels(truth), cfg.labels);
  print_metrics(std::cout, report);
  if (!json.empty()) write_json(json, metrics_json(report));
  return kOk;
}

int cmd_run_all(const Options& o) {
  const auto cfg = o.pipeline();
  const auto g = load(o);
  const auto truth = read_edge_labels(o.path("labels.tsv"));
  PhaseOneResult p1;
  const auto r = run_all(g, truth, cfg, &p1);
  write_edge_labels(o.path("train_labels.tsv"), r.train);
  write_edge_labels(o.path("test_labels.tsv"), r.test);
  write_communities(o.path("communities.tsv"), p1.communities, g);
  save_community_classifier(o.path("community_model.bin"), *r.classifier);
  write_class_results(o.path("class_results.tsv"), r.results, p1.communities, g);
  save_edge_labeler(o.path("edge_model.bin"), *r.edge_model);
  write_predictions(o.path("predictions.tsv"), g, r.predictions, cfg.labels);
  write_json(o.path("metrics.json"), metrics_json(r.metrics));
  std::cout << "phase1_seconds\t" << r.phase1_seconds << "\nphase2_seconds\t" << r.phase2_seconds
            << "\nphase3_seconds\t" << r.phase3_seconds << "\nlabelled_communities\t" << r.training_communities
            << '\n';
  print_metrics(std::cout, r.metrics);
  return kOk;
}

int cmd_sweep(const Options& o, const std::vector<double>& fractions) {
  const auto cfg = o.pipeline();
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("fractions must lie in (0, 1]");
  }
  const auto g = load(o);
  const auto truth = read_edge_labels(o.path("labels.tsv"));
  const auto p1 = run_phase1(g, o.workers, cfg.gn);
  const auto rows = vary_labeled_fraction(g, p1, truth, fractions, cfg);
  std::cout << "fraction\ttrain_edges\tmacro_f1\tmicro_f1\n";
  for (const auto& r : rows) {
    std::cout << r.fraction << '\t' << r.train_edges << '\t' << r.metrics.macro_f1 << '\t' << r.metrics.micro_f1
              << '\n';
  }
  return kOk;
}

int cmd_bench(const Options& o, const std::vector<std::size_t>& sizes, const std::vector<std::size_t>& worker_counts,
              double degree) {
  std::cout << "hardware_threads\t" << std::thread::hardware_concurrency() << '\n';
  std::cout << "n\tedges\tworkers\tseconds\tcommunities\tidentical\n";
  for (auto n : sizes) {
    GenConfig gc;
    gc.n_users = n;
    gc.seed = o.seed;
    gc.p_out = std::min(1.0, degree / static_cast<double>(n));
    const auto data = generate(gc);
    std::optional<CommunityStore> reference;
    for (auto w : worker_counts) {
      const auto start = std::chrono::steady_clock::now();
      const auto p1 = run_phase1(data.graph, w);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!reference) reference = p1.communities;
      std::cout << n << '\t' << data.graph.num_edges() << '\t' << w << '\t' << secs << '\t'
                << p1.communities.total_communities() << '\t' << (p1.communities == *reference ? "yes" : "no")
                << std::endl;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relationship labelling from local communities in ego networks"};
  app.require_subcommand(1);
  Options o;

  std::string gen_config;
  std::optional<std::size_t> gen_n;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_p_out;
  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic graph with ground-truth labels");
  add_data_option(generate_cmd, o);
  generate_cmd->add_option("--config", gen_config, "Generator key=value file")->check(CLI::ExistingFile);
  generate_cmd->add_option("--n", gen_n, "Number of users");
  generate_cmd->add_option("--seed", gen_seed, "Random seed");
  generate_cmd->add_option("--p-out", gen_p_out, "Cross-group edge probability");

  auto* split_cmd = app.add_subcommand("split", "Split labels.tsv into train_labels.tsv and test_labels.tsv");
  add_common_options(split_cmd, o);
  add_split_options(split_cmd, o);

  auto* detect_cmd = app.add_subcommand("detect", "Detect local communities in every ego network");
  add_common_options(detect_cmd, o);

  auto* features_cmd = app.add_subcommand("build-features", "Write per-community classifier inputs");
  add_common_options(features_cmd, o);
  add_model_options(features_cmd, o);

  auto* train_comm_cmd = app.add_subcommand("train-community", "Train the community classifier");
  add_common_options(train_comm_cmd, o);
  add_model_options(train_comm_cmd, o);

  auto* classify_cmd = app.add_subcommand("classify-communities", "Classify every local community");
  add_common_options(classify_cmd, o);

  auto* train_edge_cmd = app.add_subcommand("train-edge", "Train the edge combiner");
  add_common_options(train_edge_cmd, o);
  train_edge_cmd->add_option("--l2", o.l2, "L2 penalty")->capture_default_str();
  train_edge_cmd->add_flag("--no-swap", o.no_swap, "Do not add swapped-endpoint training copies");

  auto* label_cmd = app.add_subcommand("label-edges", "Predict a relationship label for every edge");
  add_common_options(label_cmd, o);

  std::string eval_predictions, eval_truth, eval_json;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  add_common_options(eval_cmd, o);
  eval_cmd->add_option("--predictions", eval_predictions, "Predictions file (default DATA/predictions.tsv)");
  eval_cmd->add_option("--truth", eval_truth, "Truth labels (default DATA/test_labels.tsv)");
  eval_cmd->add_option("--json", eval_json, "Also write the report as JSON");

  auto* run_cmd = app.add_subcommand("run-all", "Split, detect, classify, combine and evaluate");
  add_common_options(run_cmd, o);
  add_split_options(run_cmd, o);
  add_model_options(run_cmd, o);
  run_cmd->add_flag("--no-swap", o.no_swap, "Do not add swapped-endpoint training copies");

  std::vector<double> fractions{0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  auto* sweep_cmd = app.add_subcommand("sweep", "Macro F1 as a function of the labelled share of the training split");
  add_common_options(sweep_cmd, o);
  add_split_options(sweep_cmd, o);
  add_model_options(sweep_cmd, o);
  sweep_cmd->add_option("--fractions", fractions, "Labelled fractions")->delimiter(',')->capture_default_str();

  std::vector<std::size_t> bench_sizes{20000, 40000}, bench_workers{1, 4};
  double bench_degree = 10.0;
  auto* bench_cmd = app.add_subcommand("bench", "Time community detection on generated graphs");
  add_common_options(bench_cmd, o);
  bench_cmd->add_option("--sizes", bench_sizes, "Graph sizes")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--worker-counts", bench_workers, "Worker counts")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--cross-degree", bench_degree, "Expected cross-group degree (p_out = d / n)")
      ->capture_default_str();

  try {
    auto args = expand_config({argv + 1, argv + argc});
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen_config, gen_n, gen_seed, gen_p_out, o);
    if (*split_cmd) return cmd_split(o);
    if (*detect_cmd) return cmd_detect(o);
    if (*features_cmd) return cmd_build_features(o);
    if (*train_comm_cmd) return cmd_train_community(o);
    if (*classify_cmd) return cmd_classify(o);
    if (*train_edge_cmd) return cmd_train_edge(o);
    if (*label_cmd) return cmd_label_edges(o);
    if (*eval_cmd) return cmd_evaluate(o, eval_predictions, eval_truth, eval_json);
    if (*run_cmd) return cmd_run_all(o);
    if (*sweep_cmd) return cmd_sweep(o, fractions);
    if (*bench_cmd) return cmd_bench(o, bench_sizes, bench_workers, bench_degree);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

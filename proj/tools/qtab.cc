// Copyright 2026 The qtab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qtab/bandit.h"
#include "qtab/bayesopt.h"
#include "qtab/data.h"
#include "qtab/error.h"
#include "qtab/eval.h"
#include "qtab/evaluator.h"
#include "qtab/jpeg.h"
#include "qtab/parallel.h"
#include "qtab/pareto.h"
#include "qtab/proxy_classifier.h"
#include "qtab/search.h"
#include "qtab/stats.h"
#include "qtab/trial_log.h"

namespace fs = std::filesystem;

namespace qtab {
namespace {

struct GlobalOptions {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string cache_dir;
};

struct DataOptions {
  std::string manifest;
  std::string evaluator = "proxy";
  std::string subsampling = "420";
  std::string chroma = "same";
  bool psnr = false;
};

struct TableChoice {
  int quality = 0;
  std::string qtable;
};

struct TuneOptions {
  std::string strategy = "sorted-random";
  int trials = 100;
  std::string out;
  std::string bounds_from;
  std::vector<double> cr_window;
  std::string fitness_from;
  std::vector<int> range;
  bool descending = false;
  int stop_after_good = 0;
  int batch = 1;
  BoConfig bo;
  int window = 50;
  std::vector<std::string> arms = {"pso", "sa", "de", "greedy", "nelder-mead"};
};

struct ReportOptions {
  std::string mode = "pareto";
  std::vector<std::string> logs;
  std::string out;
  std::string fitness_from;
  int k = 10;
  int resamples = 100;
  int classes_per_sample = 700;
  int images_per_class = 4;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Every option of the global app and the active subcommand as "# key=value",
// defaults included, followed by settings resolved at run time.
std::string effective_config(const CLI::App& app, const CLI::App& sub,
                             const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ostringstream out;
  out << "# command=" << sub.get_name() << '\n';
  for (const CLI::App* a : {&app, &sub}) {
    for (const CLI::Option* opt : a->get_options()) {
      if (opt->get_single_name() == "help" || opt->get_single_name() == "h") continue;
      std::string value;
      if (opt->get_expected_min() == 0) {
        value = opt->count() ? "true" : "false";
      } else if (opt->count()) {
        value = join(opt->results(), " ");
      } else {
        value = opt->get_default_str();
        if (value == "{}") value.clear();
        if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
          value = value.substr(1, value.size() - 2);
          std::replace(value.begin(), value.end(), ',', ' ');
        }
      }
      out << "# " << opt->get_single_name() << '=' << value << '\n';
    }
  }
  for (const auto& [k, v] : extra) out << "# " << k << '=' << v << '\n';
  return out.str();
}

std::string resolved_cache_dir(const GlobalOptions& g) {
  if (!g.cache_dir.empty()) return g.cache_dir;
  if (const char* env = std::getenv("QTAB_CACHE_DIR")) return env;
  return {};
}

// Dataset, evaluator and evaluation options shared by the data-driven
// commands.
struct Session {
  std::unique_ptr<Dataset> dataset;
  std::unique_ptr<Evaluator> evaluator;
  std::unique_ptr<EvalCache> cache;
  EvalOptions options;

  Session(const GlobalOptions& g, const DataOptions& d) {
    if (d.manifest.empty()) throw InvalidArgument("--manifest is required");
    dataset = std::make_unique<Dataset>(load_manifest(d.manifest, g.threads));
    evaluator = make_evaluator(EvaluatorSpec::parse(d.evaluator), dataset->class_count());
    options.encode.subsampling = parse_subsampling(d.subsampling);
    options.encode.chroma = parse_chroma_policy(d.chroma);
    options.compute_psnr = d.psnr;
    options.threads = g.threads;
    if (const std::string dir = resolved_cache_dir(g); !dir.empty()) {
      cache = std::make_unique<EvalCache>(dir);
      options.cache = cache.get();
    }
  }

  std::vector<std::pair<std::string, std::string>> describe(const GlobalOptions& g) const {
    return {{"resolved_threads", std::to_string(resolve_threads(g.threads))},
            {"resolved_cache_dir", resolved_cache_dir(g)},
            {"dataset_hash", dataset->hash()},
            {"dataset_images", std::to_string(dataset->size())},
            {"dataset_classes", std::to_string(dataset->class_count())},
            {"evaluator_id", evaluator->id()},
            {"encode_id", options.encode.id()}};
  }
};

TableSet choose_tables(const TableChoice& choice, const EncodeConfig& encode) {
  if (!choice.qtable.empty()) return tables_for(load_qtable(choice.qtable), encode);
  if (choice.quality > 0) return standard_tables(choice.quality);
  throw InvalidArgument("one of --quality or --qtable is required");
}

void add_data_options(CLI::App* sub, DataOptions& d, bool evaluator) {
  sub->add_option("--manifest", d.manifest, "JSON-lines dataset manifest")->required();
  if (evaluator) {
    sub->add_option("--evaluator", d.evaluator,
                    "proxy[:k=v,...] | psnr[:threshold_db=X] | external:command=... | "
                    "external:host=H,port=P");
    sub->add_flag("--psnr", d.psnr, "also record mean PSNR");
  }
  sub->add_option("--subsampling", d.subsampling, "chroma subsampling: 420 or 444");
  sub->add_option("--chroma", d.chroma, "chroma table: same (tuned table) or standard (Annex K)");
}

void add_table_choice(CLI::App* sub, TableChoice& t) {
  auto* q = sub->add_option("--quality", t.quality, "standard tables at this quality factor")
                ->check(CLI::Range(1, 100));
  auto* f = sub->add_option("--qtable", t.qtable, "table file (8x8 text or JSON)")->check(CLI::ExistingFile);
  q->excludes(f);
}

int cmd_gen_corpus(const GlobalOptions& g, const CLI::App& app, const CLI::App& sub,
                   SyntheticCorpusSpec spec, const std::string& out) {
  spec.seed = g.seed;
  std::cout << effective_config(app, sub, {});
  const fs::path manifest = generate_synthetic(spec, out);
  std::cout << "manifest=" << manifest.string() << '\n'
            << "images=" << spec.n_classes * spec.images_per_class << '\n';
  return 0;
}

int cmd_compress(const GlobalOptions& g, const CLI::App& app, const CLI::App& sub, const DataOptions& d,
                 const TableChoice& choice, const std::string& out) {
  const Dataset dataset = load_manifest(d.manifest, g.threads);
  EncodeConfig encode;
  encode.subsampling = parse_subsampling(d.subsampling);
  encode.chroma = parse_chroma_policy(d.chroma);
  const TableSet tables = choose_tables(choice, encode);
  std::cout << effective_config(app, sub,
                                {{"resolved_threads", std::to_string(resolve_threads(g.threads))},
                                 {"dataset_hash", dataset.hash()},
                                 {"encode_id", encode.id()},
                                 {"luma_table", tables.luma.hex()},
                                 {"chroma_table", tables.chroma.hex()}});
  std::vector<std::uint64_t> sizes(dataset.size());
  if (!out.empty()) fs::create_directories(out);
  parallel_for(dataset.size(), g.threads, [&](std::size_t i) {
    const JpegStream s = qtab::encode(dataset[i].image, tables.luma, tables.chroma, encode.subsampling);
    sizes[i] = s.size_bytes();
    if (!out.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "%06zu.jpg", i);
      write_file(fs::path(out) / name, s.bytes);
    }
  });
  std::uint64_t total = 0;
  for (auto s : sizes) total += s;
  std::cout << "images=" << dataset.size() << '\n'
            << "raw_bytes=" << dataset.raw_bytes() << '\n'
            << "compressed_bytes=" << total << '\n'
            << "compression_rate=" << fmt(static_cast<double>(dataset.raw_bytes()) / total) << '\n';
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const CLI::App& app, const CLI::App& sub, const DataOptions& d,
                 const TableChoice& choice) {
  Session s(g, d);
  const TableSet tables = choose_tables(choice, s.options.encode);
  auto extra = s.describe(g);
  extra.emplace_back("luma_table", tables.luma.hex());
  extra.emplace_back("chroma_table", tables.chroma.hex());
  std::cout << effective_config(app, sub, extra);
  const EvalOutcome r = evaluate(*s.dataset, tables, *s.evaluator, s.options);
  std::cout << "compression_rate=" << fmt(r.point.compression_rate) << '\n'
            << "accuracy=" << fmt(r.point.accuracy) << '\n';
  if (r.point.mean_psnr) std::cout << "mean_psnr=" << fmt(*r.point.mean_psnr) << '\n';
  return 0;
}

std::vector<EvalPoint> points_of(const TrialLog& log) {
  std::vector<EvalPoint> pts;
  for (const Trial& t : log.trials) pts.push_back(t.point);
  return pts;
}

TrialLog read_nonempty_log(const std::string& path) {
  TrialLog log = read_trial_log(path);
  if (log.trials.empty()) throw InvalidArgument(path + ": trial log is empty");
  return log;
}

std::unique_ptr<Proposer> make_proposer(Strategy strategy, const TuneOptions& t, std::uint64_t seed,
                                        const std::optional<Bounds>& bounds,
                                        const std::optional<FitnessCurve>& fitness,
                                        const FrequencyBands& bands) {
  auto need_bounds = [&]() -> const Bounds& {
    if (!bounds) throw InvalidArgument(to_string(strategy) + " needs --bounds-from and --cr-window");
    return *bounds;
  };
  switch (strategy) {
    case Strategy::kSortedRandom: {
      std::optional<SampleRange> range;
      if (!t.range.empty()) range = SampleRange(t.range[0], t.range[1]);
      return std::make_unique<SortedRandomProposer>(
          seed, t.descending ? SortOrder::kDescending : SortOrder::kAscending, range);
    }
    case Strategy::kUniformRandom:
      return std::make_unique<UniformRandomProposer>(seed);
    case Strategy::kBoundedRandom:
      return std::make_unique<BoundedRandomProposer>(need_bounds(), seed);
    case Strategy::kBayesOpt:
      if (!fitness) throw InvalidArgument("bayesopt needs a fitness curve (--bounds-from or --fitness-from)");
      return std::make_unique<BayesOptProposer>(need_bounds(), bands, *fitness, t.bo, seed);
    case Strategy::kComposite: {
      CompositeConfig cfg;
      cfg.window = t.window;
      cfg.arms.clear();
      for (const auto& a : t.arms) cfg.arms.push_back(parse_arm_kind(a));
      cfg.fitness = fitness;
      return std::make_unique<CompositeProposer>(need_bounds(), cfg, seed);
    }
    case Strategy::kStandard:
      break;
  }
  throw InvalidArgument("no proposer for strategy " + to_string(strategy));
}

int cmd_tune(const GlobalOptions& g, const CLI::App& app, const CLI::App& sub, const DataOptions& d,
             const TuneOptions& t) {
  Session s(g, d);
  const Strategy strategy = parse_strategy(t.strategy);
  const std::string dataset_hash = s.dataset->hash();

  std::optional<Bounds> bounds;
  std::optional<FitnessCurve> fitness;
  auto prior_frontier = [&](const std::string& path) {
    const TrialLog prior = read_nonempty_log(path);
    if (prior.context.dataset_hash != dataset_hash) {
      throw InvalidArgument(path + ": log was recorded on a different dataset");
    }
    const auto pts = points_of(prior);
    return build_frontier(pts);
  };
  if (!t.bounds_from.empty()) {
    if (t.cr_window.size() != 2) throw InvalidArgument("--bounds-from needs --cr-window LOW HIGH");
    const ParetoFrontier frontier = prior_frontier(t.bounds_from);
    bounds = compute_bounds(frontier, t.cr_window[0], t.cr_window[1]);
    if (t.fitness_from.empty() && frontier.size() >= 3) fitness = fit_fitness(frontier);
  }
  if (!t.fitness_from.empty()) fitness = fit_fitness(prior_frontier(t.fitness_from));

  auto extra = s.describe(g);
  if (fitness) {
    extra.emplace_back("fitness", fmt(fitness->a) + " " + fmt(fitness->b) + " " + fmt(fitness->c));
  }
  const std::string header = effective_config(app, sub, extra);
  std::cout << header;

  fs::create_directories(t.out);
  {
    std::ofstream cfg(fs::path(t.out) / "config.txt");
    cfg << header;
  }
  const fs::path log_path = fs::path(t.out) / "trials.jsonl";
  TrialLogWriter writer(log_path, {g.seed, dataset_hash, s.evaluator->id(), s.options.encode.id()});

  ParetoFrontier frontier;
  std::vector<Trial> trials;
  if (strategy == Strategy::kStandard) {
    for (EvalPoint p : standard_sweep(*s.dataset, *s.evaluator, s.options)) {
      Trial trial;
      trial.point = std::move(p);
      trial.improved_frontier = frontier.insert(trial.point) == InsertVerdict::kAdded;
      if (fitness) {
        trial.y = fitness_residual(trial.point, *fitness);
        trial.good = good_point(trial.point, *fitness);
      }
      writer.append(trial);
      trials.push_back(std::move(trial));
    }
  } else {
    auto proposer = make_proposer(strategy, t, g.seed, bounds, fitness, default_bands());
    DatasetObjective objective(*s.dataset, *s.evaluator, s.options);
    RunOptions run;
    run.n_trials = t.trials;
    run.fitness = fitness;
    run.stop_after_good = t.stop_after_good;
    run.batch = t.batch;
    run.threads = g.threads;
    RunResult result = run_search(*proposer, objective, run, [&](const Trial& tr) { writer.append(tr); });
    frontier = std::move(result.frontier);
    trials = std::move(result.trials);
  }

  write_frontier_csv(fs::path(t.out) / "frontier.csv", frontier.points());
  std::cout << "trials=" << trials.size() << '\n'
            << "log=" << log_path.string() << '\n'
            << "frontier_size=" << frontier.size() << '\n';
  for (const EvalPoint& p : frontier.points()) {
    std::cout << "frontier " << p.trial_index << ' ' << fmt(p.compression_rate) << ' ' << fmt(p.accuracy)
              << '\n';
  }
  if (fitness) {
    int good = 0;
    for (const Trial& tr : trials) good += tr.good;
    std::cout << "good_points=" << good << '\n';
  }
  return 0;
}

struct NamedLog {
  std::string method;
  std::string path;
  TrialLog log;
};

// Logs given as PATH or METHOD=PATH; all must share one dataset.
std::vector<NamedLog> load_logs(const std::vector<std::string>& specs) {
  if (specs.empty()) throw InvalidArgument("no trial logs given");
  std::vector<NamedLog> logs;
  for (const std::string& spec : specs) {
    NamedLog n;
    const auto eq = spec.find('=');
    n.path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    n.log = read_nonempty_log(n.path);
    n.method = eq == std::string::npos ? to_string(n.log.trials.front().point.strategy) : spec.substr(0, eq);
    if (!logs.empty() && n.log.context.dataset_hash != logs.front().log.context.dataset_hash) {
      throw InvalidArgument(n.path + ": dataset hash " + n.log.context.dataset_hash + " differs from " +
                            logs.front().path + " (" + logs.front().log.context.dataset_hash + ")");
    }
    logs.push_back(std::move(n));
  }
  return logs;
}

std::string stars(double p) {
  if (p < 1e-11) return "**";
  if (p < 1e-5) return "*";
  return "";
}

class OutputFile {
 public:
  explicit OutputFile(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish(const std::string& path) {
    stream().flush();
    if (!stream()) throw IoError("failed to write " + (path.empty() ? std::string("stdout") : path));
  }

 private:
  std::ofstream file_;
};

void check_session_matches(const Session& s, const std::vector<NamedLog>& logs) {
  const auto& ctx = logs.front().log.context;
  if (ctx.dataset_hash != s.dataset->hash()) {
    throw InvalidArgument("--manifest dataset differs from the dataset recorded in the logs");
  }
  for (const NamedLog& n : logs) {
    if (n.log.context.encode_id != s.options.encode.id()) {
      throw InvalidArgument(n.path + ": recorded with encode settings " + n.log.context.encode_id);
    }
  }
}

int cmd_report(const GlobalOptions& g, const CLI::App& app, const CLI::App& sub, const DataOptions& d,
               const ReportOptions& r) {
  const std::vector<NamedLog> logs = load_logs(r.logs);
  const bool needs_data = r.mode == "pareto" || r.mode == "significance";
  std::unique_ptr<Session> session;
  std::vector<std::pair<std::string, std::string>> extra;
  if (needs_data) {
    if (d.manifest.empty()) throw InvalidArgument("report " + r.mode + " needs --manifest");
    session = std::make_unique<Session>(g, d);
    check_session_matches(*session, logs);
    extra = session->describe(g);
  }
  std::cerr << effective_config(app, sub, extra);
  std::ostringstream os;

  if (r.mode == "pareto") {
    os << "method,trial,compression_rate,accuracy,qtable\n";
    for (const NamedLog& n : logs) {
      const ParetoFrontier frontier = build_frontier(points_of(n.log));
      for (const EvalPoint& p : frontier.points()) {
        os << n.method << ',' << p.trial_index << ',' << fmt(p.compression_rate) << ',' << fmt(p.accuracy)
           << ',' << p.qtable.hex() << '\n';
      }
    }
    for (const EvalPoint& p : standard_sweep(*session->dataset, *session->evaluator, session->options)) {
      os << "standard-q" << p.trial_index << ',' << p.trial_index << ',' << fmt(p.compression_rate) << ','
         << fmt(p.accuracy) << ',' << p.qtable.hex() << '\n';
    }
  } else if (r.mode == "significance") {
    Session& s = *session;
    ResamplePlan plan;
    plan.n_resamples = r.resamples;
    plan.images_per_class = r.images_per_class;
    plan.seed = g.seed;
    {
      std::map<int, int> per_class;
      for (const auto& item : s.dataset->items()) ++per_class[item.label];
      int eligible = 0;
      for (const auto& [label, count] : per_class) eligible += count >= plan.images_per_class;
      plan.classes_per_sample = std::min(r.classes_per_sample, eligible);
    }
    std::cerr << "# resample_classes_per_sample=" << plan.classes_per_sample << '\n';
    const auto resamples = resample_indices(*s.dataset, plan);
    const EvalOutcome base = evaluate(*s.dataset, standard_tables(50), *s.evaluator, s.options);
    const auto base_acc = resample_accuracies(base.correct, resamples);
    os << "method,trial,compression_rate,baseline_rate,mean_diff,t,p,stars\n";
    for (const NamedLog& n : logs) {
      const auto pts = points_of(n.log);
      const ParetoFrontier frontier = build_frontier(pts);
      const auto pick = closest_larger_rate(frontier.points(), base.point.compression_rate);
      if (!pick) {
        os << n.method << ",,,," << fmt(base.point.compression_rate) << ",,,,\n";
        continue;
      }
      const EvalOutcome e = evaluate(*s.dataset, pick->qtable, *s.evaluator, s.options);
      const auto acc = resample_accuracies(e.correct, resamples);
      const TTestResult t = two_sample_t(acc, base_acc);
      os << n.method << ',' << pick->trial_index << ',' << fmt(pick->compression_rate) << ','
         << fmt(base.point.compression_rate) << ',' << fmt(t.mean_diff) << ',' << fmt(t.t_statistic) << ','
         << fmt(t.p_value) << ',' << stars(t.p_value) << '\n';
    }
  } else if (r.mode == "efficiency") {
    FitnessCurve fitness;
    if (!r.fitness_from.empty()) {
      const auto pts = points_of(read_nonempty_log(r.fitness_from));
      fitness = fit_fitness(build_frontier(pts));
    } else {
      std::vector<EvalPoint> all;
      for (const NamedLog& n : logs) {
        for (const Trial& t : n.log.trials) all.push_back(t.point);
      }
      fitness = fit_fitness(build_frontier(all));
    }
    std::cerr << "# fitness=" << fmt(fitness.a) << ' ' << fmt(fitness.b) << ' ' << fmt(fitness.c) << '\n';
    os << "method,decision_time,trials_to_" << r.k << "_good\n";
    for (const NamedLog& n : logs) {
      const EfficiencyReport e = profile_strategy(n.log.trials, fitness, r.k);
      os << n.method << ',' << fmt(e.mean_decision_seconds) << ','
         << (e.trials_to_k_good ? std::to_string(*e.trials_to_k_good) : std::string("not reached")) << '\n';
    }
  } else if (r.mode == "psnr") {
    os << "method,trial,compression_rate,accuracy,mean_psnr\n";
    bool any = false;
    for (const NamedLog& n : logs) {
      for (const Trial& t : n.log.trials) {
        if (!t.point.mean_psnr) continue;
        any = true;
        os << n.method << ',' << t.point.trial_index << ',' << fmt(t.point.compression_rate) << ','
           << fmt(t.point.accuracy) << ',' << fmt(*t.point.mean_psnr) << '\n';
      }
    }
    if (!any) throw InvalidArgument("no trial carries a PSNR value; rerun tune with --psnr");
  } else {
    throw InvalidArgument("unknown report mode " + r.mode);
  }
  OutputFile out(r.out);
  out.stream() << os.str();
  out.finish(r.out);
  return 0;
}

int cmd_pareto(const CLI::App& app, const CLI::App& sub, const std::vector<std::string>& specs,
               const std::string& out) {
  const std::vector<NamedLog> logs = load_logs(specs);
  std::cerr << effective_config(app, sub, {});
  std::vector<EvalPoint> all;
  for (const NamedLog& n : logs) {
    for (const Trial& t : n.log.trials) all.push_back(t.point);
  }
  const ParetoFrontier frontier = build_frontier(all);
  if (out.empty()) {
    write_frontier_csv(std::cout, frontier.points());
  } else {
    write_frontier_csv(out, frontier.points());
  }
  return 0;
}

}  // namespace
}  // namespace qtab

int main(int argc, char** argv) {
  using namespace qtab;
  CLI::App app{"JPEG quantization table tuning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--cache-dir", g.cache_dir, "evaluation cache directory (default: $QTAB_CACHE_DIR)");

  SyntheticCorpusSpec spec;
  std::string corpus_out;
  auto* gen = app.add_subcommand("gen-corpus", "write the synthetic proxy-classifier corpus");
  gen->add_option("--out", corpus_out, "output directory")->required();
  gen->add_option("--classes", spec.n_classes, "number of classes");
  gen->add_option("--per-class", spec.images_per_class, "images per class");
  gen->add_option("--width", spec.width, "image width (multiple of 8)");
  gen->add_option("--height", spec.height, "image height (multiple of 8)");

  DataOptions compress_data;
  TableChoice compress_table;
  std::string compress_out;
  auto* compress = app.add_subcommand("compress", "encode a dataset and report its compression rate");
  add_data_options(compress, compress_data, false);
  add_table_choice(compress, compress_table);
  compress->add_option("--out", compress_out, "directory for the JPEG streams");

  DataOptions eval_data;
  TableChoice eval_table;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compression rate and accuracy of one table");
  add_data_options(evaluate_cmd, eval_data, true);
  add_table_choice(evaluate_cmd, eval_table);

  DataOptions tune_data;
  TuneOptions tune;
  auto* tune_cmd = app.add_subcommand("tune", "run a search strategy and log every trial");
  add_data_options(tune_cmd, tune_data, true);
  tune_cmd->add_option("--strategy", tune.strategy,
                       "standard | sorted-random | uniform-random | bounded-random | bayesopt | composite");
  tune_cmd->add_option("--trials", tune.trials, "trial budget")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--out", tune.out, "output directory")->required();
  tune_cmd->add_option("--bounds-from", tune.bounds_from, "prior trial log for bounds")->check(CLI::ExistingFile);
  tune_cmd->add_option("--cr-window", tune.cr_window, "compression-rate window LOW HIGH")->expected(2);
  tune_cmd->add_option("--fitness-from", tune.fitness_from, "prior trial log for the fitness curve")
      ->check(CLI::ExistingFile);
  tune_cmd->add_option("--range", tune.range, "fixed sorted-random range START END")->expected(2);
  tune_cmd->add_flag("--descending", tune.descending, "sorted-random with large quantizers first");
  tune_cmd->add_option("--stop-after-good", tune.stop_after_good, "stop after this many good points");
  tune_cmd->add_option("--batch", tune.batch, "concurrent proposals for the random strategies")
      ->check(CLI::PositiveNumber);
  tune_cmd->add_option("--bo-init", tune.bo.n_init, "uniform candidates per proposal");
  tune_cmd->add_option("--bo-rounds", tune.bo.n_rounds, "local grid rounds");
  tune_cmd->add_option("--bo-indices", tune.bo.n_indices, "positions varied per round");
  tune_cmd->add_option("--bo-grid-levels", tune.bo.grid_levels, "values per varied position");
  tune_cmd->add_option("--bo-local-grid", tune.bo.use_local_grid, "enable the local grid search");
  tune_cmd->add_option("--window", tune.window, "bandit sliding window");
  tune_cmd->add_option("--arms", tune.arms, "bandit arms: pso sa de greedy nelder-mead");

  DataOptions report_data;
  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "CSV summaries over trial logs");
  report_cmd->add_option("--mode", report.mode, "pareto | significance | efficiency | psnr")
      ->check(CLI::IsMember({"pareto", "significance", "efficiency", "psnr"}));
  report_cmd->add_option("logs", report.logs, "trial logs, as PATH or METHOD=PATH")->required();
  report_cmd->add_option("--out", report.out, "output CSV (default: stdout)");
  report_cmd->add_option("--manifest", report_data.manifest, "dataset manifest (pareto, significance)");
  report_cmd->add_option("--evaluator", report_data.evaluator, "evaluator spec");
  report_cmd->add_option("--subsampling", report_data.subsampling, "chroma subsampling: 420 or 444");
  report_cmd->add_option("--chroma", report_data.chroma, "chroma table: same or standard");
  report_cmd->add_option("--fitness-from", report.fitness_from, "trial log for the fitness curve (efficiency)");
  report_cmd->add_option("--k", report.k, "good points to reach (efficiency)")->check(CLI::PositiveNumber);
  report_cmd->add_option("--resamples", report.resamples, "resampled datasets (significance)");
  report_cmd->add_option("--classes-per-sample", report.classes_per_sample,
                         "classes per resample, capped at the eligible classes");
  report_cmd->add_option("--images-per-class", report.images_per_class, "images per class per resample");

  std::vector<std::string> pareto_logs;
  std::string pareto_out;
  auto* pareto_cmd = app.add_subcommand("pareto", "merged Pareto frontier of trial logs as CSV");
  pareto_cmd->add_option("logs", pareto_logs, "trial logs")->required();
  pareto_cmd->add_option("--out", pareto_out, "output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_corpus(g, app, *gen, spec, corpus_out);
    if (*compress) return cmd_compress(g, app, *compress, compress_data, compress_table, compress_out);
    if (*evaluate_cmd) return cmd_evaluate(g, app, *evaluate_cmd, eval_data, eval_table);
    if (*tune_cmd) return cmd_tune(g, app, *tune_cmd, tune_data, tune);
    if (*report_cmd) return cmd_report(g, app, *report_cmd, report_data, report);
    if (*pareto_cmd) return cmd_pareto(app, *pareto_cmd, pareto_logs, pareto_out);
  } catch (const qtab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

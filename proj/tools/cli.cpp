#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "logsieve/config.hpp"
#include "logsieve/datagen.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/filter.hpp"
#include "logsieve/metrics.hpp"
#include "logsieve/model.hpp"
#include "logsieve/parallel.hpp"
#include "logsieve/parser.hpp"
#include "logsieve/privacy.hpp"
#include "logsieve/tokenizer.hpp"

namespace logsieve::cli {

namespace {

namespace fs = std::filesystem;

// Flag values left unset fall through to the config file, then to the
// defaults (or, for filter and eval, to the model's own config).
struct ConfigFlags {
  std::optional<double> alpha, beta, jaccard_threshold, coverage, file_presence;
  std::optional<std::size_t> permutations, shingle_n, max_iterations;
  std::optional<std::uint64_t> gamma, seed;
  std::string config_path;

  void add(CLI::App& app) {
    const Config d;
    auto def = [](auto v) {
      std::ostringstream s;
      s << " (default " << v << ")";
      return s.str();
    };
    app.add_option("--config", config_path, "JSON config file with Config field names")
        ->check(CLI::ExistingFile);
    app.add_option("--alpha", alpha, "alpha: LCS match fraction" + def(d.alpha));
    app.add_option("--beta", beta, "beta: column mode fraction for constants" + def(d.beta));
    app.add_option("--gamma", gamma,
                   "gamma: frequency filter, absolute occurrence count" + def(d.gamma));
    app.add_option("--jaccard-threshold", jaccard_threshold,
                   "jaccard_threshold: LSH target similarity" + def(d.jaccard_threshold));
    app.add_option("--permutations", permutations,
                   "num_permutations: minhash permutations" + def(d.num_permutations));
    app.add_option("--shingle-n", shingle_n, "shingle_n: token shingle width" + def(d.shingle_n));
    app.add_option("--coverage", coverage,
                   "coverage_fraction: share of lines the selected patterns cover" +
                       def(d.coverage_fraction));
    app.add_option("--file-presence", file_presence,
                   "file_presence_fraction: keep patterns found in this share of files" +
                       def(d.file_presence_fraction));
    app.add_option("--max-iterations", max_iterations,
                   "max_iterations: cap on reduction passes" + def(d.max_iterations));
    app.add_option("--seed", seed, "seed" + def(d.seed));
  }

  Config resolve(Config base) const {
    Config c = config_path.empty() ? base : load_config_file(config_path, base);
    if (alpha) c.alpha = *alpha;
    if (beta) c.beta = *beta;
    if (gamma) c.gamma = *gamma;
    if (jaccard_threshold) c.jaccard_threshold = *jaccard_threshold;
    if (permutations) c.num_permutations = *permutations;
    if (shingle_n) c.shingle_n = *shingle_n;
    if (coverage) c.coverage_fraction = *coverage;
    if (file_presence) c.file_presence_fraction = *file_presence;
    if (max_iterations) c.max_iterations = *max_iterations;
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  }
};

struct BloomFlags {
  std::optional<std::size_t> bits, hashes;

  void add(CLI::App& app) {
    const BloomConfig d;
    app.add_option("--bloom-bits", bits,
                   "bloom bitmap width m, power of two (default " + std::to_string(d.m) + ")");
    app.add_option("--bloom-hashes", hashes,
                   "bloom positions per shingle k (default " + std::to_string(d.k) + ")");
  }

  BloomConfig resolve(const Config& cfg) const {
    BloomConfig b;
    if (bits) b.m = *bits;
    if (hashes) b.k = *hashes;
    b.shingle_n = cfg.shingle_n;
    b.seed = cfg.seed;
    b.validate();
    return b;
  }
};

class StageLog {
 public:
  explicit StageLog(std::ostream& err) : err_(err) {}
  void start() { t_ = std::chrono::steady_clock::now(); }
  void done(std::string_view stage, nlohmann::json extra = nlohmann::json::object()) {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_).count();
    extra["stage"] = stage;
    extra["seconds"] = s;
    err_ << extra.dump() << '\n';
    start();
  }

 private:
  std::ostream& err_;
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

// Regular files named directly, plus the regular files of named
// directories in sorted order.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(in, ec))
        if (e.is_regular_file()) files.push_back(e.path().string());
      if (ec) throw InputError("cannot list directory " + in + ": " + ec.message());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::is_regular_file(in, ec)) {
      out.push_back(in);
    } else {
      throw InputError("input not found: " + in);
    }
  }
  return out;
}

std::vector<std::vector<std::string>> read_inputs(const std::vector<std::string>& inputs,
                                                  std::istream& in, unsigned workers) {
  if (inputs.empty() || (inputs.size() == 1 && inputs[0] == "-"))
    return {read_lines(in)};
  const auto files = expand_inputs(inputs);
  if (files.empty()) throw InputError("no input files found");
  std::vector<std::vector<std::string>> out(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) { out[i] = read_lines_from_file(files[i]); });
  return out;
}

// Writes to the --out file, or to `out` when none was given.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(out);
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path);
  fn(f);
  if (!f) throw InputError("failed writing " + path);
}

unsigned resolve_workers(unsigned w) { return w == 0 ? default_workers() : w; }

int cmd_train(const ConfigFlags& flags, const std::vector<std::string>& inputs,
              const std::string& out_path, unsigned workers, std::istream& in,
              std::ostream& out, std::ostream& err) {
  StageLog log(err);
  const Config cfg = flags.resolve(Config{});
  const auto files = read_inputs(inputs, in, workers);
  log.done("read", {{"files", files.size()}});

  std::vector<PatternCounts> counts(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) { counts[i] = preprocess_lines(files[i]); });
  std::uint64_t lines = 0, unique = 0;
  for (const auto& c : counts) lines += c.source_lines + c.blank_lines;
  {
    PatternCounts all;
    for (const auto& c : counts) all.merge(c);
    unique = all.entries.size();
  }
  log.done("preprocess", {{"lines", lines}, {"unique_patterns", unique}});

  const ParseResult result = parse(counts, cfg, workers);
  log.done("parse", {{"trace", result.trace}, {"converged", result.converged}});
  if (result.patterns.empty()) throw InputError("no parsable lines in the input");

  const PatternModel model = select_patterns(result.patterns, cfg);
  log.done("select", {{"patterns", model.size()}});
  emit(out_path, out, [&](std::ostream& o) { o << serialize_model(model); });
  log.done("write");
  return kExitOk;
}

std::optional<EncodingStore> load_store(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return store_from_file(load_encodings(path));
}

int cmd_filter(const ConfigFlags& flags, const std::string& model_path,
               const std::string& enc_path, const std::vector<std::string>& inputs,
               const std::string& out_path, unsigned workers, std::istream& in,
               std::ostream& out, std::ostream& err) {
  StageLog log(err);
  const PatternModel model = load_model(model_path);
  const Config cfg = flags.resolve(model.config());
  const auto store = load_store(enc_path);
  log.done("load", {{"patterns", model.size()}, {"encodings", store ? store->size() : 0}});

  std::vector<std::string> lines;
  for (auto& f : read_inputs(inputs, in, workers))
    lines.insert(lines.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
  log.done("read", {{"lines", lines.size()}});

  const FilterReport report = filter_lines(model, store ? &*store : nullptr, lines, cfg, workers);
  log.done("filter", summary_json(report.totals));
  emit(out_path, out, [&](std::ostream& o) { write_report(report, o); });
  return kExitOk;
}

int cmd_eval(const ConfigFlags& flags, const std::string& model_path,
             const std::vector<std::string>& inputs, const std::string& out_path,
             bool terms, unsigned workers, std::istream& in, std::ostream& out,
             std::ostream& err) {
  StageLog log(err);
  const PatternModel model = load_model(model_path);
  const Config cfg = flags.resolve(model.config());
  log.done("load", {{"patterns", model.size()}});
  EvalReport report;
  if (inputs.empty()) {
    report = evaluate_stored(model);
  } else {
    std::vector<std::string> lines;
    for (auto& f : read_inputs(inputs, in, workers))
      lines.insert(lines.end(), std::make_move_iterator(f.begin()),
                   std::make_move_iterator(f.end()));
    report = evaluate(model, lines, cfg, workers);
  }
  log.done("eval");
  emit(out_path, out, [&](std::ostream& o) { o << to_json(report, terms).dump() << '\n'; });
  return kExitOk;
}

int cmd_encode(const ConfigFlags& flags, const BloomFlags& bloom,
               const std::string& model_path, const std::string& enc_path,
               const std::vector<std::string>& inputs, const std::string& out_path,
               unsigned workers, std::istream& in, std::ostream& out, std::ostream& err) {
  StageLog log(err);
  std::optional<PatternModel> model;
  if (!model_path.empty()) model.emplace(load_model(model_path));
  const Config cfg = flags.resolve(model ? model->config() : Config{});
  const BloomConfig bc = bloom.resolve(cfg);
  const auto store = load_store(enc_path);
  if (store && !(store->config() == bc))
    throw UsageError("--encodings store uses a different bloom configuration");

  EncodingFile file{bc, std::nullopt, {}};
  if (inputs.empty()) {
    if (!model) throw UsageError("encode needs --in, --model or both");
    for (const auto& mp : model->patterns())
      file.encodings.push_back(encode_pattern(mp.pattern, bc, std::max<std::uint64_t>(1, mp.frequency)));
  } else {
    PatternCounts counts;
    for (const auto& f : read_inputs(inputs, in, workers)) counts.merge(preprocess_lines(f));
    std::vector<std::pair<Pattern, std::uint64_t>> unique(counts.entries.begin(),
                                                           counts.entries.end());
    std::sort(unique.begin(), unique.end());
    std::vector<char> keep(unique.size(), 1);
    parallel_for(unique.size(), workers, [&](std::size_t i) {
      const Pattern& p = unique[i].first;
      if (model && match_pattern(*model, p, cfg.alpha)) keep[i] = 0;
      else if (store && match_encoded(*store, p)) keep[i] = 0;
    });
    for (std::size_t i = 0; i < unique.size(); ++i)
      if (keep[i]) file.encodings.push_back(encode_pattern(unique[i].first, bc, unique[i].second));
  }
  log.done("encode", {{"encodings", file.encodings.size()}});
  emit(out_path, out, [&](std::ostream& o) { o << serialize_encodings(file); });
  return kExitOk;
}

int cmd_aggregate(const std::vector<std::string>& inputs, const std::string& out_path,
                  std::optional<double> coverage, double threshold, std::ostream& out,
                  std::ostream& err) {
  StageLog log(err);
  if (inputs.empty()) throw UsageError("aggregate needs --in");
  const auto files = expand_inputs(inputs);
  if (files.empty()) throw InputError("no encoding files found");
  std::vector<Submission> subs;
  std::optional<BloomConfig> reference;
  for (const auto& path : files) {
    EncodingFile f = load_encodings(path);
    if (!reference) reference = f.config;
    const std::string client = fs::path(path).filename().string();
    for (auto& e : f.encodings) subs.push_back({std::move(e), client});
    // A client file with no encodings still has to agree on the config.
    if (f.encodings.empty() && !(f.config == *reference))
      throw UsageError("bloom configuration differs for clients: " + client);
  }
  log.done("read", {{"files", files.size()}, {"submissions", subs.size()}});
  StoreOptions opts;
  opts.match_threshold = threshold;
  const EncodingStore store = aggregate(subs, *reference, coverage.value_or(1.0), opts);
  log.done("aggregate", {{"encodings", store.size()}});
  emit(out_path, out, [&](std::ostream& o) { o << serialize_encodings(to_file(store)); });
  return kExitOk;
}

struct GenFlags {
  DatasetSpec spec;
  std::size_t corpus_lines = 0;
  std::string out_dir;
};

int cmd_gen(const GenFlags& g, unsigned workers, std::ostream& err) {
  StageLog log(err);
  if (g.out_dir.empty()) throw UsageError("gen-data needs --out");
  const Dataset ds = g.corpus_lines > 0
                         ? generate_corpus(g.spec.template_count, g.corpus_lines, g.spec.seed,
                                           g.spec.templates, g.spec.zipf_s)
                         : generate_dataset(g.spec, workers);
  log.done("generate", {{"templates", ds.templates.size()},
                        {"success", ds.success_count()},
                        {"train_files", ds.train.size()},
                        {"test_files", ds.test.size()}});
  write_dataset(ds, g.out_dir);
  log.done("write");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Log pattern extraction and anomaly filtering", "logsieve"};
  app.require_subcommand(1);

  ConfigFlags cfg_flags;
  BloomFlags bloom_flags;
  std::vector<std::string> inputs;
  std::string out_path, model_path, enc_path;
  unsigned workers = 0;
  bool terms = false;
  std::optional<double> agg_coverage;
  double server_threshold = StoreOptions{}.match_threshold;
  GenFlags gen;

  auto common = [&](CLI::App* sub, const char* in_help) {
    sub->add_option("--in", inputs, in_help);
    sub->add_option("--out", out_path, "output path, stdout when omitted");
    sub->add_option("--workers", workers, "worker threads (default: available cores)");
  };

  auto* train = app.add_subcommand("train", "learn a pattern model from log files");
  common(train, "log files or directories");
  cfg_flags.add(*train);

  auto* filter = app.add_subcommand("filter", "report anomalous lines");
  common(filter, "log files or directories, '-' or nothing for stdin");
  filter->add_option("--model", model_path, "model file")->required();
  filter->add_option("--encodings", enc_path, "aggregated encoding store");
  cfg_flags.add(*filter);

  auto* eval = app.add_subcommand("eval", "quality loss of a model");
  common(eval, "logs to re-match; stored training stats when omitted");
  eval->add_option("--model", model_path, "model file")->required();
  eval->add_flag("--terms", terms, "include per-pattern terms");
  cfg_flags.add(*eval);

  auto* encode = app.add_subcommand("encode", "write bloom encodings of patterns");
  common(encode, "logs whose patterns to encode (those matched by --model are skipped)");
  encode->add_option("--model", model_path, "model file");
  encode->add_option("--encodings", enc_path, "store whose patterns to skip");
  cfg_flags.add(*encode);
  bloom_flags.add(*encode);

  auto* agg = app.add_subcommand("aggregate", "merge client encoding files into a store");
  agg->add_option("--in", inputs, "encoding files or directories")->required();
  agg->add_option("--out", out_path, "store path (stdout when omitted)");
  agg->add_option("--coverage", agg_coverage, "coverage_fraction over merged blocks (default 1)");
  agg->add_option("--server-threshold", server_threshold,
                  "bitmap Jaccard to merge and to match (default 0.9)");

  auto* gd = app.add_subcommand("gen-data", "write a synthetic corpus with ground truth");
  gd->add_option("--out", gen.out_dir, "output directory")->required();
  gd->add_option("--templates", gen.spec.template_count, "template count")->capture_default_str();
  gd->add_option("--success-fraction", gen.spec.success_fraction, "success template share")
      ->capture_default_str();
  gd->add_option("--files", gen.spec.files_per_split, "files per split")->capture_default_str();
  gd->add_option("--lines", gen.spec.lines_per_file, "lines per file")->capture_default_str();
  gd->add_option("--universal-fraction", gen.spec.universal_fraction,
                 "success templates present in every training file")
      ->capture_default_str();
  gd->add_option("--zipf", gen.spec.zipf_s, "template frequency skew, 0 for uniform")
      ->capture_default_str();
  gd->add_option("--corpus-lines", gen.corpus_lines,
                 "write one training corpus of this many lines instead of splits");
  gd->add_option("--seed", gen.spec.seed, "seed")->capture_default_str();
  gd->add_option("--workers", workers, "worker threads (default: available cores)");

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    // Help requests print the usage of the subcommand they were given to.
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    workers = resolve_workers(workers);
    if (train->parsed()) return cmd_train(cfg_flags, inputs, out_path, workers, in, out, err);
    if (filter->parsed())
      return cmd_filter(cfg_flags, model_path, enc_path, inputs, out_path, workers, in, out, err);
    if (eval->parsed())
      return cmd_eval(cfg_flags, model_path, inputs, out_path, terms, workers, in, out, err);
    if (encode->parsed())
      return cmd_encode(cfg_flags, bloom_flags, model_path, enc_path, inputs, out_path, workers,
                        in, out, err);
    if (agg->parsed())
      return cmd_aggregate(inputs, out_path, agg_coverage, server_threshold, out, err);
    if (gd->parsed()) return cmd_gen(gen, workers, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace logsieve::cli

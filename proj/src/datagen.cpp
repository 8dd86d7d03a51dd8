#include "logsieve/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string_view>

#include "logsieve/errors.hpp"
#include "logsieve/hash.hpp"
#include "logsieve/parallel.hpp"
#include "logsieve/tokenizer.hpp"

namespace logsieve {

namespace {

constexpr std::string_view kLevels[] = {"INFO", "WARN", "ERROR", "DEBUG"};

constexpr std::string_view kComponents[] = {
    "BlockManager", "TaskSetManager", "Executor", "DAGScheduler", "SparkContext",
    "MemoryStore", "ShuffleMapStage", "ContextHandler", "HiveMetaStore", "QueryPlanner",
    "SessionState", "ResourceManager", "NodeManager", "ContainerLauncher", "Dispatcher",
    "RpcEndpoint", "TransportClient", "StorageLevel", "CacheTracker", "MapOutputTracker",
    "JobScheduler", "CoarseGrained", "YarnAllocator", "Coordinator", "SplitReader",
    "OrcReader", "ParquetWriter", "HttpServer", "SecurityManager", "Authenticator",
    "MetricsSystem", "Checkpointer", "Compactor", "LeaseRenewer", "DataStreamer",
    "NameNode", "DataNode", "Balancer", "Replicator", "Planner"};

constexpr std::string_view kWords[] = {
    "started", "finished", "registering", "removing", "added", "lost", "stopping",
    "starting", "waiting", "submitting", "running", "completed", "failed", "retrying",
    "dropping", "reading", "writing", "opening", "closing", "flushing", "committing",
    "aborting", "scheduling", "launching", "killing", "acquired", "released", "granted",
    "denied", "rejected", "accepted", "connected", "disconnected", "timed", "expired",
    "renewed", "refreshed", "loaded", "unloaded", "cached", "evicted", "spilled",
    "merged", "sorted", "split", "planned", "optimized", "compiled", "parsed", "resolved",
    "task", "stage", "block", "broadcast", "shuffle", "partition", "executor", "driver",
    "worker", "master", "container", "application", "attempt", "session", "query",
    "table", "column", "index", "segment", "region", "server", "client", "request",
    "response", "handler", "listener", "thread", "pool", "queue", "buffer", "memory",
    "disk", "file", "directory", "stream", "channel", "socket", "endpoint", "address",
    "lease", "token", "ticket", "credential", "policy", "schema", "database", "catalog",
    "snapshot", "checkpoint", "offset", "record", "batch", "job", "operator", "plan",
    "metric", "gauge", "counter", "timer", "heartbeat", "status", "state", "event",
    "message", "payload", "header", "version", "config", "property", "value", "limit",
    "quota", "size", "capacity", "usage", "bytes", "rows", "tasks", "stages", "blocks",
    "locality", "preferred", "remote", "local", "global", "pending", "active", "idle",
    "dead", "alive", "healthy", "unhealthy", "stale", "fresh", "partial", "complete",
    "empty", "full", "missing", "duplicate", "invalid", "unknown", "default", "custom",
    "primary", "secondary", "internal", "external", "temporary", "persistent", "shared",
    "exclusive", "read", "write", "for", "from", "with", "without", "on", "at", "in",
    "into", "to", "by", "after", "before", "during", "until", "while", "because", "due",
    "of", "is", "was", "has", "been", "not", "no", "new", "old", "current", "previous",
    "next", "last", "first", "total", "max", "min", "avg", "using", "via", "over", "under",
    "above", "below", "within", "across", "between", "ms", "seconds", "times", "host",
    "port", "user", "group", "role", "owner", "node"};

constexpr std::string_view kNumberPrefixes[] = {"blk_", "task_", "attempt_",
                                                              "container_", "id=", "tid="};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t next() { return gen_(); }
  // Uniform in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

std::string word(Rng& rng) { return std::string(kWords[rng.below(std::size(kWords))]); }

std::vector<std::string> distinct_words(Rng& rng, std::size_t n) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w = word(rng);
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::string canonical(const TemplatePart& part) {
  if (!part.is_slot) return part.text;
  switch (part.kind) {
    case SlotKind::kNumber: return part.text + "0";
    case SlotKind::kHex: return "0x0";
    case SlotKind::kPath: return "/p/q";
    default: return std::string(kWildcardText);
  }
}

std::string timestamp(Rng& rng) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "17/06/%02zu %02zu:%02zu:%02zu", rng.between(1, 28),
                rng.below(24), rng.below(60), rng.below(60));
  return buf;
}

std::string fill(const TemplatePart& part, Rng& rng) {
  if (!part.is_slot) return part.text;
  switch (part.kind) {
    case SlotKind::kNumber:
      // Prefixed ids stay short; a long run of digits after a prefix reads
      // as an encoded blob.
      if (!part.text.empty()) return part.text + std::to_string(rng.below(100000));
      return std::to_string(rng.chance(0.2) ? rng.below(100000000) : rng.below(10000));
    case SlotKind::kHex: {
      static constexpr char kHexDigits[] = "0123456789abcdef";
      std::string s = "0x";
      for (int i = 0; i < 8; ++i) s.push_back(kHexDigits[rng.below(16)]);
      return s;
    }
    case SlotKind::kPath: {
      std::string s = rng.chance(0.3) ? "hdfs://" + word(rng) + ":8020" : "";
      const std::size_t depth = rng.between(2, 4);
      for (std::size_t i = 0; i < depth; ++i) s += "/" + word(rng);
      return s;
    }
    case SlotKind::kWord:
    case SlotKind::kPhrase: return part.pool[rng.below(part.pool.size())];
  }
  return {};
}

std::string instantiate(const LogTemplate& t, bool timestamps, Rng& rng) {
  std::string line = timestamps ? timestamp(rng) : std::string();
  for (const auto& part : t.parts) {
    if (!line.empty()) line.push_back(' ');
    line += fill(part, rng);
  }
  return line;
}

LogTemplate make_template(const TemplateOptions& opts, Rng& rng) {
  LogTemplate t;
  const std::size_t len = rng.between(opts.min_words, opts.max_words);
  const std::size_t slots =
      rng.between(opts.min_slots, std::min(opts.max_slots, len - 2));

  t.parts.push_back({false, std::string(kLevels[rng.below(std::size(kLevels))]), {}, {}});
  std::string comp(kComponents[rng.below(std::size(kComponents))]);
  t.parts.push_back({false, comp + ":", {}, {}});
  for (std::size_t i = 2; i < len; ++i) {
    std::string w = word(rng);
    if (rng.chance(0.08)) w.push_back(rng.chance(0.5) ? ',' : ':');
    t.parts.push_back({false, std::move(w), {}, {}});
  }

  std::vector<std::size_t> positions;
  for (std::size_t i = 2; i < len; ++i) positions.push_back(i);
  rng.shuffle(positions);
  bool text_slot_used = len < opts.min_words_for_text;
  for (std::size_t s = 0; s < slots; ++s) {
    TemplatePart& part = t.parts[positions[s]];
    part.is_slot = true;
    part.text.clear();
    const double r = text_slot_used ? rng.unit() * 0.65 : rng.unit();
    if (r >= 0.65) text_slot_used = true;
    if (r < 0.35) {
      part.kind = SlotKind::kNumber;
      if (rng.chance(0.3)) part.text = kNumberPrefixes[rng.below(std::size(kNumberPrefixes))];
    } else if (r < 0.5) {
      part.kind = SlotKind::kHex;
    } else if (r < 0.65) {
      part.kind = SlotKind::kPath;
    } else if (rng.chance(opts.phrase_fraction)) {
      part.kind = SlotKind::kPhrase;
      const std::size_t n = rng.between(4, 6);
      for (std::size_t i = 0; i < n; ++i) {
        // The first value is always multi-word.
        const std::size_t words = i == 0 ? rng.between(2, 3) : rng.between(1, 3);
        std::string phrase;
        for (const auto& w : distinct_words(rng, words)) phrase += (phrase.empty() ? "" : " ") + w;
        part.pool.push_back(std::move(phrase));
      }
    } else {
      part.kind = SlotKind::kWord;
      part.pool = distinct_words(rng, rng.between(4, 6));
    }
  }

  std::string line = opts.timestamps ? "17/06/01 00:00:00" : "";
  for (const auto& part : t.parts) {
    if (!line.empty()) line.push_back(' ');
    line += canonical(part);
  }
  auto expected = tokenize_line(line);
  if (!expected) throw InvariantError("template rendered to an empty pattern");
  t.expected = std::move(*expected);
  return t;
}

// Template ids in `ids`, each once, then weighted fill up to `lines`, shuffled.
std::vector<std::uint32_t> line_plan(const std::vector<std::uint32_t>& ids, std::size_t lines,
                                     double zipf_s, Rng& rng) {
  std::vector<std::uint32_t> plan(ids.begin(), ids.end());
  if (zipf_s <= 0.0) {
    while (plan.size() < lines) plan.push_back(ids[rng.below(ids.size())]);
  } else {
    std::vector<std::uint32_t> ranked = ids;
    rng.shuffle(ranked);
    std::vector<double> cumulative(ranked.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), zipf_s);
      cumulative[r] = acc;
    }
    while (plan.size() < lines) {
      const double u = rng.unit() * acc;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const std::size_t r = std::min<std::size_t>(it - cumulative.begin(), ranked.size() - 1);
      plan.push_back(ranked[r]);
    }
  }
  rng.shuffle(plan);
  return plan;
}

GeneratedFile make_file(std::string name, std::vector<std::uint32_t> ids,
                        const std::vector<LogTemplate>& templates, std::size_t lines,
                        double zipf_s, bool timestamps, std::uint64_t seed) {
  Rng rng(seed);
  std::sort(ids.begin(), ids.end());
  GeneratedFile f;
  f.name = std::move(name);
  f.templates = ids;
  f.line_templates = line_plan(ids, lines, zipf_s, rng);
  f.lines.reserve(f.line_templates.size());
  for (std::uint32_t id : f.line_templates)
    f.lines.push_back(instantiate(templates[id], timestamps, rng));
  return f;
}

std::string file_name(std::string_view split, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu.log", std::string(split).c_str(), i);
  return buf;
}

void validate_options(const TemplateOptions& o) {
  if (o.min_words < 4) throw UsageError("templates need at least 4 words");
  if (o.min_words > o.max_words) throw UsageError("min_words exceeds max_words");
  if (o.min_slots > o.max_slots) throw UsageError("min_slots exceeds max_slots");
  if (o.max_slots + 2 > o.min_words) throw UsageError("max_slots leaves no room for constants");
  if (!(o.phrase_fraction >= 0.0 && o.phrase_fraction <= 1.0))
    throw UsageError("phrase_fraction must lie in [0, 1]");
}

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

std::string_view slot_name(SlotKind kind) {
  switch (kind) {
    case SlotKind::kNumber: return "num";
    case SlotKind::kHex: return "hex";
    case SlotKind::kPath: return "path";
    case SlotKind::kWord: return "word";
    case SlotKind::kPhrase: return "phrase";
  }
  return "slot";
}

std::string LogTemplate::skeleton() const {
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out.push_back(' ');
    if (part.is_slot)
      out += part.text + "<" + std::string(slot_name(part.kind)) + ">";
    else
      out += part.text;
  }
  return out;
}

std::size_t Dataset::success_count() const {
  return static_cast<std::size_t>(
      std::count_if(templates.begin(), templates.end(), [](const auto& t) { return t.success; }));
}

void DatasetSpec::validate() const {
  if (template_count < 2) throw UsageError("template_count must be >= 2");
  if (!(success_fraction > 0.0 && success_fraction < 1.0))
    throw UsageError("success_fraction must lie in (0, 1)");
  if (files_per_split < 1) throw UsageError("files_per_split must be >= 1");
  if (lines_per_file < 1) throw UsageError("lines_per_file must be >= 1");
  if (!(universal_fraction >= 0.0 && universal_fraction <= 1.0))
    throw UsageError("universal_fraction must lie in [0, 1]");
  if (zipf_s < 0.0) throw UsageError("zipf_s must be >= 0");
  validate_options(templates);

  const std::size_t success = rounded(template_count * success_fraction);
  if (success < 1 || success >= template_count)
    throw UsageError("success_fraction leaves no success or no error templates");
  const std::size_t universal = rounded(success * universal_fraction);
  const std::size_t scattered = success - universal;
  const std::size_t errors = template_count - success;
  const std::size_t per_test = universal + (scattered + files_per_split - 1) / files_per_split +
                               (errors + files_per_split - 1) / files_per_split;
  if (per_test > lines_per_file)
    throw UsageError("infeasible spec: a file must hold " + std::to_string(per_test) +
                     " templates but has only " + std::to_string(lines_per_file) + " lines");
}

std::vector<LogTemplate> generate_templates(std::size_t count, const TemplateOptions& opts,
                                            std::uint64_t seed) {
  validate_options(opts);
  Rng rng(seed);
  std::vector<LogTemplate> out;
  std::set<Pattern> seen;
  std::size_t failures = 0;
  while (out.size() < count) {
    LogTemplate t = make_template(opts, rng);
    if (!seen.insert(t.expected).second) {
      if (++failures > 100 * count + 1000)
        throw UsageError("cannot generate " + std::to_string(count) + " distinct templates");
      continue;
    }
    t.id = static_cast<std::uint32_t>(out.size());
    out.push_back(std::move(t));
  }
  return out;
}

Dataset generate_dataset(const DatasetSpec& spec, unsigned workers) {
  spec.validate();
  Dataset ds;
  ds.templates = generate_templates(spec.template_count, spec.templates, derive_seed(spec.seed, 1));
  Rng rng(derive_seed(spec.seed, 2));

  const std::size_t success = rounded(spec.template_count * spec.success_fraction);
  const std::size_t universal = rounded(success * spec.universal_fraction);
  const std::size_t files = spec.files_per_split;

  std::vector<std::uint32_t> success_ids(success), error_ids;
  for (std::uint32_t i = 0; i < success; ++i) success_ids[i] = i;
  for (std::size_t i = success; i < ds.templates.size(); ++i) {
    ds.templates[i].success = false;
    error_ids.push_back(static_cast<std::uint32_t>(i));
  }
  rng.shuffle(success_ids);
  rng.shuffle(error_ids);

  std::vector<std::vector<std::uint32_t>> train_ids(files), test_ids(files);
  for (std::size_t i = 0; i < success_ids.size(); ++i) {
    if (i < universal) {
      for (std::size_t f = 0; f < files; ++f) {
        train_ids[f].push_back(success_ids[i]);
        test_ids[f].push_back(success_ids[i]);
      }
    } else {
      const std::size_t f = (i - universal) % files;
      train_ids[f].push_back(success_ids[i]);
      test_ids[f].push_back(success_ids[i]);
    }
  }
  for (std::size_t i = 0; i < error_ids.size(); ++i) test_ids[i % files].push_back(error_ids[i]);

  ds.train.resize(files);
  ds.test.resize(files);
  parallel_for(2 * files, workers, [&](std::size_t k) {
    const bool train = k < files;
    const std::size_t f = train ? k : k - files;
    auto& ids = train ? train_ids[f] : test_ids[f];
    (train ? ds.train : ds.test)[f] =
        make_file(file_name(train ? "train" : "test", f), ids, ds.templates,
                  spec.lines_per_file, spec.zipf_s, spec.templates.timestamps,
                  derive_seed(spec.seed, 100 + k));
  });
  return ds;
}

Dataset generate_corpus(std::size_t template_count, std::size_t lines, std::uint64_t seed,
                        const TemplateOptions& opts, double zipf_s) {
  if (template_count < 1) throw UsageError("template_count must be >= 1");
  if (lines < template_count) throw UsageError("corpus needs at least one line per template");
  Dataset ds;
  ds.templates = generate_templates(template_count, opts, derive_seed(seed, 1));
  std::vector<std::uint32_t> ids(template_count);
  for (std::uint32_t i = 0; i < template_count; ++i) ids[i] = i;
  ds.train.push_back(make_file("corpus.log", ids, ds.templates, lines, zipf_s, opts.timestamps,
                               derive_seed(seed, 100)));
  return ds;
}

nlohmann::json ground_truth_json(const Dataset& ds, bool per_line) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : ds.templates)
    templates.push_back({{"id", t.id},
                         {"success", t.success},
                         {"skeleton", t.skeleton()},
                         {"expected", render(t.expected)}});
  nlohmann::json files = nlohmann::json::array();
  auto add = [&](const GeneratedFile& f, std::string_view split) {
    nlohmann::json j{{"name", f.name}, {"split", split}, {"templates", f.templates}};
    if (per_line) j["line_templates"] = f.line_templates;
    files.push_back(std::move(j));
  };
  for (const auto& f : ds.train) add(f, "train");
  for (const auto& f : ds.test) add(f, "test");
  return {{"templates", std::move(templates)}, {"files", std::move(files)}};
}

void write_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  auto write_split = [&](const std::vector<GeneratedFile>& split, const char* sub) {
    if (split.empty()) return;
    const fs::path d = fs::path(dir) / sub;
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw InputError("cannot create directory " + d.string() + ": " + ec.message());
    for (const auto& f : split) {
      std::ofstream out(d / f.name, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write " + (d / f.name).string());
      for (const auto& line : f.lines) out << line << '\n';
      if (!out) throw InputError("failed writing " + (d / f.name).string());
    }
  };
  write_split(ds.train, "train");
  write_split(ds.test, "test");
  std::ofstream gt(fs::path(dir) / "ground_truth.json", std::ios::binary | std::ios::trunc);
  if (!gt) throw InputError("cannot write ground truth in " + dir);
  gt << ground_truth_json(ds).dump() << '\n';
}

}  // namespace logsieve

#include "logsieve/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "logsieve/codec.hpp"
#include "logsieve/errors.hpp"

namespace logsieve {

namespace {
constexpr double kEps = 1e-9;
}

PatternModel::PatternModel(Config config, Provenance provenance,
                           std::vector<ModelPattern> patterns)
    : config_(config),
      provenance_(provenance),
      patterns_(std::move(patterns)),
      hasher_(config.num_permutations, config.seed),
      lsh_(config.num_permutations, config.jaccard_threshold, config.seed) {
  config_.validate();
  signatures_.reserve(patterns_.size());
  for (std::uint32_t id = 0; id < patterns_.size(); ++id) {
    const Pattern& p = patterns_[id].pattern;
    if (!is_well_formed(p))
      throw UsageError("model pattern " + std::to_string(id) + " is malformed");
    signatures_.push_back(sign(p));
    lsh_.insert(id, signatures_.back());

    std::vector<Token> sorted = p.tokens;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      postings_[sorted[i]].emplace_back(id, static_cast<std::uint32_t>(j - i));
      i = j;
    }
  }
  lsh_.freeze();
}

MinHashSignature PatternModel::sign(const Pattern& p) const {
  return hasher_.sign(shingle(p, config_.shingle_n));
}

std::vector<std::size_t> PatternModel::overlap_candidates(const Pattern& q,
                                                          double alpha) const {
  std::vector<Token> sorted = q.tokens;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint32_t> overlap(patterns_.size(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto count = static_cast<std::uint32_t>(j - i);
    if (auto it = postings_.find(sorted[i]); it != postings_.end()) {
      for (const auto& [id, occurrences] : it->second) {
        if (overlap[id] == 0) touched.push_back(id);
        overlap[id] += std::min(count, occurrences);
      }
    }
    i = j;
  }
  std::vector<std::size_t> out;
  for (std::size_t id : touched) {
    const double longest =
        static_cast<double>(std::max(q.length(), patterns_[id].pattern.length()));
    if (static_cast<double>(overlap[id]) - alpha * longest >= -kEps) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PatternModel select_patterns(const PatternSet& ps, const Config& cfg) {
  cfg.validate();
  if (ps.empty()) throw UsageError("cannot select from an empty pattern set");
  const std::uint64_t total = ps.total_frequency();
  if (total == 0) throw UsageError("pattern set has zero total frequency");

  std::vector<std::size_t> order(ps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ps.entries[a].stats.frequency > ps.entries[b].stats.frequency;
  });

  std::vector<bool> chosen(ps.size(), false);
  const double target = cfg.coverage_fraction * static_cast<double>(total);
  std::uint64_t covered = 0;
  for (std::size_t idx : order) {
    if (static_cast<double>(covered) >= target - kEps) break;
    chosen[idx] = true;
    covered += ps.entries[idx].stats.frequency;
  }
  const double presence_needed =
      cfg.file_presence_fraction * static_cast<double>(ps.training_files);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps.training_files > 0 &&
        static_cast<double>(ps.entries[i].stats.files.size()) >= presence_needed - kEps)
      chosen[i] = true;
  }

  std::vector<ModelPattern> selected;
  for (std::size_t idx : order) {
    if (!chosen[idx]) continue;
    const auto& e = ps.entries[idx];
    selected.push_back({e.pattern, e.stats.frequency, e.stats.match_count,
                        e.stats.length_sum,
                        static_cast<std::uint32_t>(e.stats.files.size())});
  }
  return PatternModel(cfg, Provenance{ps.training_files, total}, std::move(selected));
}

nlohmann::json tokens_to_json(const Pattern& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Token& t : p.tokens) {
    if (t.is_constant()) {
      arr.push_back({{"kind", "c"}, {"text", t.text}});
    } else if (t.is_wildcard()) {
      arr.push_back({{"kind", "w"}});
    } else {
      throw UsageError("gap tokens cannot be serialized");
    }
  }
  return arr;
}

Pattern tokens_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("tokens must be an array");
  Pattern p;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("kind") || !t["kind"].is_string())
      throw InputError("token without a kind");
    const std::string kind = t["kind"].get<std::string>();
    if (kind == "c") {
      if (!t.contains("text") || !t["text"].is_string())
        throw InputError("constant token without text");
      p.tokens.push_back(Token::constant(t["text"].get<std::string>()));
    } else if (kind == "w") {
      p.tokens.push_back(Token::wildcard());
    } else {
      throw InputError("unknown token kind '" + kind + "'");
    }
  }
  if (!is_well_formed(p)) throw InputError("malformed pattern");
  return p;
}

std::string serialize_model(const PatternModel& model) {
  std::string body;
  nlohmann::json header{
      {"format_version", kModelFormatVersion},
      {"config", to_json(model.config())},
      {"provenance",
       {{"training_files", model.provenance().training_files},
        {"total_lines", model.provenance().total_lines}}}};
  body += header.dump();
  body.push_back('\n');
  for (const auto& mp : model.patterns()) {
    nlohmann::json rec{{"tokens", tokens_to_json(mp.pattern)},
                       {"frequency", mp.frequency},
                       {"files", mp.file_count},
                       {"match_count", mp.match_count},
                       {"length_sum", mp.length_sum}};
    body += rec.dump();
    body.push_back('\n');
  }
  return with_checksum(std::move(body));
}

void save_model(const PatternModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write model file " + path);
  out << serialize_model(model);
  if (!out) throw InputError("failed writing model file " + path);
}

PatternModel parse_model(std::string_view content) {
  const auto lines = read_checked_records(content, "model");
  if (lines.empty())
    throw InputError("model file has no header", InputError::Position::kLine, 1);

  auto parse_line = [&](std::size_t idx) {
    try {
      auto j = nlohmann::json::parse(lines[idx]);
      if (!j.is_object()) throw InputError("record is not an object");
      return j;
    } catch (const nlohmann::json::parse_error&) {
      throw InputError("model file: malformed record", InputError::Position::kLine,
                       idx + 1);
    } catch (const InputError& e) {
      throw InputError(std::string("model file: ") + e.message(),
                       InputError::Position::kLine, idx + 1);
    }
  };

  Config cfg;
  Provenance prov;
  {
    const auto header = parse_line(0);
    try {
      const int version = header.at("format_version").get<int>();
      if (version != kModelFormatVersion)
        throw InputError("model format version " + std::to_string(version) +
                         " is not supported (expected " +
                         std::to_string(kModelFormatVersion) + ")");
      cfg = config_from_json(header.at("config"));
      prov.training_files = header.at("provenance").at("training_files").get<std::uint32_t>();
      prov.total_lines = header.at("provenance").at("total_lines").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("model header: ") + e.what(),
                       InputError::Position::kLine, 1);
    } catch (const Error& e) {
      throw InputError(std::string("model header: ") + e.what(),
                       InputError::Position::kLine, 1);
    }
  }

  std::vector<ModelPattern> patterns;
  patterns.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto rec = parse_line(i);
    try {
      ModelPattern mp;
      mp.pattern = tokens_from_json(rec.at("tokens"));
      mp.frequency = rec.at("frequency").get<std::uint64_t>();
      mp.file_count = rec.at("files").get<std::uint32_t>();
      mp.match_count = rec.at("match_count").get<std::uint64_t>();
      mp.length_sum = rec.at("length_sum").get<std::uint64_t>();
      patterns.push_back(std::move(mp));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("model file: malformed record: ") + e.what(),
                       InputError::Position::kLine, i + 1);
    } catch (const InputError& e) {
      throw InputError(std::string("model file: ") + e.message(),
                       InputError::Position::kLine, i + 1);
    }
  }
  return PatternModel(cfg, prov, std::move(patterns));
}

PatternModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.message(), e.position(), e.offset());
  }
}

}  // namespace logsieve

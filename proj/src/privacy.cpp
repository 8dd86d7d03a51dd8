#include "logsieve/privacy.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "logsieve/codec.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/hash.hpp"

namespace logsieve {

namespace {

constexpr double kEps = 1e-9;
constexpr std::uint64_t kSecondHashSalt = 0x5bd1e9955bd1e995ULL;
constexpr std::uint64_t kStoreSalt = 0x42;

void check_same(const BloomConfig& a, const BloomConfig& b) {
  if (!(a == b)) throw UsageError("bloom encodings use different configurations");
}

std::string describe(const BloomConfig& c) {
  return "m=" + std::to_string(c.m) + " k=" + std::to_string(c.k) +
         " shingle_n=" + std::to_string(c.shingle_n) + " seed=" + std::to_string(c.seed);
}

}  // namespace

void BloomConfig::validate() const {
  if (m < 64 || !std::has_single_bit(m))
    throw UsageError("bloom m must be a power of two >= 64 (got " + std::to_string(m) + ")");
  if (k < 1) throw UsageError("bloom k must be >= 1");
  if (shingle_n < 1) throw UsageError("bloom shingle_n must be >= 1");
}

BloomEncoding::BloomEncoding(const BloomConfig& config, std::uint64_t frequency)
    : config_(config), words_(config.m / 64, 0), frequency_(frequency) {
  config_.validate();
  if (frequency_ < 1) throw UsageError("encoding frequency must be >= 1");
}

void BloomEncoding::set(std::size_t bit) {
  std::uint64_t& w = words_[bit / 64];
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  if (!(w & mask)) {
    w |= mask;
    ++set_bits_;
  }
}

bool BloomEncoding::test(std::size_t bit) const {
  return (words_[bit / 64] >> (bit % 64)) & 1;
}

std::vector<std::uint64_t> BloomEncoding::positions() const {
  std::vector<std::uint64_t> out;
  out.reserve(set_bits_);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      out.push_back(w * 64 + static_cast<std::uint64_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

std::vector<std::uint8_t> BloomEncoding::to_bytes() const {
  std::vector<std::uint8_t> out(config_.m / 8, 0);
  for (std::uint64_t bit : positions())
    out[bit / 8] |= static_cast<std::uint8_t>(0x80u >> (bit % 8));
  return out;
}

BloomEncoding BloomEncoding::from_bytes(const BloomConfig& config,
                                        std::span<const std::uint8_t> bytes,
                                        std::uint64_t frequency) {
  BloomEncoding e(config, frequency);
  if (bytes.size() != config.m / 8)
    throw InputError("bitmap holds " + std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string(config.m / 8));
  for (std::size_t i = 0; i < bytes.size(); ++i)
    for (std::size_t b = 0; b < 8; ++b)
      if (bytes[i] & (0x80u >> b)) e.set(i * 8 + b);
  return e;
}

BloomEncoding encode_pattern(const Pattern& p, const BloomConfig& config,
                             std::uint64_t frequency) {
  if (p.empty()) throw UsageError("cannot encode an empty pattern");
  BloomEncoding e(config, frequency);
  const std::uint64_t mask = config.m - 1;
  // Double hashing: position j = h1 + j*h2 with h2 odd, so the k positions
  // are distinct whenever k <= m.
  for (const std::string& s : shingle(p, config.shingle_n).shingles) {
    const std::uint64_t h1 = hash_bytes(s, config.seed);
    const std::uint64_t h2 = hash_bytes(s, config.seed ^ kSecondHashSalt) | 1;
    for (std::size_t j = 0; j < config.k; ++j) e.set((h1 + j * h2) & mask);
  }
  return e;
}

double encoding_jaccard(const BloomEncoding& a, const BloomEncoding& b) {
  check_same(a.config(), b.config());
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    inter += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    uni += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EncodingStore::EncodingStore(BloomConfig config, StoreOptions options,
                             std::vector<BloomEncoding> encodings)
    : config_(config),
      options_(options),
      encodings_(std::move(encodings)),
      hasher_(options.num_permutations, derive_seed(config.seed, kStoreSalt)),
      lsh_(options.num_permutations, options.candidate_threshold,
           derive_seed(config.seed, kStoreSalt)) {
  config_.validate();
  if (!(options_.match_threshold > 0.0 && options_.match_threshold <= 1.0))
    throw UsageError("store match threshold must lie in (0, 1]");
  for (std::size_t id = 0; id < encodings_.size(); ++id) {
    check_same(config_, encodings_[id].config());
    if (encodings_[id].set_bits() == 0)
      throw UsageError("stored encoding " + std::to_string(id) + " has no bits set");
    lsh_.insert(id, sign(encodings_[id]));
  }
  lsh_.freeze();
}

MinHashSignature EncodingStore::sign(const BloomEncoding& e) const {
  std::vector<std::uint64_t> elems = e.positions();
  for (auto& x : elems) x = fmix64(x + 1);
  return hasher_.sign(elems);
}

std::vector<std::size_t> EncodingStore::candidates(const BloomEncoding& e) const {
  if (encodings_.empty() || e.set_bits() == 0) return {};
  return lsh_.query(sign(e));
}

std::optional<std::size_t> EncodingStore::find(const BloomEncoding& e) const {
  check_same(config_, e.config());
  std::optional<std::size_t> best;
  double best_j = -1.0;
  for (std::size_t id : candidates(e)) {
    const double j = encoding_jaccard(encodings_[id], e);
    if (j >= options_.match_threshold - kEps && j > best_j) {
      best = id;
      best_j = j;
    }
  }
  return best;
}

EncodingStore aggregate(std::span<const Submission> submissions,
                        const BloomConfig& config, double coverage_fraction,
                        const StoreOptions& options) {
  config.validate();
  if (!(coverage_fraction > 0.0 && coverage_fraction <= 1.0))
    throw UsageError("coverage_fraction must lie in (0, 1]");

  std::set<std::string> offending;
  for (const auto& s : submissions)
    if (!(s.encoding.config() == config)) offending.insert(s.client_id);
  if (!offending.empty()) {
    std::string ids;
    for (const auto& id : offending) ids += (ids.empty() ? "" : ", ") + id;
    throw UsageError("bloom configuration differs from " + describe(config) +
                     " for clients: " + ids);
  }
  if (submissions.empty()) return EncodingStore(config, options, {});

  // Highest frequency first; bitmap bytes break ties so the result does not
  // depend on submission order.
  std::vector<std::size_t> order(submissions.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<std::uint8_t>> bytes(submissions.size());
  for (std::size_t i = 0; i < submissions.size(); ++i)
    bytes[i] = submissions[i].encoding.to_bytes();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto fa = submissions[a].encoding.frequency();
    const auto fb = submissions[b].encoding.frequency();
    if (fa != fb) return fa > fb;
    return bytes[a] < bytes[b];
  });

  const EncodingStore probe(config, options, {});
  std::vector<MinHashSignature> sigs;
  sigs.reserve(order.size());
  for (std::size_t idx : order) {
    if (submissions[idx].encoding.set_bits() == 0)
      throw UsageError("submission from " + submissions[idx].client_id + " has no bits set");
    sigs.push_back(probe.sign(submissions[idx].encoding));
  }

  std::vector<BloomEncoding> merged;
  for (const auto& block : lsh_blocks(sigs, options.candidate_threshold)) {
    std::vector<bool> taken(block.size(), false);
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (taken[i]) continue;
      taken[i] = true;
      BloomEncoding rep = submissions[order[block[i]]].encoding;
      std::uint64_t total = rep.frequency();
      for (std::size_t j = i + 1; j < block.size(); ++j) {
        if (taken[j]) continue;
        const auto& other = submissions[order[block[j]]].encoding;
        if (encoding_jaccard(rep, other) >= options.match_threshold - kEps) {
          taken[j] = true;
          total += other.frequency();
        }
      }
      rep.set_frequency(total);
      merged.push_back(std::move(rep));
    }
  }

  std::vector<std::vector<std::uint8_t>> merged_bytes;
  merged_bytes.reserve(merged.size());
  for (const auto& e : merged) merged_bytes.push_back(e.to_bytes());
  std::vector<std::size_t> rank(merged.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (merged[a].frequency() != merged[b].frequency())
      return merged[a].frequency() > merged[b].frequency();
    return merged_bytes[a] < merged_bytes[b];
  });

  std::uint64_t grand = 0;
  for (const auto& e : merged) grand += e.frequency();
  const double target = coverage_fraction * static_cast<double>(grand);
  std::uint64_t covered = 0;
  std::vector<BloomEncoding> kept;
  for (std::size_t idx : rank) {
    if (static_cast<double>(covered) >= target - kEps) break;
    covered += merged[idx].frequency();
    kept.push_back(std::move(merged[idx]));
  }
  return EncodingStore(config, options, std::move(kept));
}

std::optional<std::size_t> find_encoded(const EncodingStore& store, const Pattern& p) {
  if (store.empty() || p.empty()) return std::nullopt;
  return store.find(encode_pattern(p, store.config()));
}

bool match_encoded(const EncodingStore& store, const Pattern& p) {
  return find_encoded(store, p).has_value();
}

std::string serialize_encodings(const EncodingFile& file) {
  file.config.validate();
  nlohmann::json header{{"format_version", kEncodingFormatVersion},
                        {"bloom",
                         {{"m", file.config.m},
                          {"k", file.config.k},
                          {"shingle_n", file.config.shingle_n},
                          {"seed", file.config.seed}}}};
  if (file.store_options) {
    header["jaccard_threshold"] = file.store_options->match_threshold;
    header["candidate_threshold"] = file.store_options->candidate_threshold;
    header["num_permutations"] = file.store_options->num_permutations;
  }
  std::string body = header.dump();
  body.push_back('\n');
  for (const auto& e : file.encodings) {
    check_same(file.config, e.config());
    nlohmann::json rec{{"bitmap", base64_encode(e.to_bytes())},
                       {"frequency", e.frequency()}};
    body += rec.dump();
    body.push_back('\n');
  }
  return with_checksum(std::move(body));
}

EncodingFile parse_encodings(std::string_view content) {
  const auto lines = read_checked_records(content, "encoding");
  if (lines.empty())
    throw InputError("encoding file has no header", InputError::Position::kLine, 1);

  auto parse_line = [&](std::size_t idx) {
    try {
      auto j = nlohmann::json::parse(lines[idx]);
      if (!j.is_object())
        throw InputError("encoding file: record is not an object",
                         InputError::Position::kLine, idx + 1);
      return j;
    } catch (const nlohmann::json::parse_error&) {
      throw InputError("encoding file: malformed record", InputError::Position::kLine,
                       idx + 1);
    }
  };

  EncodingFile file;
  {
    const auto header = parse_line(0);
    try {
      const int version = header.at("format_version").get<int>();
      if (version != kEncodingFormatVersion)
        throw InputError("encoding format version " + std::to_string(version) +
                         " is not supported (expected " +
                         std::to_string(kEncodingFormatVersion) + ")");
      const auto& b = header.at("bloom");
      file.config.m = b.at("m").get<std::size_t>();
      file.config.k = b.at("k").get<std::size_t>();
      file.config.shingle_n = b.at("shingle_n").get<std::size_t>();
      file.config.seed = b.at("seed").get<std::uint64_t>();
      file.config.validate();
      if (header.contains("jaccard_threshold")) {
        StoreOptions o;
        o.match_threshold = header.at("jaccard_threshold").get<double>();
        if (header.contains("candidate_threshold"))
          o.candidate_threshold = header.at("candidate_threshold").get<double>();
        if (header.contains("num_permutations"))
          o.num_permutations = header.at("num_permutations").get<std::size_t>();
        file.store_options = o;
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("encoding header: ") + e.what(),
                       InputError::Position::kLine, 1);
    } catch (const Error& e) {
      throw InputError(std::string("encoding header: ") + e.what(),
                       InputError::Position::kLine, 1);
    }
  }

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto rec = parse_line(i);
    try {
      const auto raw = base64_decode(rec.at("bitmap").get<std::string>());
      const auto freq = rec.at("frequency").get<std::uint64_t>();
      file.encodings.push_back(BloomEncoding::from_bytes(file.config, raw, freq));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("encoding file: malformed record: ") + e.what(),
                       InputError::Position::kLine, i + 1);
    } catch (const InputError& e) {
      throw InputError(std::string("encoding file: ") + e.message(),
                       InputError::Position::kLine, i + 1);
    } catch (const UsageError& e) {
      throw InputError(std::string("encoding file: ") + e.what(),
                       InputError::Position::kLine, i + 1);
    }
  }
  return file;
}

void save_encodings(const EncodingFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write encoding file " + path);
  out << serialize_encodings(file);
  if (!out) throw InputError("failed writing encoding file " + path);
}

EncodingFile load_encodings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open encoding file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_encodings(buf.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.message(), e.position(), e.offset());
  }
}

EncodingFile to_file(const EncodingStore& store) {
  return EncodingFile{store.config(), store.options(), store.encodings()};
}

EncodingStore store_from_file(const EncodingFile& file) {
  return EncodingStore(file.config, file.store_options.value_or(StoreOptions{}),
                       file.encodings);
}

}  // namespace logsieve

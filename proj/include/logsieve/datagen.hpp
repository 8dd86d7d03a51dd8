#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "logsieve/token.hpp"

namespace logsieve {

enum class SlotKind : std::uint8_t { kNumber, kHex, kPath, kWord, kPhrase };

std::string_view slot_name(SlotKind kind);

struct TemplatePart {
  bool is_slot = false;
  std::string text;                // constant word, or prefix glued to a number slot
  SlotKind kind = SlotKind::kNumber;
  std::vector<std::string> pool;   // kWord / kPhrase values
};

struct LogTemplate {
  std::uint32_t id = 0;
  bool success = true;
  std::vector<TemplatePart> parts;
  Pattern expected;  // what a perfect parser should recover

  // Constants verbatim, slots as <num>, <hex>, <path>, <word>, <phrase>.
  std::string skeleton() const;
};

struct TemplateOptions {
  std::size_t min_words = 8;
  std::size_t max_words = 16;
  std::size_t min_slots = 1;
  std::size_t max_slots = 3;
  // Share of string slots drawing multi-word values.
  double phrase_fraction = 0.1;
  // String slots (word or phrase) only go into templates at least this long,
  // at most one per template. Variants of shorter templates differ in too
  // many shingles to meet as LSH candidates.
  std::size_t min_words_for_text = 12;
  // Prefix each line with a date and time.
  bool timestamps = true;
};

struct DatasetSpec {
  std::size_t template_count = 12968;
  double success_fraction = 0.75;
  std::size_t files_per_split = 8;
  std::size_t lines_per_file = 15000;
  double universal_fraction = 0.5;
  // 0 picks templates uniformly; s > 0 weights them by 1/rank^s.
  double zipf_s = 0.0;
  TemplateOptions templates;
  std::uint64_t seed = 1;

  // Throws UsageError when the spec is out of range or infeasible.
  void validate() const;
};

struct GeneratedFile {
  std::string name;
  std::vector<std::string> lines;
  std::vector<std::uint32_t> line_templates;  // template id per line
  std::vector<std::uint32_t> templates;       // ascending distinct ids
};

struct Dataset {
  std::vector<LogTemplate> templates;  // index == id
  std::vector<GeneratedFile> train;
  std::vector<GeneratedFile> test;

  std::size_t success_count() const;
  std::size_t error_count() const { return templates.size() - success_count(); }
};

// round(count * success_fraction) success templates, universal ones in every
// training file, the rest spread one file each; error templates only in
// test files.
Dataset generate_dataset(const DatasetSpec& spec, unsigned workers = 1);

// Single file of `lines` lines over `template_count` success templates.
Dataset generate_corpus(std::size_t template_count, std::size_t lines, std::uint64_t seed,
                        const TemplateOptions& opts = {}, double zipf_s = 0.0);

// Distinct templates with pairwise distinct expected patterns.
std::vector<LogTemplate> generate_templates(std::size_t count, const TemplateOptions& opts,
                                            std::uint64_t seed);

nlohmann::json ground_truth_json(const Dataset& dataset, bool per_line = true);

// Writes <dir>/train/*.log, <dir>/test/*.log and <dir>/ground_truth.json.
void write_dataset(const Dataset& dataset, const std::string& dir);

}  // namespace logsieve

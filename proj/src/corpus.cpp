#include "einfach/corpus.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "einfach/text.hpp"
#include "einfach/utf8.hpp"

namespace einfach {

using nlohmann::json;

std::string_view to_string(Split split) {
  return split == Split::Train ? "train" : "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  throw std::invalid_argument("invalid split tag: \"" + std::string(text) + "\"");
}

CorpusFormatError::CorpusFormatError(const std::string& name,
                                     std::vector<CorpusDiagnostic> diagnostics)
    : std::runtime_error(name + ": " + std::to_string(diagnostics.size()) +
                         " invalid line(s), first at line " +
                         std::to_string(diagnostics.empty() ? 0 : diagnostics.front().line) +
                         (diagnostics.empty() ? "" : ": " + diagnostics.front().message)),
      diagnostics_(std::move(diagnostics)) {}

namespace {

const char* const kRequiredFields[] = {"id", "source", "target", "provenance", "split"};

// Parses one JSONL record; appends diagnostics instead of throwing so a
// whole file can be validated in one pass.
bool parse_record(const json& j, std::size_t line_no, CorpusRecord& record,
                  std::vector<CorpusDiagnostic>& errors, bool allow_empty_target) {
  bool ok = true;
  const auto fail = [&](const std::string& field, std::string message) {
    errors.push_back({line_no, field, std::move(message)});
    ok = false;
  };

  if (!j.is_object()) {
    fail("", "line is not a JSON object");
    return false;
  }
  for (const char* field : kRequiredFields) {
    if (!j.contains(field)) {
      fail(field, std::string("missing field \"") + field + "\"");
    } else if (!j.at(field).is_string()) {
      fail(field, std::string("field \"") + field + "\" must be a string");
    }
  }
  if (!ok) return false;

  record.id = j.at("id").get<std::string>();
  record.source = j.at("source").get<std::string>();
  record.target = j.at("target").get<std::string>();
  record.provenance = j.at("provenance").get<std::string>();
  if (record.id.empty()) fail("id", "empty id");
  if (record.target.empty() && !allow_empty_target) fail("target", "empty target");
  try {
    record.split = parse_split(j.at("split").get<std::string>());
  } catch (const std::invalid_argument& e) {
    fail("split", e.what());
  }

  record.meta.clear();
  if (j.contains("meta")) {
    if (!j.at("meta").is_object()) {
      fail("meta", "field \"meta\" must be an object");
    } else {
      for (const auto& [key, value] : j.at("meta").items()) {
        if (!value.is_string()) {
          fail("meta", "meta value for \"" + key + "\" must be a string");
        } else {
          record.meta[key] = value.get<std::string>();
        }
      }
    }
  }
  return ok;
}

}  // namespace

std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& name,
                                       std::vector<CorpusDiagnostic>* warnings,
                                       bool allow_empty_target) {
  std::vector<CorpusRecord> records;
  std::vector<CorpusDiagnostic> errors;
  std::unordered_map<std::string, std::size_t> seen_ids;  // id → first line

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      errors.push_back({line_no, "", "invalid JSON"});
      continue;
    }
    CorpusRecord record;
    if (!parse_record(j, line_no, record, errors, allow_empty_target)) continue;

    const auto [it, inserted] = seen_ids.emplace(record.id, line_no);
    if (!inserted) {
      errors.push_back({line_no, "id",
                        "duplicate id \"" + record.id + "\" (first seen at line " +
                            std::to_string(it->second) + ")"});
      continue;
    }
    records.push_back(std::move(record));
  }

  if (!errors.empty()) throw CorpusFormatError(name, std::move(errors));
  if (records.empty() && warnings) {
    warnings->push_back({0, "", name + ": empty corpus"});
  }
  return records;
}

std::vector<CorpusRecord> load_corpus(const std::string& path,
                                      std::vector<CorpusDiagnostic>* warnings,
                                      bool allow_empty_target) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return parse_corpus(in, path, warnings, allow_empty_target);
}

std::string to_jsonl(const CorpusRecord& record) {
  json j;
  j["id"] = record.id;
  j["source"] = record.source;
  j["target"] = record.target;
  j["provenance"] = record.provenance;
  j["split"] = to_string(record.split);
  if (!record.meta.empty()) j["meta"] = record.meta;
  return j.dump();
}

std::string to_jsonl(std::span<const CorpusRecord> corpus) {
  std::string out;
  for (const CorpusRecord& record : corpus) {
    out += to_jsonl(record);
    out += '\n';
  }
  return out;
}

void save_corpus(const std::string& path, std::span<const CorpusRecord> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  out << to_jsonl(corpus);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string standardize_typography(std::string_view text) {
  // Pass 1: line endings and character mapping.
  std::u32string cps;
  cps.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = decode_utf8(text, i);
    switch (cp) {
      case U'\r':
        if (i < text.size() && text[i] == '\n') ++i;
        cp = U'\n';
        break;
      case 0x201C:  // “
      case 0x201D:  // ”
      case 0x201E:  // „
      case 0x00AB:  // «
      case 0x00BB:  // »
        cp = U'"';
        break;
      case 0x2018:  // ‘
      case 0x2019:  // ’
      case 0x201A:  // ‚
      case 0x02BC:
        cp = U'\'';
        break;
      case 0x2010:
      case 0x2011:
      case 0x2012:
      case 0x2013:  // –
      case 0x2014:  // —
      case 0x2015:
      case 0x2212:
        cp = U'-';
        break;
      case U'\t':
      case 0x00A0:
      case 0x202F:
      case 0x205F:
      case 0x3000:
        cp = U' ';
        break;
      default:
        if (cp >= 0x2000 && cp <= 0x200B) cp = U' ';
        break;
    }
    cps.push_back(cp);
  }

  // Pass 2: line-leading bullet variants become "- ".
  bool line_start = true;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const char32_t cp = cps[k];
    if (cp == U'\n') {
      line_start = true;
      continue;
    }
    if (cp == U' ') continue;  // leading spaces keep line-start status
    if (line_start && (cp == 0x2022 || cp == U'*' || cp == U'-') &&
        (k + 1 == cps.size() || cps[k + 1] == U' ' || cps[k + 1] == U'\n')) {
      cps[k] = U'-';
    }
    line_start = false;
  }

  // Pass 3: collapse space runs, strip trailing spaces.
  std::string out;
  out.reserve(text.size());
  std::size_t pending_spaces = 0;
  for (const char32_t cp : cps) {
    if (cp == U' ') {
      ++pending_spaces;
      continue;
    }
    if (cp == U'\n') {
      pending_spaces = 0;  // drop trailing spaces
    } else if (pending_spaces > 0 && !out.empty() && out.back() != '\n') {
      out.push_back(' ');
    }
    pending_spaces = 0;
    append_utf8(out, cp);
  }
  return out;
}

SplitStats split_stats(std::span<const CorpusRecord> corpus) {
  if (corpus.empty()) throw std::invalid_argument("split_stats: empty corpus");
  SplitStats stats;
  for (const CorpusRecord& record : corpus) {
    const auto idx = static_cast<std::size_t>(record.split);
    std::size_t words = 0;
    for (const Token& t : tokenize(record.target)) {
      if (is_word_token(t)) ++words;
    }
    auto& cell = stats.rows[record.provenance][idx];
    cell.documents += 1;
    cell.words += words;
    stats.totals[idx].documents += 1;
    stats.totals[idx].words += words;
  }
  return stats;
}

namespace {

std::string group_digits(std::size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  const std::size_t offset = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (i - offset) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

std::string render_table(const SplitStats& stats) {
  const std::array<std::size_t, 2> order = {static_cast<std::size_t>(Split::Test),
                                            static_cast<std::size_t>(Split::Train)};
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"", "Docs", "Words", "Docs", "Words"});
  for (const auto& [provenance, row] : stats.rows) {
    cells.push_back({provenance, group_digits(row[order[0]].documents),
                     group_digits(row[order[0]].words), group_digits(row[order[1]].documents),
                     group_digits(row[order[1]].words)});
  }
  cells.push_back({"total", group_digits(stats.totals[order[0]].documents),
                   group_digits(stats.totals[order[0]].words),
                   group_digits(stats.totals[order[1]].documents),
                   group_digits(stats.totals[order[1]].words)});

  std::array<std::size_t, 5> widths{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }

  std::ostringstream out;
  out << std::string(widths[0], ' ') << "  " << std::setw(static_cast<int>(widths[1] + widths[2] + 2))
      << std::left << "Test"
      << "  "
      << "Train" << '\n';
  bool header = true;
  for (const auto& row : cells) {
    out << std::left << std::setw(static_cast<int>(widths[0])) << row[0];
    for (std::size_t c = 1; c < row.size(); ++c) {
      out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << row[c];
    }
    out << '\n';
    if (header) {
      out << std::string(widths[0] + widths[1] + widths[2] + widths[3] + widths[4] + 8, '-') << '\n';
      header = false;
    }
  }
  return out.str();
}

std::string PromptTemplate::render(std::string_view simplification) const {
  static constexpr std::string_view kSlot = "{simplification}";
  const std::size_t pos = text.find(kSlot);
  if (pos == std::string::npos) throw std::logic_error("template without slot");
  std::string out = text.substr(0, pos);
  out += simplification;
  out += text.substr(pos + kSlot.size());
  return out;
}

std::vector<PromptTemplate> load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open template file: " + path);

  static constexpr std::string_view kSlot = "{simplification}";
  std::vector<PromptTemplate> templates;
  std::vector<CorpusDiagnostic> errors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::size_t slots = 0;
    for (std::size_t pos = line.find(kSlot); pos != std::string::npos;
         pos = line.find(kSlot, pos + kSlot.size())) {
      ++slots;
    }
    if (slots != 1) {
      errors.push_back({line_no, "", "template must contain " + std::string(kSlot) +
                                         " exactly once (found " + std::to_string(slots) + ")"});
      continue;
    }
    for (const PromptTemplate& t : templates) {
      if (t.text == line) {
        errors.push_back({line_no, "", "duplicate template (same as template " +
                                           std::to_string(t.id) + ")"});
        break;
      }
    }
    templates.push_back({static_cast<int>(templates.size()) + 1, line});
  }
  if (!errors.empty()) throw CorpusFormatError(path, std::move(errors));
  if (templates.empty()) throw std::runtime_error(path + ": no templates");
  return templates;
}

SynthesisBatch synthesize_sources(std::span<const std::string> simplifications,
                                  SynthesisProvider& provider,
                                  std::span<const PromptTemplate> templates) {
  if (templates.empty()) throw std::invalid_argument("synthesize_sources: no templates");
  SynthesisBatch batch;
  for (std::size_t i = 0; i < simplifications.size(); ++i) {
    const PromptTemplate& tmpl = templates[i % templates.size()];
    try {
      std::string source = provider.generate(tmpl.render(simplifications[i]));
      CorpusRecord record;
      record.id = "synth-" + std::to_string(i + 1);
      record.source = std::move(source);
      record.target = simplifications[i];
      record.provenance = provider.name();
      record.split = Split::Train;
      record.meta["template_id"] = std::to_string(tmpl.id);
      batch.records.push_back(std::move(record));
    } catch (const std::exception& e) {
      batch.failures.push_back({i, e.what()});
    }
  }
  if (!simplifications.empty() && batch.records.empty()) {
    throw std::runtime_error("synthesis failed for every input (" +
                             std::to_string(batch.failures.size()) + " failures)");
  }
  return batch;
}

std::vector<HumanRating> load_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings file: " + path);

  std::vector<HumanRating> ratings;
  std::vector<CorpusDiagnostic> errors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      errors.push_back({line_no, "", "invalid JSON object"});
      continue;
    }
    if (!j.contains("id") || !j.at("id").is_string()) {
      errors.push_back({line_no, "id", "missing or non-string field \"id\""});
      continue;
    }
    if (!j.contains("rating") || !j.at("rating").is_number_integer()) {
      errors.push_back({line_no, "rating", "missing or non-integer field \"rating\""});
      continue;
    }
    const auto value = j.at("rating").get<std::int64_t>();
    if (value < 0 || value > 3) {
      errors.push_back({line_no, "rating",
                        "rating " + std::to_string(value) + " outside 0..3"});
      continue;
    }
    ratings.push_back({j.at("id").get<std::string>(), static_cast<int>(value)});
  }
  if (!errors.empty()) throw CorpusFormatError(path, std::move(errors));
  return ratings;
}

RatingSummary aggregate_ratings(std::span<const HumanRating> ratings) {
  if (ratings.empty()) throw std::invalid_argument("aggregate_ratings: empty input");
  RatingSummary summary;
  summary.count = ratings.size();
  for (const HumanRating& r : ratings) summary.mean += r.rating;
  summary.mean /= static_cast<double>(ratings.size());
  double var = 0.0;
  for (const HumanRating& r : ratings) {
    var += (r.rating - summary.mean) * (r.rating - summary.mean);
  }
  summary.std = std::sqrt(var / static_cast<double>(ratings.size()));
  return summary;
}

}  // namespace einfach

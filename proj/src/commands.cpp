#include "einfach/commands.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "einfach/complexity.hpp"
#include "einfach/corpus.hpp"
#include "einfach/hash.hpp"
#include "einfach/lm.hpp"
#include "einfach/metrics.hpp"
#include "einfach/text.hpp"

namespace einfach {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Shortest round-trip rendering, so config snapshots and CSV cells stay
// byte-stable across runs.
std::string fmt(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return {buf, ptr};
}

std::string fmt_fixed(double value, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << value;
  return os.str();
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string iso_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file_or_empty(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
}

void write_text_file(const std::string& path, const std::string& content) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

// Runs fn(0..n-1) on up to `jobs` threads; exceptions are rethrown for the
// lowest failing index so parallel runs fail like serial ones.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

void print_warnings(std::ostream& err, std::span<const CorpusDiagnostic> warnings) {
  for (const auto& w : warnings) err << "warning: " << w.message << "\n";
}

// Unreadable input files are data problems, not internal failures; format
// errors keep their per-line diagnostics.
std::vector<CorpusRecord> load_input_corpus(const std::string& path,
                                            std::vector<CorpusDiagnostic>* warnings,
                                            bool allow_empty_target = false) {
  try {
    return load_corpus(path, warnings, allow_empty_target);
  } catch (const CorpusFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string mean_std_cell(const MeanStd& value) {
  return fmt_fixed(value.mean, 2) + " ± " + fmt_fixed(value.std, 2);
}

json summary_to_json(const DistributionSummary& summary) {
  return json::parse(to_json_string(summary));
}

}  // namespace

RunManifest make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                          const std::map<std::string, std::string>& config, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.created = iso_utc_now();
  m.seed = seed;
  m.config = config;
  m.inputs = inputs;

  Fnv1a hash;
  hash.update(command);
  hash.update("\n");
  hash.update(kToolVersion);
  hash.update("\n");
  for (const auto& [key, value] : config) {
    hash.update(key);
    hash.update("=");
    hash.update(value);
    hash.update("\n");
  }
  for (const auto& input : inputs) {
    hash.update(input);
    hash.update("\n");
    hash.update(read_file_or_empty(input));
    hash.update(std::string_view("\0", 1));
  }
  hash.update(std::to_string(seed));
  m.run_id = hex64(hash.digest());
  return m;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json j{{"command", manifest.command},
         {"config", manifest.config},
         {"created", manifest.created},
         {"inputs", manifest.inputs},
         {"outputs", manifest.outputs},
         {"run_id", manifest.run_id},
         {"seed", manifest.seed},
         {"tool_version", manifest.tool_version}};
  write_text_file(path, j.dump(2) + "\n");
}

std::map<std::string, std::string> config_snapshot(const DecodeConfig& cfg) {
  std::map<std::string, std::string> snap{
      {"algorithm", std::string(to_string(cfg.algorithm))},
      {"max_length", std::to_string(cfg.max_length)},
      {"no_ngram_repeat_size", std::to_string(cfg.no_ngram_repeat_size)},
      {"num_beams", std::to_string(cfg.num_beams)},
      {"early_stopping", cfg.early_stopping ? "true" : "false"},
      {"top_p", fmt(cfg.top_p)},
      {"top_k", std::to_string(cfg.top_k)},
      {"temperature", fmt(cfg.temperature)},
      {"penalty_alpha", fmt(cfg.penalty_alpha)},
      {"repeat_window", std::to_string(cfg.repeat_window)},
      {"repeat_threshold", std::to_string(cfg.repeat_threshold)},
      {"seed", std::to_string(cfg.seed)},
  };
  for (const auto& [key, value] : cfg.extras) snap[key] = value;
  return snap;
}

std::string resolve_model_path(const std::string& name) {
  if (name.find('/') != std::string::npos) return name;
  std::error_code ec;
  if (fs::exists(name, ec)) return name;
  const char* dir = std::getenv("EINFACH_MODEL_DIR");
  if (dir == nullptr || *dir == '\0') return name;
  return (fs::path(dir) / name).string();
}

void cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<CorpusDiagnostic> warnings;
  const std::vector<CorpusRecord> refs = load_input_corpus(args.corpus, &warnings);
  const std::vector<CorpusRecord> preds =
      load_input_corpus(args.predictions, &warnings, /*allow_empty_target=*/true);
  print_warnings(err, warnings);

  std::unordered_map<std::string, const CorpusRecord*> by_id;
  by_id.reserve(refs.size());
  for (const auto& r : refs) by_id.emplace(r.id, &r);

  std::vector<std::string> missing_refs;
  std::unordered_map<std::string, bool> covered;
  for (const auto& p : preds) {
    if (by_id.count(p.id) == 0) {
      missing_refs.push_back(p.id);
    } else {
      covered[p.id] = true;
    }
  }
  std::vector<std::string> missing_preds;
  for (const auto& r : refs) {
    if (covered.count(r.id) == 0) missing_preds.push_back(r.id);
  }
  if (!missing_refs.empty() || !missing_preds.empty()) {
    std::ostringstream msg;
    msg << "id alignment failed:";
    if (!missing_refs.empty()) {
      msg << " " << missing_refs.size() << " prediction id(s) without reference (";
      for (std::size_t i = 0; i < missing_refs.size(); ++i) {
        if (i > 0) msg << ", ";
        msg << missing_refs[i];
      }
      msg << ")";
    }
    if (!missing_preds.empty()) {
      msg << (missing_refs.empty() ? " " : "; ") << missing_preds.size()
          << " reference id(s) without prediction (";
      for (std::size_t i = 0; i < missing_preds.size(); ++i) {
        if (i > 0) msg << ", ";
        msg << missing_preds[i];
      }
      msg << ")";
    }
    throw DataError(msg.str());
  }
  if (preds.empty()) throw DataError("no records to evaluate");

  std::vector<BleuReport> bleus(preds.size());
  std::vector<MeteorReport> meteors(preds.size());
  std::vector<SariReport> saris(preds.size());
  parallel_for(preds.size(), args.jobs, [&](std::size_t i) {
    const CorpusRecord& pred = preds[i];
    const CorpusRecord& ref = *by_id.at(pred.id);
    try {
      const Document pred_doc = make_document(pred.target);
      const Document ref_doc = make_document(ref.target);
      const Document src_doc = make_document(ref.source);
      bleus[i] = bleu(pred_doc, ref_doc);
      meteors[i] = meteor(pred_doc, ref_doc);
      saris[i] = sari(src_doc, pred_doc, ref_doc);
    } catch (const std::invalid_argument& e) {
      throw DataError("record \"" + pred.id + "\": " + e.what());
    }
  });

  double bleu_mean = 0.0;
  double meteor_mean = 0.0;
  double sari_mean = 0.0;
  std::size_t exact_chunk_count = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    bleu_mean += bleus[i].score;
    meteor_mean += meteors[i].score;
    sari_mean += saris[i].score;
    exact_chunk_count += meteors[i].exact_chunks ? 1 : 0;
  }
  const double n = static_cast<double>(preds.size());
  bleu_mean /= n;
  meteor_mean /= n;
  sari_mean /= n;

  const DistributionSummary bleu_dist = precision_distribution(bleus);
  const DistributionSummary del_dist = sari_delete_distribution(saris);

  RunManifest manifest = make_manifest(
      "eval", {args.corpus, args.predictions},
      {{"distributions", args.distributions ? "true" : "false"}, {"jobs", std::to_string(args.jobs)}},
      0);
  const std::string run_ref = "# run_id: " + manifest.run_id + "\n";

  ensure_dir(args.out_dir);
  const auto out_path = [&](const char* name) { return (fs::path(args.out_dir) / name).string(); };

  {
    std::ostringstream csv;
    csv << run_ref << "id,bleu,meteor,sari\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      csv << preds[i].id << "," << fmt(bleus[i].score) << "," << fmt(meteors[i].score) << ","
          << fmt(saris[i].score) << "\n";
    }
    write_text_file(out_path("records.csv"), csv.str());
    manifest.outputs.push_back(out_path("records.csv"));
  }

  {
    json j{{"run_id", manifest.run_id},
           {"records", preds.size()},
           {"bleu_mean", bleu_mean},
           {"meteor_mean", meteor_mean},
           {"sari_mean", sari_mean},
           {"meteor_exact_chunks", exact_chunk_count},
           {"bleu_precision", summary_to_json(bleu_dist)},
           {"sari_del_precision", summary_to_json(del_dist)}};
    write_text_file(out_path("summary.json"), j.dump(2) + "\n");
    manifest.outputs.push_back(out_path("summary.json"));
  }

  if (args.distributions) {
    std::ostringstream pcsv;
    pcsv << run_ref << "id,p1,p2,p3,p4\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      pcsv << preds[i].id;
      for (const double p : bleus[i].precisions) pcsv << "," << fmt(p);
      pcsv << "\n";
    }
    write_text_file(out_path("bleu_precisions.csv"), pcsv.str());
    manifest.outputs.push_back(out_path("bleu_precisions.csv"));

    std::ostringstream dcsv;
    dcsv << run_ref << "id,del_p1,del_p2,del_p3,del_p4\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      dcsv << preds[i].id;
      for (const double p : saris[i].del_precision) dcsv << "," << fmt(p);
      dcsv << "\n";
    }
    write_text_file(out_path("sari_del_precisions.csv"), dcsv.str());
    manifest.outputs.push_back(out_path("sari_del_precisions.csv"));
  }

  write_manifest(manifest, out_path("manifest.json"));

  out << pad_right("records", 9) << pad_left("BLEU", 7) << pad_left("METEOR", 9)
      << pad_left("SARI", 7) << "\n";
  out << pad_right(std::to_string(preds.size()), 9) << pad_left(fmt_fixed(bleu_mean, 2), 7)
      << pad_left(fmt_fixed(meteor_mean, 4), 9) << pad_left(fmt_fixed(sari_mean, 2), 7) << "\n";
}

void cmd_complexity(const ComplexityArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<CorpusDiagnostic> warnings;
  const std::vector<CorpusRecord> corpus = load_input_corpus(args.corpus, &warnings);
  print_warnings(err, warnings);

  if (args.field != "target" && args.field != "source") {
    throw DataError("unknown field \"" + args.field + "\" (expected target or source)");
  }
  std::string meta_key;
  if (args.group_by.rfind("meta:", 0) == 0) meta_key = args.group_by.substr(5);
  if (args.group_by != "provenance" && args.group_by != "split" && meta_key.empty()) {
    throw DataError("unknown group key \"" + args.group_by +
                    "\" (expected provenance, split, or meta:<key>)");
  }

  const SeparableVerbLexicon lexicon =
      args.verbs.empty() ? SeparableVerbLexicon::builtin() : SeparableVerbLexicon::load(args.verbs);

  std::map<std::string, std::vector<Document>> groups;
  std::size_t skipped = 0;
  for (const auto& record : corpus) {
    std::string group;
    if (!meta_key.empty()) {
      const auto it = record.meta.find(meta_key);
      if (it == record.meta.end()) {
        throw DataError("record \"" + record.id + "\" has no meta key \"" + meta_key + "\"");
      }
      group = it->second;
    } else if (args.group_by == "split") {
      group = std::string(to_string(record.split));
    } else {
      group = record.provenance;
    }
    Document doc = make_document(args.field == "target" ? record.target : record.source);
    if (doc.tokens.empty()) {
      ++skipped;
      continue;
    }
    groups[group].push_back(std::move(doc));
  }
  if (skipped > 0) {
    err << "warning: skipped " << skipped << " record(s) with an empty " << args.field
        << " field\n";
  }
  if (groups.empty()) throw DataError("no documents to profile");

  std::vector<std::pair<std::string, ComplexityProfile>> profiles;
  for (const auto& [name, docs] : groups) {
    profiles.emplace_back(name, profile(docs, lexicon));
  }

  const char* kRows[] = {"documents", "sentence length", "commas per sentence",
                         "verb compound distance", "words per line"};
  std::size_t label_width = 0;
  for (const char* row : kRows) label_width = std::max(label_width, std::string(row).size());

  std::vector<std::vector<std::string>> cells;  // per group: column of cells
  for (const auto& [name, prof] : profiles) {
    std::vector<std::string> column{name,
                                    std::to_string(prof.documents),
                                    mean_std_cell(prof.sentence_length),
                                    mean_std_cell(prof.commas_per_sentence),
                                    mean_std_cell(prof.verb_compound_distance),
                                    mean_std_cell(prof.words_per_line)};
    cells.push_back(std::move(column));
  }
  std::vector<std::size_t> widths(cells.size(), 0);
  for (std::size_t g = 0; g < cells.size(); ++g) {
    for (const auto& cell : cells[g]) {
      // the ± glyph is two UTF-8 bytes but one display column
      const std::size_t visual = cell.size() - (cell.find("±") == std::string::npos ? 0 : 1);
      widths[g] = std::max(widths[g], visual);
    }
  }
  const auto pad_cell = [&](const std::string& cell, std::size_t width) {
    const std::size_t visual = cell.size() - (cell.find("±") == std::string::npos ? 0 : 1);
    return std::string(width - std::min(width, visual), ' ') + cell;
  };

  out << pad_right("metric", label_width);
  for (std::size_t g = 0; g < cells.size(); ++g) out << "  " << pad_cell(cells[g][0], widths[g]);
  out << "\n";
  for (std::size_t row = 0; row < 5; ++row) {
    out << pad_right(kRows[row], label_width);
    for (std::size_t g = 0; g < cells.size(); ++g) {
      out << "  " << pad_cell(cells[g][row + 1], widths[g]);
    }
    out << "\n";
  }

  if (!args.out_dir.empty()) {
    RunManifest manifest = make_manifest(
        "complexity", {args.corpus},
        {{"group_by", args.group_by}, {"field", args.field}, {"verbs", args.verbs}}, 0);
    const auto ms = [](const MeanStd& v) { return json{{"mean", v.mean}, {"std", v.std}}; };
    json groups_json = json::object();
    for (const auto& [name, prof] : profiles) {
      groups_json[name] = {{"documents", prof.documents},
                           {"sentence_length", ms(prof.sentence_length)},
                           {"commas_per_sentence", ms(prof.commas_per_sentence)},
                           {"verb_compound_distance", ms(prof.verb_compound_distance)},
                           {"words_per_line", ms(prof.words_per_line)}};
    }
    json j{{"run_id", manifest.run_id},
           {"group_by", args.group_by},
           {"field", args.field},
           {"groups", groups_json}};
    ensure_dir(args.out_dir);
    const std::string json_path = (fs::path(args.out_dir) / "profile.json").string();
    write_text_file(json_path, j.dump(2) + "\n");
    manifest.outputs.push_back(json_path);
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());
  }
}

void cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err) {
  DecodeConfig cfg = args.cfg;
  try {
    cfg.validate();
    if (!args.config_file.empty()) cfg.merge_file(args.config_file);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }

  const std::string model_path = resolve_model_path(args.model);
  NGramLM lm = [&] {
    try {
      return NGramLM::load(model_path);
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  }();

  std::vector<CorpusDiagnostic> warnings;
  const std::vector<CorpusRecord> corpus = load_input_corpus(args.corpus, &warnings);
  print_warnings(err, warnings);
  if (corpus.empty()) throw DataError("no records to decode");

  std::vector<std::string> inputs{model_path, args.corpus};
  if (!args.config_file.empty()) inputs.push_back(args.config_file);
  auto snapshot = config_snapshot(cfg);
  snapshot["jobs"] = std::to_string(args.jobs);
  RunManifest manifest = make_manifest("decode", inputs, snapshot, cfg.seed);

  std::vector<GenerationResult> results(corpus.size());
  parallel_for(corpus.size(), args.jobs, [&](std::size_t i) {
    DecodeConfig record_cfg = cfg;
    record_cfg.seed = mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(i) + 1));
    const std::vector<int> prompt = make_prompt(lm.vocab(), corpus[i].source);
    results[i] = decode(lm, prompt, record_cfg);
  });

  std::map<std::string, std::size_t> halt_counts;
  std::vector<CorpusRecord> predictions;
  predictions.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const GenerationResult& result = results[i];
    CorpusRecord record = corpus[i];
    record.target = decode_text(lm.vocab(), result.tokens);
    record.meta["algorithm"] = std::string(to_string(cfg.algorithm));
    record.meta["halt_reason"] = std::string(to_string(result.halt_reason));
    record.meta["log_prob"] = fmt(result.total_log_prob);
    record.meta["run_id"] = manifest.run_id;
    halt_counts[std::string(to_string(result.halt_reason))]++;
    predictions.push_back(std::move(record));
  }

  ensure_parent_dir(args.out);
  save_corpus(args.out, predictions);
  manifest.outputs.push_back(args.out);
  write_manifest(manifest, args.out + ".manifest.json");

  out << "decoded " << corpus.size() << " record(s) with " << to_string(cfg.algorithm) << "\n";
  out << "halt reasons:";
  bool first = true;
  for (const auto& [reason, count] : halt_counts) {
    out << (first ? " " : ", ") << reason << " " << count;
    first = false;
  }
  out << "\n";
}

void cmd_stats(const StatsArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<CorpusDiagnostic> warnings;
  const std::vector<CorpusRecord> corpus = load_input_corpus(args.corpus, &warnings);
  print_warnings(err, warnings);

  const SplitStats stats = split_stats(corpus);
  out << render_table(stats);

  if (!args.out_dir.empty()) {
    RunManifest manifest = make_manifest("stats", {args.corpus}, {}, 0);
    const auto cell = [](const SplitCell& c) {
      return json{{"documents", c.documents}, {"words", c.words}};
    };
    json rows = json::object();
    for (const auto& [provenance, cells] : stats.rows) {
      rows[provenance] = {{"train", cell(cells[static_cast<int>(Split::Train)])},
                          {"test", cell(cells[static_cast<int>(Split::Test)])}};
    }
    json j{{"run_id", manifest.run_id},
           {"rows", rows},
           {"totals",
            {{"train", cell(stats.totals[static_cast<int>(Split::Train)])},
             {"test", cell(stats.totals[static_cast<int>(Split::Test)])}}}};
    ensure_dir(args.out_dir);
    const std::string json_path = (fs::path(args.out_dir) / "stats.json").string();
    write_text_file(json_path, j.dump(2) + "\n");
    manifest.outputs.push_back(json_path);
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());
  }
}

void cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<CorpusDiagnostic> warnings;
  const std::vector<CorpusRecord> corpus = load_input_corpus(args.corpus, &warnings);
  print_warnings(err, warnings);

  NGramLM lm = [&] {
    try {
      return NGramLM::train(corpus, args.order, args.discount, args.min_count);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }();

  const std::string model_path = resolve_model_path(args.model_out);
  ensure_parent_dir(model_path);
  lm.save(model_path);

  RunManifest manifest =
      make_manifest("train", {args.corpus},
                    {{"order", std::to_string(args.order)},
                     {"discount", fmt(args.discount)},
                     {"min_count", std::to_string(args.min_count)}},
                    0);
  manifest.outputs.push_back(model_path);
  write_manifest(manifest, model_path + ".manifest.json");

  double ce_sum = 0.0;
  std::size_t ce_count = 0;
  for (const auto& record : corpus) {
    const std::vector<int> source = encode_text(lm.vocab(), record.source);
    const std::vector<int> target = encode_text(lm.vocab(), record.target);
    if (target.empty()) continue;
    ce_sum += cross_entropy(lm, source, target);
    ++ce_count;
  }

  out << "trained order-" << args.order << " model on " << corpus.size() << " record(s): vocab "
      << lm.vocab().size() << " tokens\n";
  if (ce_count > 0) {
    out << "train cross-entropy: " << fmt_fixed(ce_sum / static_cast<double>(ce_count), 4)
        << " nats/token\n";
  }
  out << "saved to " << model_path << "\n";
}

void cmd_ratings(const RatingsArgs& args, std::ostream& out, std::ostream&) {
  const std::vector<HumanRating> ratings = [&] {
    try {
      return load_ratings(args.ratings);
    } catch (const CorpusFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  }();
  const RatingSummary summary = [&] {
    try {
      return aggregate_ratings(ratings);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }();

  out << "ratings: " << fmt_fixed(summary.mean, 2) << " ± " << fmt_fixed(summary.std, 2)
      << " (n=" << summary.count << ")\n";

  if (!args.out_dir.empty()) {
    RunManifest manifest = make_manifest("ratings", {args.ratings}, {}, 0);
    json j{{"run_id", manifest.run_id},
           {"count", summary.count},
           {"mean", summary.mean},
           {"std", summary.std}};
    ensure_dir(args.out_dir);
    const std::string json_path = (fs::path(args.out_dir) / "ratings.json").string();
    write_text_file(json_path, j.dump(2) + "\n");
    manifest.outputs.push_back(json_path);
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());
  }
}

void cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<CorpusDiagnostic> warnings;
  const std::vector<CorpusRecord> corpus = load_input_corpus(args.corpus, &warnings);
  print_warnings(err, warnings);
  if (corpus.empty()) throw DataError("no simplifications to synthesize from");

  const std::vector<PromptTemplate> templates = [&] {
    try {
      return load_templates(args.templates);
    } catch (const CorpusFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  }();

  std::vector<std::string> simplifications;
  simplifications.reserve(corpus.size());
  for (const auto& record : corpus) simplifications.push_back(record.target);

  EchoProvider provider(args.prefix);
  const SynthesisBatch batch = [&] {
    try {
      return synthesize_sources(simplifications, provider, templates);
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  }();

  RunManifest manifest =
      make_manifest("synth", {args.corpus, args.templates}, {{"prefix", args.prefix}}, 0);
  std::vector<CorpusRecord> records = batch.records;
  for (auto& record : records) record.meta["run_id"] = manifest.run_id;

  ensure_parent_dir(args.out);
  save_corpus(args.out, records);
  manifest.outputs.push_back(args.out);
  write_manifest(manifest, args.out + ".manifest.json");

  for (const auto& failure : batch.failures) {
    err << "warning: simplification " << failure.index << ": " << failure.reason << "\n";
  }
  out << "synthesized " << records.size() << " source(s) from " << simplifications.size()
      << " simplification(s) using " << templates.size() << " template(s)";
  if (!batch.failures.empty()) out << " (" << batch.failures.size() << " failed)";
  out << "\n";
}

}  // namespace einfach

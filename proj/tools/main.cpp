#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "einfach/commands.hpp"
#include "einfach/corpus.hpp"

namespace {

using einfach::CorpusFormatError;
using einfach::DataError;
using json = nlohmann::json;

void emit_error_list(const json& errors) {
  std::cerr << json{{"errors", errors}}.dump() << "\n";
}

void emit_single_error(const std::string& kind, const std::string& message) {
  emit_error_list(json::array({{{"kind", kind}, {"message", message}}}));
}

// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal. Every failure also
// prints a machine-readable {"errors": [...]} line on stderr.
int run_guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const CorpusFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    json errors = json::array();
    for (const auto& d : e.diagnostics()) {
      json entry{{"kind", "data"}, {"message", d.message}};
      if (d.line > 0) entry["line"] = d.line;
      if (!d.field.empty()) entry["field"] = d.field;
      errors.push_back(entry);
    }
    emit_error_list(errors);
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    emit_single_error("data", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    emit_single_error("data", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    emit_single_error("internal", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"einfach – measurement and generation toolkit for German text simplification"};
  app.set_version_flag("--version", einfach::kToolVersion);
  app.require_subcommand(1);
  int rc = 0;

  einfach::EvalArgs eval;
  auto* eval_cmd =
      app.add_subcommand("eval", "Score predictions against references (BLEU, METEOR, SARI)");
  eval_cmd->add_option("--corpus", eval.corpus, "Reference corpus (JSONL)")->required();
  eval_cmd->add_option("--predictions", eval.predictions, "Predictions corpus (JSONL)")->required();
  eval_cmd->add_option("--out-dir", eval.out_dir, "Report directory")->capture_default_str();
  eval_cmd->add_flag("--distributions", eval.distributions,
                     "Also write per-record n-gram precision CSVs");
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads")->check(CLI::PositiveNumber);
  eval_cmd->callback([&] { rc = run_guarded([&] { einfach::cmd_eval(eval, std::cout, std::cerr); }); });

  einfach::ComplexityArgs complexity;
  auto* complexity_cmd =
      app.add_subcommand("complexity", "Profile linguistic complexity per group");
  complexity_cmd->add_option("--corpus", complexity.corpus, "Corpus (JSONL)")->required();
  complexity_cmd->add_option("--group-by", complexity.group_by,
                             "Grouping key: provenance, split, or meta:<key>")
      ->capture_default_str();
  complexity_cmd->add_option("--field", complexity.field, "Text side to profile")
      ->check(CLI::IsMember({"target", "source"}))
      ->capture_default_str();
  complexity_cmd->add_option("--verbs", complexity.verbs, "Separable-verb lexicon file");
  complexity_cmd->add_option("--out-dir", complexity.out_dir, "Optional JSON output directory");
  complexity_cmd->callback(
      [&] { rc = run_guarded([&] { einfach::cmd_complexity(complexity, std::cout, std::cerr); }); });

  einfach::DecodeArgs decode;
  std::string algorithm;
  bool do_sample = false;
  auto* decode_cmd = app.add_subcommand("decode", "Generate simplifications for a corpus");
  decode_cmd->add_option("--model", decode.model, "Model file (resolved via $EINFACH_MODEL_DIR)")
      ->required();
  decode_cmd->add_option("--corpus", decode.corpus, "Corpus whose sources are decoded")->required();
  decode_cmd->add_option("--out", decode.out, "Predictions file")->capture_default_str();
  decode_cmd->add_option("--config", decode.config_file, "JSON config file; overrides flags");
  decode_cmd->add_option("--algorithm", algorithm, "Decoding algorithm")
      ->check(CLI::IsMember({"greedy", "beam", "sampling", "contrastive"}));
  decode_cmd->add_flag("--do_sample", do_sample, "Select the sampling algorithm");
  decode_cmd->add_option("--max_length", decode.cfg.max_length)->capture_default_str();
  decode_cmd->add_option("--no_ngram_repeat_size", decode.cfg.no_ngram_repeat_size)
      ->capture_default_str();
  decode_cmd->add_option("--num_beams", decode.cfg.num_beams)->capture_default_str();
  decode_cmd->add_option("--early_stopping", decode.cfg.early_stopping)->capture_default_str();
  decode_cmd->add_option("--top_p", decode.cfg.top_p)->capture_default_str();
  decode_cmd->add_option("--top_k", decode.cfg.top_k)->capture_default_str();
  decode_cmd->add_option("--temperature", decode.cfg.temperature)->capture_default_str();
  decode_cmd->add_option("--penalty_alpha", decode.cfg.penalty_alpha)->capture_default_str();
  decode_cmd->add_option("--repeat_window", decode.cfg.repeat_window)->capture_default_str();
  decode_cmd->add_option("--repeat_threshold", decode.cfg.repeat_threshold)->capture_default_str();
  decode_cmd->add_option("--seed", decode.cfg.seed)->capture_default_str();
  decode_cmd->add_option("--jobs", decode.jobs, "Worker threads")->check(CLI::PositiveNumber);
  decode_cmd->callback([&] {
    rc = run_guarded([&] {
      if (!algorithm.empty()) {
        decode.cfg.algorithm = einfach::parse_algorithm(algorithm);
      } else if (do_sample) {
        decode.cfg.algorithm = einfach::Algorithm::Sampling;
      }
      einfach::cmd_decode(decode, std::cout, std::cerr);
    });
  });

  einfach::StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics per provenance and split");
  stats_cmd->add_option("--corpus", stats.corpus, "Corpus (JSONL)")->required();
  stats_cmd->add_option("--out-dir", stats.out_dir, "Optional JSON output directory");
  stats_cmd->callback(
      [&] { rc = run_guarded([&] { einfach::cmd_stats(stats, std::cout, std::cerr); }); });

  einfach::TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a backoff n-gram model");
  train_cmd->add_option("--corpus", train.corpus, "Training corpus (JSONL)")->required();
  train_cmd->add_option("--out", train.model_out, "Model file (resolved via $EINFACH_MODEL_DIR)")
      ->capture_default_str();
  train_cmd->add_option("--order", train.order, "N-gram order")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();
  train_cmd->add_option("--discount", train.discount, "Absolute discount in [0,1)")
      ->capture_default_str();
  train_cmd->add_option("--min_count", train.min_count, "Vocabulary count threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->callback(
      [&] { rc = run_guarded([&] { einfach::cmd_train(train, std::cout, std::cerr); }); });

  einfach::RatingsArgs ratings;
  auto* ratings_cmd = app.add_subcommand("ratings", "Aggregate human agreement ratings");
  ratings_cmd->add_option("--ratings", ratings.ratings, "Ratings file (JSONL)")->required();
  ratings_cmd->add_option("--out-dir", ratings.out_dir, "Optional JSON output directory");
  ratings_cmd->callback(
      [&] { rc = run_guarded([&] { einfach::cmd_ratings(ratings, std::cout, std::cerr); }); });

  einfach::SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "Synthesize everyday-language sources for simplifications");
  synth_cmd->add_option("--corpus", synth.corpus, "Corpus providing the simplifications")
      ->required();
  synth_cmd->add_option("--templates", synth.templates, "Prompt template file")->required();
  synth_cmd->add_option("--out", synth.out, "Synthesized corpus file")->capture_default_str();
  synth_cmd->add_option("--prefix", synth.prefix, "Echo provider prefix")->capture_default_str();
  synth_cmd->callback(
      [&] { rc = run_guarded([&] { einfach::cmd_synth(synth, std::cout, std::cerr); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    emit_single_error("usage", e.what());
    return 1;
  }
  return rc;
}

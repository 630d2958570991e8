#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "einfach/lm.hpp"

namespace einfach {

enum class Algorithm { Greedy, Beam, Sampling, Contrastive };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

/// Decoding parameters. Field and file keys follow the published
/// parameter names (no_ngram_repeat_size, max_length, num_beams,
/// early_stopping, top_p, top_k, temperature, penalty_alpha); the
/// repetition window/threshold and seed are additions of this tool.
struct DecodeConfig {
  Algorithm algorithm = Algorithm::Greedy;
  int max_length = 1024;           // generated tokens, end token included
  int no_ngram_repeat_size = 5;
  int num_beams = 5;
  bool early_stopping = true;
  double top_p = 0.95;
  int top_k = 5;
  double temperature = 0.5;
  double penalty_alpha = 0.05;
  int repeat_window = 30;          // trailing window for the frequency halt
  int repeat_threshold = 4;        // max occurrences of a token per window
  std::uint64_t seed = 0;
  std::map<std::string, std::string> extras;  // recorded but unused keys

  void validate() const;  // throws naming the offending key

  // JSON object file keyed exactly as above; keys present in the file
  // override the current values. "do_sample": true selects the sampling
  // algorithm. Finetuning keys (learning_rate, weight_decay, batch_size,
  // n_epochs) are recorded in extras and ignored.
  void merge_json_text(std::string_view text, const std::string& name);
  void merge_file(const std::string& path);
  static DecodeConfig from_file(const std::string& path);
};

enum class HaltReason { Eos, MaxLength, RepetitionHalt, NoValidToken };

std::string_view to_string(HaltReason reason);

struct GenerationResult {
  std::vector<int> tokens;  // generated tokens; ends with EOS when halt_reason == Eos
  // log P(token | context) under the model's unmasked distribution
  std::vector<double> step_log_probs;
  double total_log_prob = 0.0;
  HaltReason halt_reason = HaltReason::MaxLength;
  int halted_token = -1;  // the blocked token when halt_reason == RepetitionHalt
};

// Dispatches on cfg.algorithm. The prompt must end with the SEP token.
// All algorithms zero the probability of any candidate that would repeat
// an n-gram of size no_ngram_repeat_size within the generated tokens, and
// halt (without emitting) when the chosen token would push its frequency
// within the trailing repeat_window beyond repeat_threshold.
GenerationResult decode(const LanguageModel& lm, std::span<const int> prompt,
                        const DecodeConfig& cfg);

struct Violation {
  std::size_t position = 0;
  std::string kind;  // "ngram_repeat", "window_frequency", "halt_claim"
  std::string message;
};

// Empty iff the generated tokens contain no repeated
// no_ngram_repeat_size-gram, every trailing window respects
// repeat_threshold, and a RepetitionHalt result really stops exactly one
// token before its first would-be violation.
std::vector<Violation> check_constraints(const GenerationResult& result, const DecodeConfig& cfg);

}  // namespace einfach

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "decode_oracle.hpp"
#include "einfach/corpus.hpp"
#include "einfach/decode.hpp"
#include "einfach/lm.hpp"

using namespace einfach;

namespace {

std::vector<CorpusRecord> corpus_of(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<CorpusRecord> corpus;
  int n = 0;
  for (const auto& [source, target] : pairs) {
    CorpusRecord r;
    r.id = "r" + std::to_string(++n);
    r.source = source;
    r.target = target;
    r.provenance = "fixture";
    corpus.push_back(std::move(r));
  }
  return corpus;
}

// follower counts after SEP: a 5, b 3, c 2
std::vector<CorpusRecord> skewed_corpus() {
  std::vector<CorpusRecord> corpus;
  const char* targets[] = {"a", "a", "a", "a", "a", "b", "b", "b", "c", "c"};
  int n = 0;
  for (const char* target : targets) {
    CorpusRecord r;
    r.id = "s" + std::to_string(++n);
    r.source = "q";
    r.target = target;
    r.provenance = "fixture";
    corpus.push_back(std::move(r));
  }
  return corpus;
}

std::vector<CorpusRecord> random_corpus(std::mt19937& rng) {
  std::vector<CorpusRecord> corpus;
  const int docs = 2 + static_cast<int>(rng() % 3);
  for (int d = 0; d < docs; ++d) {
    std::string target;
    const unsigned len = 3 + rng() % 6;
    for (unsigned i = 0; i < len; ++i) target += (rng() % 2 == 0) ? "a " : "b ";
    CorpusRecord r;
    r.id = "d" + std::to_string(d);
    r.target = target;
    r.provenance = "fixture";
    corpus.push_back(std::move(r));
  }
  return corpus;
}

void check_equal(const GenerationResult& got, const GenerationResult& want) {
  CHECK(got.tokens == want.tokens);
  CHECK(got.step_log_probs == want.step_log_probs);
  CHECK(got.total_log_prob == want.total_log_prob);
  CHECK(got.halt_reason == want.halt_reason);
  CHECK(got.halted_token == want.halted_token);
}

}  // namespace

TEST_CASE("config defaults") {
  const DecodeConfig cfg;
  CHECK(cfg.algorithm == Algorithm::Greedy);
  CHECK(cfg.max_length == 1024);
  CHECK(cfg.no_ngram_repeat_size == 5);
  CHECK(cfg.num_beams == 5);
  CHECK(cfg.early_stopping == true);
  CHECK(cfg.top_p == 0.95);
  CHECK(cfg.top_k == 5);
  CHECK(cfg.temperature == 0.5);
  CHECK(cfg.penalty_alpha == 0.05);
  CHECK(cfg.repeat_window == 30);
  CHECK(cfg.repeat_threshold == 4);
  CHECK(cfg.seed == 0);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config validation names the offending key") {
  const auto message_of = [](DecodeConfig cfg) -> std::string {
    try {
      cfg.validate();
      return "";
    } catch (const std::invalid_argument& e) {
      return e.what();
    }
  };
  DecodeConfig cfg;
  cfg.max_length = 0;
  CHECK(message_of(cfg).find("max_length") == 0);
  cfg = DecodeConfig{};
  cfg.no_ngram_repeat_size = 0;
  CHECK(message_of(cfg).find("no_ngram_repeat_size") == 0);
  cfg = DecodeConfig{};
  cfg.num_beams = 0;
  CHECK(message_of(cfg).find("num_beams") == 0);
  cfg = DecodeConfig{};
  cfg.top_p = 0.0;
  CHECK(message_of(cfg).find("top_p") == 0);
  cfg = DecodeConfig{};
  cfg.top_p = 1.5;
  CHECK(message_of(cfg).find("top_p") == 0);
  cfg = DecodeConfig{};
  cfg.top_k = 0;
  CHECK(message_of(cfg).find("top_k") == 0);
  cfg = DecodeConfig{};
  cfg.temperature = 0.0;
  CHECK(message_of(cfg).find("temperature") == 0);
  cfg = DecodeConfig{};
  cfg.penalty_alpha = 1.5;
  CHECK(message_of(cfg).find("penalty_alpha") == 0);
  cfg = DecodeConfig{};
  cfg.repeat_window = 0;
  CHECK(message_of(cfg).find("repeat_window") == 0);
  cfg = DecodeConfig{};
  cfg.repeat_threshold = 0;
  CHECK(message_of(cfg).find("repeat_threshold") == 0);
}

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("greedy") == Algorithm::Greedy);
  CHECK(parse_algorithm("beam") == Algorithm::Beam);
  CHECK(parse_algorithm("sampling") == Algorithm::Sampling);
  CHECK(parse_algorithm("contrastive") == Algorithm::Contrastive);
  CHECK(to_string(Algorithm::Contrastive) == "contrastive");
  CHECK_THROWS_AS(parse_algorithm("exhaustive"), std::invalid_argument);
}

TEST_CASE("config merge: do_sample and explicit algorithm") {
  DecodeConfig cfg;
  cfg.merge_json_text(R"({"do_sample": true})", "inline");
  CHECK(cfg.algorithm == Algorithm::Sampling);

  cfg = DecodeConfig{};
  cfg.merge_json_text(R"({"algorithm": "beam", "do_sample": true})", "inline");
  CHECK(cfg.algorithm == Algorithm::Beam);

  cfg = DecodeConfig{};
  cfg.merge_json_text(R"({"do_sample": false})", "inline");
  CHECK(cfg.algorithm == Algorithm::Greedy);
}

TEST_CASE("config merge: values, extras, and errors") {
  DecodeConfig cfg;
  cfg.merge_json_text(
      R"({"max_length": 64, "temperature": 0.9, "early_stopping": false, "seed": 7,
          "learning_rate": 0.0001, "n_epochs": 3})",
      "inline");
  CHECK(cfg.max_length == 64);
  CHECK(cfg.temperature == 0.9);
  CHECK(cfg.early_stopping == false);
  CHECK(cfg.seed == 7);
  CHECK(cfg.extras.at("learning_rate") == "0.0001");
  CHECK(cfg.extras.at("n_epochs") == "3");
  CHECK(cfg.num_beams == 5);  // untouched keys keep their value

  const auto error_of = [](const std::string& text) -> std::string {
    DecodeConfig fresh;
    try {
      fresh.merge_json_text(text, "inline");
      return "";
    } catch (const std::runtime_error& e) {
      return e.what();
    }
  };
  CHECK(error_of(R"({"beam_width": 3})").find("beam_width") != std::string::npos);
  CHECK(error_of(R"({"top_p": "hoch"})").find("top_p") != std::string::npos);
  CHECK(error_of(R"({"max_length": 0})").find("max_length") != std::string::npos);
  CHECK(error_of(R"([1,2,3])").find("JSON object") != std::string::npos);
  CHECK(error_of("kein json").find("JSON object") != std::string::npos);
  CHECK(error_of(R"({"algorithm": "exhaustive"})").find("algorithm") != std::string::npos);
}

TEST_CASE("config file loading") {
  const auto path = std::filesystem::temp_directory_path() /
                    ("einfach-cfg-" + std::to_string(std::random_device{}()) + ".json");
  {
    std::ofstream out(path);
    out << R"({"algorithm": "contrastive", "penalty_alpha": 0.3})";
  }
  const DecodeConfig cfg = DecodeConfig::from_file(path.string());
  CHECK(cfg.algorithm == Algorithm::Contrastive);
  CHECK(cfg.penalty_alpha == 0.3);
  CHECK(cfg.top_k == 5);

  DecodeConfig flags;
  flags.algorithm = Algorithm::Greedy;
  flags.top_k = 9;
  flags.merge_file(path.string());  // file keys override current values
  CHECK(flags.algorithm == Algorithm::Contrastive);
  CHECK(flags.penalty_alpha == 0.3);
  CHECK(flags.top_k == 9);

  std::filesystem::remove(path);
  CHECK_THROWS_AS(DecodeConfig::from_file(path.string()), std::runtime_error);
}

TEST_CASE("beam(1), near-zero temperature, and plain-probability contrastive reduce to greedy") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const NGramLM lm = NGramLM::train(random_corpus(rng), 1 + static_cast<int>(rng() % 3),
                                      (trial % 2 == 0) ? 0.0 : 0.3, 1);
    const auto prompt = make_prompt(lm.vocab(), trial % 2 == 0 ? "a b" : "b");

    DecodeConfig base;
    base.max_length = 8;
    base.no_ngram_repeat_size = 2 + static_cast<int>(rng() % 2);
    base.repeat_window = 3 + static_cast<int>(rng() % 3);
    base.repeat_threshold = 2;
    base.algorithm = Algorithm::Greedy;
    const GenerationResult greedy = decode(lm, prompt, base);

    DecodeConfig beam = base;
    beam.algorithm = Algorithm::Beam;
    beam.num_beams = 1;
    beam.early_stopping = true;
    check_equal(decode(lm, prompt, beam), greedy);
    beam.early_stopping = false;
    check_equal(decode(lm, prompt, beam), greedy);

    DecodeConfig sampled = base;
    sampled.algorithm = Algorithm::Sampling;
    sampled.temperature = 1e-7;
    sampled.seed = rng();
    check_equal(decode(lm, prompt, sampled), greedy);

    DecodeConfig contrastive = base;
    contrastive.algorithm = Algorithm::Contrastive;
    contrastive.penalty_alpha = 0.0;
    contrastive.top_k = 1;
    check_equal(decode(lm, prompt, contrastive), greedy);
    contrastive.top_k = 3;
    check_equal(decode(lm, prompt, contrastive), greedy);
  }
}

TEST_CASE("n-gram masking breaks the loop the model prefers") {
  const auto corpus = corpus_of({{"", "a b a b a b a b a b"}});
  const NGramLM lm = NGramLM::train(corpus, 3, 0.0, 2);
  const int a = lm.vocab().id("a");
  const int b = lm.vocab().id("b");
  const auto prompt = make_prompt(lm.vocab(), "");

  DecodeConfig unconstrained;
  unconstrained.max_length = 12;
  unconstrained.no_ngram_repeat_size = 50;
  unconstrained.repeat_threshold = 12;  // keep the window halt out of the way
  const GenerationResult looped = decode(lm, prompt, unconstrained);
  CHECK(looped.tokens == std::vector<int>{a, b, a, b, a, b, a, b, a, b, a, b});
  CHECK(looped.halt_reason == HaltReason::MaxLength);

  DecodeConfig masked = unconstrained;
  masked.no_ngram_repeat_size = 3;
  const GenerationResult broken = decode(lm, prompt, masked);
  CHECK(broken.tokens == std::vector<int>{a, b, a, b, Vocabulary::kEos});
  CHECK(broken.halt_reason == HaltReason::Eos);
  CHECK(check_constraints(broken, masked).empty());

  // the unconstrained output is exactly what the mask forbids
  const auto violations = check_constraints(looped, masked);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations.front().kind == "ngram_repeat");
}

TEST_CASE("window frequency halts before the repeat is emitted") {
  const auto corpus = corpus_of({{"", "a a a a a a a a"}});
  const NGramLM lm = NGramLM::train(corpus, 2, 0.0, 2);
  const int a = lm.vocab().id("a");
  const auto prompt = make_prompt(lm.vocab(), "");

  DecodeConfig cfg;
  cfg.max_length = 20;
  cfg.no_ngram_repeat_size = 50;
  cfg.repeat_window = 4;
  cfg.repeat_threshold = 3;
  for (const Algorithm algorithm :
       {Algorithm::Greedy, Algorithm::Beam, Algorithm::Sampling, Algorithm::Contrastive}) {
    DecodeConfig local = cfg;
    local.algorithm = algorithm;
    local.temperature = 1e-7;  // drives sampling to the argmax
    const GenerationResult res = decode(lm, prompt, local);
    CHECK(res.tokens == std::vector<int>{a, a, a});
    CHECK(res.halt_reason == HaltReason::RepetitionHalt);
    CHECK(res.halted_token == a);
    CHECK(check_constraints(res, local).empty());
  }
}

TEST_CASE("check_constraints: hand-built sequences") {
  DecodeConfig cfg;
  cfg.repeat_window = 4;
  cfg.repeat_threshold = 3;

  GenerationResult four_in_a_row;
  four_in_a_row.tokens = {7, 7, 7, 7};
  four_in_a_row.halt_reason = HaltReason::Eos;
  const auto window_violations = check_constraints(four_in_a_row, cfg);
  REQUIRE(window_violations.size() == 1);
  CHECK(window_violations[0].kind == "window_frequency");
  CHECK(window_violations[0].position == 3);

  GenerationResult short_run;
  short_run.tokens = {1, 2, 3};
  CHECK(check_constraints(short_run, cfg).empty());

  GenerationResult repeated_gram;
  repeated_gram.tokens = {9, 8, 7, 6, 5, 9, 8, 7, 6, 5};
  repeated_gram.halt_reason = HaltReason::MaxLength;
  DecodeConfig wide = cfg;
  wide.repeat_window = 30;
  wide.repeat_threshold = 4;
  const auto gram_violations = check_constraints(repeated_gram, wide);
  REQUIRE(gram_violations.size() == 1);
  CHECK(gram_violations[0].kind == "ngram_repeat");
  CHECK(gram_violations[0].position == 5);
  CHECK(gram_violations[0].message.find("position 0") != std::string::npos);
}

TEST_CASE("check_constraints: halt claims are audited") {
  DecodeConfig cfg;
  cfg.repeat_window = 4;
  cfg.repeat_threshold = 3;

  GenerationResult honest;
  honest.tokens = {4, 4, 4};
  honest.halt_reason = HaltReason::RepetitionHalt;
  honest.halted_token = 4;
  CHECK(check_constraints(honest, cfg).empty());

  GenerationResult missing = honest;
  missing.halted_token = -1;
  auto violations = check_constraints(missing, cfg);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == "halt_claim");

  GenerationResult harmless = honest;
  harmless.halted_token = 5;  // a fresh token would not violate anything
  violations = check_constraints(harmless, cfg);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == "halt_claim");
}

TEST_CASE("sampling: deterministic per seed, varied across seeds") {
  const NGramLM lm = NGramLM::train(skewed_corpus(), 2, 0.0, 2);
  const auto prompt = make_prompt(lm.vocab(), "q");
  DecodeConfig cfg;
  cfg.algorithm = Algorithm::Sampling;
  cfg.temperature = 1.0;
  cfg.top_p = 1.0;
  cfg.top_k = 5;
  cfg.max_length = 8;

  cfg.seed = 42;
  const GenerationResult first = decode(lm, prompt, cfg);
  const GenerationResult second = decode(lm, prompt, cfg);
  CHECK(first.tokens == second.tokens);
  CHECK(first.step_log_probs == second.step_log_probs);

  std::set<int> first_tokens;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const GenerationResult res = decode(lm, prompt, cfg);
    REQUIRE_FALSE(res.tokens.empty());
    first_tokens.insert(res.tokens.front());
  }
  CHECK(first_tokens.size() >= 2);
}

TEST_CASE("sampling: nucleus keeps the minimal high-mass prefix") {
  const NGramLM lm = NGramLM::train(skewed_corpus(), 2, 0.0, 2);
  const int a = lm.vocab().id("a");
  const int b = lm.vocab().id("b");
  const auto prompt = make_prompt(lm.vocab(), "q");

  DecodeConfig cfg;
  cfg.algorithm = Algorithm::Sampling;
  cfg.temperature = 1.0;
  cfg.top_k = 5;
  cfg.top_p = 0.6;  // keeps a (0.5) and b (0.3), renormalized to 5/8 and 3/8
  cfg.max_length = 4;

  const int trials = 2000;
  int a_count = 0;
  for (int seed = 0; seed < trials; ++seed) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    const GenerationResult res = decode(lm, prompt, cfg);
    REQUIRE_FALSE(res.tokens.empty());
    const int head = res.tokens.front();
    const bool in_support = head == a || head == b;
    REQUIRE(in_support);
    if (head == a) ++a_count;
  }
  const double expected = trials * 5.0 / 8.0;
  const double sigma = std::sqrt(trials * (5.0 / 8.0) * (3.0 / 8.0));
  CHECK(std::fabs(a_count - expected) <= 3.0 * sigma);
}

TEST_CASE("full-width beam equals exhaustive enumeration") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const NGramLM lm = NGramLM::train(random_corpus(rng), 2, 0.3, 1);
    REQUIRE(lm.vocab().size() <= 6);
    const auto prompt = make_prompt(lm.vocab(), "");

    DecodeConfig cfg;
    cfg.algorithm = Algorithm::Beam;
    cfg.max_length = 4;
    cfg.num_beams = 6 * 6 * 6 * 6;
    cfg.early_stopping = true;
    cfg.no_ngram_repeat_size = (trial % 2 == 0) ? 2 : 5;
    cfg.repeat_window = 3;
    cfg.repeat_threshold = 2;

    const GenerationResult got = decode(lm, prompt, cfg);
    const oracle::Path want = oracle::best_path(lm, std::vector<int>(prompt.begin(), prompt.end()), cfg);
    CHECK(got.tokens == want.tokens);
    CHECK(got.step_log_probs == want.step_log_probs);
    CHECK(got.total_log_prob == want.log_prob);
    CHECK(got.halt_reason == want.reason);
    CHECK(got.halted_token == want.halted_token);
  }
}

TEST_CASE("prompt must end with the separator") {
  const NGramLM lm = NGramLM::train(skewed_corpus(), 2, 0.0, 2);
  const DecodeConfig cfg;
  CHECK_THROWS_AS(decode(lm, std::vector<int>{}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(decode(lm, std::vector<int>{Vocabulary::kBos, lm.vocab().id("q")}, cfg),
                  std::invalid_argument);
}

TEST_CASE("max_length bounds generation and log probs are the model's") {
  const auto corpus = corpus_of({{"", "a b a b a b a b a b"}});
  const NGramLM lm = NGramLM::train(corpus, 3, 0.0, 2);
  const auto prompt = make_prompt(lm.vocab(), "");

  DecodeConfig cfg;
  cfg.max_length = 5;
  cfg.no_ngram_repeat_size = 50;
  const GenerationResult res = decode(lm, prompt, cfg);
  CHECK(res.tokens.size() == 5);
  CHECK(res.halt_reason == HaltReason::MaxLength);
  REQUIRE(res.step_log_probs.size() == res.tokens.size());

  std::vector<int> context(prompt.begin(), prompt.end());
  double total = 0.0;
  for (std::size_t i = 0; i < res.tokens.size(); ++i) {
    const auto dist = lm.next_distribution(context);
    CHECK(res.step_log_probs[i] ==
          std::log(dist[static_cast<std::size_t>(res.tokens[i])]));
    total += res.step_log_probs[i];
    context.push_back(res.tokens[i]);
  }
  CHECK(res.total_log_prob == total);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "einfach/corpus.hpp"
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

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("einfach-lm-" + std::to_string(std::random_device{}()) + "-" + name))
      .string();
}

}  // namespace

TEST_CASE("vocabulary: reserved block") {
  const Vocabulary vocab;
  CHECK(vocab.size() == 4);
  CHECK(Vocabulary::kBos == 0);
  CHECK(Vocabulary::kEos == 1);
  CHECK(Vocabulary::kSep == 2);
  CHECK(Vocabulary::kUnk == 3);
  for (int id = 0; id <= 3; ++id) CHECK(Vocabulary::is_reserved(id));
  CHECK_FALSE(Vocabulary::is_reserved(4));
  CHECK(vocab.id("irgendwas") == Vocabulary::kUnk);
}

TEST_CASE("vocabulary: count-ordered with rare tokens collapsed") {
  const auto corpus = corpus_of({{"", "b a a b c"}, {"", "a"}});
  const Vocabulary vocab = Vocabulary::build(corpus, 2);
  CHECK(vocab.size() == 6);
  CHECK(vocab.id("a") == 4);  // count 3
  CHECK(vocab.id("b") == 5);  // count 2
  CHECK(vocab.id("c") == Vocabulary::kUnk);
  CHECK(vocab.contains("a"));
  CHECK_FALSE(vocab.contains("c"));

  const Vocabulary all = Vocabulary::build(corpus, 1);
  CHECK(all.id("c") == 6);

  // equal counts break ties by surface
  const Vocabulary tied = Vocabulary::build(corpus_of({{"", "b a"}, {"", "b a"}}), 2);
  CHECK(tied.id("a") == 4);
  CHECK(tied.id("b") == 5);

  CHECK_THROWS_AS(Vocabulary::build(corpus, 0), std::invalid_argument);
}

TEST_CASE("encode/decode and sequence layout") {
  const auto corpus = corpus_of({{"", "a\nb a\nb"}});
  const Vocabulary vocab = Vocabulary::build(corpus, 2);
  const int a = vocab.id("a");
  const int b = vocab.id("b");
  const int nl = vocab.id("\n");
  CHECK(encode_text(vocab, "A b") == std::vector<int>{a, b});
  CHECK(encode_text(vocab, "xyz") == std::vector<int>{Vocabulary::kUnk});
  CHECK(decode_text(vocab, std::vector<int>{Vocabulary::kBos, a, b, Vocabulary::kSep}) == "a b");
  CHECK(decode_text(vocab, std::vector<int>{a, nl, b}) == "a\nb");

  const auto prompt = make_prompt(vocab, "a b");
  REQUIRE(prompt.size() == 4);
  CHECK(prompt.front() == Vocabulary::kBos);
  CHECK(prompt.back() == Vocabulary::kSep);

  const auto seq = training_sequence(vocab, "a", "b");
  CHECK(seq == std::vector<int>{Vocabulary::kBos, a, Vocabulary::kSep, b, Vocabulary::kEos});
}

TEST_CASE("bigram counts: repeated follower is certain") {
  const auto corpus = corpus_of({{"", "a b a b"}});
  const NGramLM lm = NGramLM::train(corpus, 2, 0.0, 2);
  const int a = lm.vocab().id("a");
  const int b = lm.vocab().id("b");
  REQUIRE(a == 4);
  REQUIRE(b == 5);

  const auto dist = lm.next_distribution(std::vector<int>{a});
  CHECK(dist[static_cast<std::size_t>(b)] == 1.0);
  for (int v = 0; v < lm.vocab().size(); ++v) {
    if (v != b) CHECK(dist[static_cast<std::size_t>(v)] == 0.0);
  }

  // unseen context backs off to the unigram level: followers of the empty
  // context are SEP a b a b EOS
  const auto unigram = lm.next_distribution(std::vector<int>{Vocabulary::kUnk});
  CHECK(unigram[static_cast<std::size_t>(a)] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(unigram[static_cast<std::size_t>(b)] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(unigram[Vocabulary::kSep] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(unigram[Vocabulary::kEos] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(unigram[Vocabulary::kBos] == 0.0);
}

TEST_CASE("next_distribution is a probability distribution") {
  std::mt19937 rng(7);
  const char* words[] = {"rot", "blau", "haus", "baum", "geht", "da"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CorpusRecord> corpus;
    const int docs = 2 + static_cast<int>(rng() % 4);
    for (int d = 0; d < docs; ++d) {
      std::string source;
      std::string target;
      const unsigned source_len = 3 + rng() % 5;
      const unsigned target_len = 3 + rng() % 8;
      for (unsigned i = 0; i < source_len; ++i) source += std::string(words[rng() % 6]) + " ";
      for (unsigned i = 0; i < target_len; ++i) target += std::string(words[rng() % 6]) + " ";
      CorpusRecord r;
      r.id = "d" + std::to_string(d);
      r.source = source;
      r.target = target;
      corpus.push_back(std::move(r));
    }
    const int order = 1 + static_cast<int>(rng() % 5);
    const double discount = (trial % 2 == 0) ? 0.0 : 0.5;
    const NGramLM lm = NGramLM::train(corpus, order, discount, 1 + static_cast<int>(rng() % 2));

    for (int probe = 0; probe < 10; ++probe) {
      std::vector<int> context;
      const unsigned context_len = rng() % 6;
      for (unsigned i = 0; i < context_len; ++i) {
        context.push_back(static_cast<int>(rng() % static_cast<unsigned>(lm.vocab().size())));
      }
      const auto dist = lm.next_distribution(context);
      REQUIRE(dist.size() == static_cast<std::size_t>(lm.vocab().size()));
      double sum = 0.0;
      for (const double p : dist) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("train validation") {
  const auto corpus = corpus_of({{"", "a b a b"}});
  CHECK_THROWS_AS(NGramLM::train(corpus, 0), std::invalid_argument);
  CHECK_THROWS_AS(NGramLM::train(corpus, 6), std::invalid_argument);
  CHECK_THROWS_AS(NGramLM::train(corpus, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(NGramLM::train(corpus, 2, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(NGramLM::train(std::vector<CorpusRecord>{}, 2), std::invalid_argument);
}

TEST_CASE("save/load round trip") {
  const auto corpus = corpus_of(
      {{"der hund bellt", "der hund bellt laut"}, {"die katze schläft", "die katze schläft gern"}});
  const NGramLM lm = NGramLM::train(corpus, 3, 0.4, 1);
  const std::string path = temp_path("model.lm");
  lm.save(path);
  const NGramLM loaded = NGramLM::load(path);

  CHECK(loaded.order() == 3);
  CHECK(loaded.discount() == 0.4);
  CHECK(loaded.vocab().size() == lm.vocab().size());
  for (int id = 0; id < lm.vocab().size(); ++id) CHECK(loaded.vocab().surface(id) == lm.vocab().surface(id));

  std::mt19937 rng(11);
  for (int probe = 0; probe < 25; ++probe) {
    std::vector<int> context;
    const unsigned context_len = rng() % 5;
    for (unsigned i = 0; i < context_len; ++i) {
      context.push_back(static_cast<int>(rng() % static_cast<unsigned>(lm.vocab().size())));
    }
    CHECK(loaded.next_distribution(context) == lm.next_distribution(context));
    CHECK(loaded.represent(context) == lm.represent(context));
  }
  std::filesystem::remove(path);
}

TEST_CASE("load rejects corrupted files") {
  const std::string path = temp_path("broken.lm");
  {
    std::ofstream out(path);
    out << "nicht ein modell\n";
  }
  try {
    NGramLM::load(path);
    FAIL("expected runtime_error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(NGramLM::load(temp_path("missing.lm")), std::runtime_error);
}

TEST_CASE("uniform model and cross entropy") {
  const auto corpus = corpus_of({{"", "a b a b"}});
  const Vocabulary vocab = Vocabulary::build(corpus, 2);
  const UniformLM uniform(vocab);
  const auto V = static_cast<double>(vocab.size());
  const auto dist = uniform.next_distribution(std::vector<int>{});
  for (const double p : dist) CHECK(p == doctest::Approx(1.0 / V).epsilon(1e-12));

  const auto source = encode_text(vocab, "a");
  const auto target = encode_text(vocab, "a b a b");
  CHECK(cross_entropy(uniform, source, target) == doctest::Approx(std::log(V)).epsilon(1e-12));

  // deterministic continuations: two identical documents, order 3
  const NGramLM certain = NGramLM::train(corpus_of({{"", "a b"}, {"", "a b"}}), 3, 0.0, 2);
  const auto empty_source = encode_text(certain.vocab(), "");
  CHECK(cross_entropy(certain, empty_source, encode_text(certain.vocab(), "a b")) == 0.0);

  // "a b a b", order 2: only P(a | b) = 1/2 is uncertain
  const NGramLM bigram = NGramLM::train(corpus, 2, 0.0, 2);
  CHECK(cross_entropy(bigram, empty_source, encode_text(bigram.vocab(), "a b a b")) ==
        doctest::Approx(std::log(2.0) / 4).epsilon(1e-12));

  // an impossible token makes the entropy infinite
  const std::vector<int> with_unk{bigram.vocab().id("a"), Vocabulary::kUnk};
  CHECK(std::isinf(cross_entropy(bigram, empty_source, with_unk)));

  CHECK_THROWS_AS(cross_entropy(bigram, empty_source, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("training never hurts against the uniform baseline") {
  const auto corpus = corpus_of({{"der text ist lang und schwer", "der text ist kurz"},
                                 {"die aufgabe ist schwer", "die aufgabe ist leicht"},
                                 {"der tag war lang", "der tag war gut"}});
  for (const int order : {1, 2, 3}) {
    const NGramLM lm = NGramLM::train(corpus, order, 0.0, 1);
    const UniformLM uniform(Vocabulary::build(corpus, 1));
    for (const CorpusRecord& record : corpus) {
      const auto source = encode_text(lm.vocab(), record.source);
      const auto target = encode_text(lm.vocab(), record.target);
      CHECK(cross_entropy(lm, source, target) <= cross_entropy(uniform, source, target) + 1e-12);
    }
  }
}

TEST_CASE("representations are unit length per context token") {
  const auto corpus = corpus_of({{"der hund bellt laut", "der hund bellt"}});
  const NGramLM lm = NGramLM::train(corpus, 2, 0.0, 1);
  const std::vector<int> context{Vocabulary::kBos, lm.vocab().id("der"), lm.vocab().id("hund")};
  const auto reps = lm.represent(context);
  REQUIRE(reps.size() == context.size());
  const std::size_t dim = static_cast<std::size_t>(std::min(lm.vocab().size(), 128));
  for (const auto& row : reps) {
    REQUIRE(row.size() == dim);
    double norm = 0.0;
    for (const double v : row) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

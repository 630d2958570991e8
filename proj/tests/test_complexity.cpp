#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "einfach/complexity.hpp"
#include "einfach/text.hpp"

using namespace einfach;

namespace {

Document doc_of(const std::string& text) { return make_document(text); }

}  // namespace

TEST_CASE("sentence_length: hand-counted fixtures") {
  CHECK(sentence_length(doc_of("Er kommt an. Sie lacht.")) == doctest::Approx(2.5));
  CHECK(sentence_length(doc_of("Hallo.")) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sentence_length(doc_of("")), std::invalid_argument);
}

TEST_CASE("commas_per_sentence: hand-counted fixtures") {
  CHECK(commas_per_sentence(doc_of("Er kommt an. Sie lacht.")) == doctest::Approx(0.0));
  CHECK(commas_per_sentence(doc_of("A, b, c. D e.")) == doctest::Approx(1.0));
  CHECK(commas_per_sentence(doc_of("A, b.")) == doctest::Approx(1.0));
  CHECK_THROWS_AS(commas_per_sentence(doc_of("")), std::invalid_argument);
}

TEST_CASE("verb_compound_distance: separable pairs") {
  const auto& lexicon = SeparableVerbLexicon::builtin();
  CHECK(verb_compound_distance(doc_of("Er kommt heute an."), lexicon) == doctest::Approx(0.25));
  CHECK(verb_compound_distance(doc_of("Sie lacht."), lexicon) == doctest::Approx(0.0));
  CHECK(verb_compound_distance(doc_of("Er kommt an."), lexicon) == doctest::Approx(0.0));
  // two sentences, one with a pair: mean over sentences
  CHECK(verb_compound_distance(doc_of("Er kommt heute an. Sie lacht."), lexicon) ==
        doctest::Approx(0.125));
  CHECK_THROWS_AS(verb_compound_distance(doc_of(""), lexicon), std::invalid_argument);
  CHECK_THROWS_AS(verb_compound_distance(doc_of("Er kommt an."), SeparableVerbLexicon{}),
                  std::invalid_argument);
}

TEST_CASE("verb_compound_distance: conjugated forms and longer spans") {
  const auto& lexicon = SeparableVerbLexicon::builtin();
  // "fangen ... an": rufst/ruft forms of (an, rufen)
  const double d = verb_compound_distance(doc_of("Sie ruft ihre gute Freundin morgen an."), lexicon);
  // 4 words between "ruft" and "an", 7 words total
  CHECK(d == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("separable verb lexicon: loading and matching") {
  const auto& builtin = SeparableVerbLexicon::builtin();
  CHECK(!builtin.empty());
  CHECK(builtin.is_particle("an"));
  CHECK(!builtin.is_particle("hund"));
  CHECK(builtin.matches("an", "kommt"));
  CHECK(builtin.matches("an", "kommen"));
  CHECK(!builtin.matches("an", "lacht"));

  const auto loaded = SeparableVerbLexicon::load(std::string(EINFACH_DATA_DIR) + "/separable_verbs.txt");
  CHECK(loaded.size() >= builtin.size());
  CHECK(loaded.matches("mit", "nimmt") == false);  // stem "nehm" is not listed as "nimm"
  CHECK(loaded.matches("zusammen", "arbeitet"));
}

TEST_CASE("words_per_line: hand-counted fixtures") {
  CHECK(words_per_line(doc_of("eins zwei drei vier fünf")) == doctest::Approx(5.0));
  CHECK(words_per_line(doc_of("a b\nc")) == doctest::Approx(1.5));
  CHECK_THROWS_AS(words_per_line(doc_of("\n\n")), std::invalid_argument);
}

TEST_CASE("profile: aggregation across documents") {
  const std::vector<Document> single{doc_of("Er kommt an.")};
  const ComplexityProfile p1 = profile(single);
  CHECK(p1.documents == 1);
  CHECK(p1.sentence_length.std == doctest::Approx(0.0));
  CHECK(p1.commas_per_sentence.std == doctest::Approx(0.0));

  const std::vector<Document> two{doc_of("a b."), doc_of("a b c d.")};
  const ComplexityProfile p2 = profile(two);
  CHECK(p2.sentence_length.mean == doctest::Approx(3.0));
  CHECK(p2.sentence_length.std == doctest::Approx(1.0));

  CHECK_THROWS_AS(profile(std::vector<Document>{}), std::invalid_argument);
}

TEST_CASE("profile: per-sentence means are stable under self-concatenation") {
  const std::string text = "A b. C d e.";
  const Document once = doc_of(text);
  const Document twice = doc_of(text + " " + text);
  CHECK(sentence_length(once) == doctest::Approx(sentence_length(twice)));
  CHECK(commas_per_sentence(once) == doctest::Approx(commas_per_sentence(twice)));
}

TEST_CASE("profile: simple fixtures score below complex ones on every metric") {
  const std::vector<Document> simple{
      doc_of("Er lacht.\nSie singt.\nDas Kind spielt."),
      doc_of("Der Hund bellt.\nDie Katze schläft."),
  };
  const std::vector<Document> complex_docs{
      doc_of("Der alte Mann, der gestern ankam, ruft seine langjährige Freundin heute "
             "wieder an, weil er sie vermisst."),
      doc_of("Die Behörde, die zuständig ist, fängt mit der langen Bearbeitung "
             "der vielen Anträge erst morgen an."),
  };
  const ComplexityProfile s = profile(simple);
  const ComplexityProfile c = profile(complex_docs);
  CHECK(s.sentence_length.mean < c.sentence_length.mean);
  CHECK(s.commas_per_sentence.mean < c.commas_per_sentence.mean);
  CHECK(s.verb_compound_distance.mean < c.verb_compound_distance.mean);
  CHECK(s.words_per_line.mean < c.words_per_line.mean);
}

TEST_CASE("metrics are deterministic across re-tokenization") {
  const std::string text = "Er kommt heute an. Sie, die lacht, geht.";
  CHECK(sentence_length(doc_of(text)) == sentence_length(doc_of(text)));
  CHECK(verb_compound_distance(doc_of(text), SeparableVerbLexicon::builtin()) ==
        verb_compound_distance(doc_of(text), SeparableVerbLexicon::builtin()));
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "einfach/commands.hpp"
#include "einfach/complexity.hpp"
#include "einfach/corpus.hpp"
#include "einfach/decode.hpp"
#include "einfach/lm.hpp"
#include "einfach/metrics.hpp"
#include "einfach/text.hpp"

namespace py = pybind11;

namespace {

const char* kind_name(einfach::TokenKind kind) {
  switch (kind) {
    case einfach::TokenKind::Word: return "word";
    case einfach::TokenKind::Number: return "number";
    case einfach::TokenKind::Punctuation: return "punctuation";
    case einfach::TokenKind::Comma: return "comma";
    case einfach::TokenKind::SentenceTerminal: return "sentence_terminal";
    case einfach::TokenKind::LineBreak: return "line_break";
    case einfach::TokenKind::Bullet: return "bullet";
  }
  return "unknown";
}

py::dict to_dict(const einfach::BleuReport& r) {
  py::dict d;
  d["score"] = r.score;
  d["precisions"] = r.precisions;
  d["matches"] = r.matches;
  d["totals"] = r.totals;
  d["brevity_penalty"] = r.brevity_penalty;
  d["prediction_length"] = r.prediction_length;
  d["reference_length"] = r.reference_length;
  return d;
}

py::dict to_dict(const einfach::MeteorReport& r) {
  py::dict d;
  d["score"] = r.score;
  d["matches"] = r.matches;
  d["chunks"] = r.chunks;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["fmean"] = r.fmean;
  d["fragmentation_penalty"] = r.fragmentation_penalty;
  d["exact_chunks"] = r.exact_chunks;
  return d;
}

py::dict to_dict(const einfach::SariReport& r) {
  py::dict d;
  d["score"] = r.score;
  d["add_f"] = r.add_f;
  d["keep_f"] = r.keep_f;
  d["del_precision"] = r.del_precision;
  d["add_F"] = r.add_F;
  d["keep_F"] = r.keep_F;
  d["del_P"] = r.del_P;
  d["empty_ops"] = r.empty_ops;
  return d;
}

py::dict to_dict(const einfach::MeanStd& v) {
  py::dict d;
  d["mean"] = v.mean;
  d["std"] = v.std;
  return d;
}

py::dict to_dict(const einfach::ComplexityProfile& p) {
  py::dict d;
  d["documents"] = p.documents;
  d["sentence_length"] = to_dict(p.sentence_length);
  d["commas_per_sentence"] = to_dict(p.commas_per_sentence);
  d["verb_compound_distance"] = to_dict(p.verb_compound_distance);
  d["words_per_line"] = to_dict(p.words_per_line);
  return d;
}

py::dict to_dict(const einfach::Vocabulary& vocab, const einfach::GenerationResult& r) {
  py::dict d;
  d["text"] = einfach::decode_text(vocab, r.tokens);
  d["tokens"] = r.tokens;
  d["step_log_probs"] = r.step_log_probs;
  d["total_log_prob"] = r.total_log_prob;
  d["halt_reason"] = std::string(einfach::to_string(r.halt_reason));
  d["halted_token"] = r.halted_token;
  return d;
}

einfach::DecodeConfig config_from_json(const std::string& config_json) {
  einfach::DecodeConfig cfg;
  if (!config_json.empty()) cfg.merge_json_text(config_json, "<config>");
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_einfach, m) {
  m.doc() = "Measurement and generation toolkit for German text simplification";
  m.attr("__version__") = "0.1.0";

  m.def(
      "tokenize",
      [](const std::string& text) {
        py::list out;
        for (const auto& token : einfach::tokenize(text)) {
          py::dict d;
          d["surface"] = token.surface;
          d["kind"] = kind_name(token.kind);
          d["offset"] = token.offset;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), "Tokenize German text into typed tokens");

  m.def(
      "metric_tokens",
      [](const std::string& text) {
        return einfach::metric_tokens(einfach::make_document(text));
      },
      py::arg("text"), "Lowercased token stream used by the metrics");

  m.def(
      "bleu",
      [](const std::string& prediction, const std::string& reference) {
        return to_dict(
            einfach::bleu(einfach::make_document(prediction), einfach::make_document(reference)));
      },
      py::arg("prediction"), py::arg("reference"));

  m.def(
      "meteor",
      [](const std::string& prediction, const std::string& reference) {
        return to_dict(
            einfach::meteor(einfach::make_document(prediction), einfach::make_document(reference)));
      },
      py::arg("prediction"), py::arg("reference"));

  m.def(
      "sari",
      [](const std::string& source, const std::string& prediction, const std::string& reference) {
        return to_dict(einfach::sari(einfach::make_document(source),
                                     einfach::make_document(prediction),
                                     einfach::make_document(reference)));
      },
      py::arg("source"), py::arg("prediction"), py::arg("reference"));

  m.def(
      "complexity_profile",
      [](const std::vector<std::string>& texts) {
        std::vector<einfach::Document> docs;
        docs.reserve(texts.size());
        for (const auto& text : texts) docs.push_back(einfach::make_document(text));
        return to_dict(einfach::profile(docs));
      },
      py::arg("texts"), "Complexity profile (builtin separable-verb lexicon)");

  m.def("standardize_typography",
        [](const std::string& text) { return einfach::standardize_typography(text); },
        py::arg("text"));

  m.def(
      "aggregate_ratings",
      [](const std::vector<int>& values) {
        std::vector<einfach::HumanRating> ratings;
        ratings.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
          ratings.push_back({std::to_string(i), values[i]});
        }
        const einfach::RatingSummary s = einfach::aggregate_ratings(ratings);
        py::dict d;
        d["count"] = s.count;
        d["mean"] = s.mean;
        d["std"] = s.std;
        return d;
      },
      py::arg("ratings"), "Mean and population std of 0-3 agreement ratings");

  m.def("default_config", [] { return einfach::config_snapshot(einfach::DecodeConfig{}); },
        "Default decoding parameters as strings");

  py::class_<einfach::NGramLM>(m, "NGramLM")
      .def_static(
          "train_file",
          [](const std::string& corpus_path, int order, double discount, int min_count) {
            return einfach::NGramLM::train(einfach::load_corpus(corpus_path), order, discount,
                                           min_count);
          },
          py::arg("corpus_path"), py::arg("order") = 3, py::arg("discount") = 0.0,
          py::arg("min_count") = 2)
      .def_static("load", &einfach::NGramLM::load, py::arg("path"))
      .def("save", &einfach::NGramLM::save, py::arg("path"))
      .def("order", &einfach::NGramLM::order)
      .def("discount", &einfach::NGramLM::discount)
      .def("vocab_size", [](const einfach::NGramLM& lm) { return lm.vocab().size(); })
      .def(
          "cross_entropy",
          [](const einfach::NGramLM& lm, const std::string& source, const std::string& target) {
            return einfach::cross_entropy(lm, einfach::encode_text(lm.vocab(), source),
                                          einfach::encode_text(lm.vocab(), target));
          },
          py::arg("source"), py::arg("target"), "Mean nats/token of target given source")
      .def(
          "decode",
          [](const einfach::NGramLM& lm, const std::string& source,
             const std::string& config_json) {
            const einfach::DecodeConfig cfg = config_from_json(config_json);
            const std::vector<int> prompt = einfach::make_prompt(lm.vocab(), source);
            return to_dict(lm.vocab(), einfach::decode(lm, prompt, cfg));
          },
          py::arg("source"), py::arg("config") = std::string(),
          "Generate a simplification; config is a JSON object of decoding parameters");
}

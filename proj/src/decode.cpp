#include "einfach/decode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace einfach {

using nlohmann::json;

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Greedy: return "greedy";
    case Algorithm::Beam: return "beam";
    case Algorithm::Sampling: return "sampling";
    case Algorithm::Contrastive: return "contrastive";
  }
  return "greedy";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "greedy") return Algorithm::Greedy;
  if (text == "beam") return Algorithm::Beam;
  if (text == "sampling") return Algorithm::Sampling;
  if (text == "contrastive") return Algorithm::Contrastive;
  throw std::invalid_argument("algorithm must be greedy|beam|sampling|contrastive, got \"" +
                              std::string(text) + "\"");
}

std::string_view to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::Eos: return "eos";
    case HaltReason::MaxLength: return "max_length";
    case HaltReason::RepetitionHalt: return "repetition_halt";
    case HaltReason::NoValidToken: return "no_valid_token";
  }
  return "max_length";
}

void DecodeConfig::validate() const {
  const auto reject = [](const std::string& key, const std::string& detail) {
    throw std::invalid_argument(key + " " + detail);
  };
  if (max_length < 1) reject("max_length", "must be >= 1");
  if (no_ngram_repeat_size < 1) reject("no_ngram_repeat_size", "must be >= 1");
  if (num_beams < 1) reject("num_beams", "must be >= 1");
  if (!(top_p > 0.0) || top_p > 1.0) reject("top_p", "must be in (0,1]");
  if (top_k < 1) reject("top_k", "must be >= 1");
  if (!(temperature > 0.0)) reject("temperature", "must be > 0");
  if (penalty_alpha < 0.0 || penalty_alpha > 1.0) reject("penalty_alpha", "must be in [0,1]");
  if (repeat_window < 1) reject("repeat_window", "must be >= 1");
  if (repeat_threshold < 1) reject("repeat_threshold", "must be >= 1");
}

void DecodeConfig::merge_json_text(std::string_view text, const std::string& name) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::runtime_error(name + ": config must be a JSON object");
  }
  const auto bad_key = [&](const std::string& key, const std::string& detail) {
    throw std::runtime_error(name + ": key \"" + key + "\" " + detail);
  };
  const auto get_int = [&](const json& value, const std::string& key) {
    if (!value.is_number_integer()) bad_key(key, "must be an integer");
    return value.get<std::int64_t>();
  };
  const auto get_real = [&](const json& value, const std::string& key) {
    if (!value.is_number()) bad_key(key, "must be a number");
    return value.get<double>();
  };
  const auto get_bool = [&](const json& value, const std::string& key) {
    if (!value.is_boolean()) bad_key(key, "must be a boolean");
    return value.get<bool>();
  };

  bool do_sample = false;
  bool algorithm_given = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "algorithm") {
      if (!value.is_string()) bad_key(key, "must be a string");
      try {
        algorithm = parse_algorithm(value.get<std::string>());
      } catch (const std::invalid_argument& e) {
        bad_key(key, e.what());
      }
      algorithm_given = true;
    } else if (key == "do_sample") {
      do_sample = get_bool(value, key);
    } else if (key == "max_length") {
      max_length = static_cast<int>(get_int(value, key));
    } else if (key == "no_ngram_repeat_size") {
      no_ngram_repeat_size = static_cast<int>(get_int(value, key));
    } else if (key == "num_beams") {
      num_beams = static_cast<int>(get_int(value, key));
    } else if (key == "early_stopping") {
      early_stopping = get_bool(value, key);
    } else if (key == "top_p") {
      top_p = get_real(value, key);
    } else if (key == "top_k") {
      top_k = static_cast<int>(get_int(value, key));
    } else if (key == "temperature") {
      temperature = get_real(value, key);
    } else if (key == "penalty_alpha") {
      penalty_alpha = get_real(value, key);
    } else if (key == "repeat_window") {
      repeat_window = static_cast<int>(get_int(value, key));
    } else if (key == "repeat_threshold") {
      repeat_threshold = static_cast<int>(get_int(value, key));
    } else if (key == "seed") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        bad_key(key, "must be a non-negative integer");
      }
      seed = value.get<std::uint64_t>();
    } else if (key == "learning_rate" || key == "weight_decay" || key == "batch_size" ||
               key == "n_epochs") {
      extras[key] = value.dump();  // finetuning block: recorded, unused
    } else {
      bad_key(key, "is not a recognized parameter");
    }
  }
  if (do_sample && !algorithm_given) algorithm = Algorithm::Sampling;
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

void DecodeConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  merge_json_text(text.str(), path);
}

DecodeConfig DecodeConfig::from_file(const std::string& path) {
  DecodeConfig cfg;
  cfg.merge_file(path);
  return cfg;
}

namespace {

// Zeroes every candidate that would repeat an n-gram of size
// no_ngram_repeat_size within the generated tokens.
void mask_repeats(std::vector<double>& dist, std::span<const int> generated,
                  const DecodeConfig& cfg) {
  const int s = cfg.no_ngram_repeat_size;
  const auto len = static_cast<std::ptrdiff_t>(generated.size());
  if (len < s) return;
  const std::span<const int> tail = generated.subspan(generated.size() - (s - 1));
  for (std::ptrdiff_t i = 0; i + s <= len; ++i) {
    bool match = true;
    for (int k = 0; k < s - 1 && match; ++k) {
      match = generated[static_cast<std::size_t>(i) + static_cast<std::size_t>(k)] == tail[static_cast<std::size_t>(k)];
    }
    if (!match) continue;
    const int banned = generated[static_cast<std::size_t>(i) + static_cast<std::size_t>(s) - 1];
    if (banned >= 0 && static_cast<std::size_t>(banned) < dist.size()) {
      dist[static_cast<std::size_t>(banned)] = 0.0;
    }
  }
}

// True when emitting candidate would push its frequency inside the
// trailing repeat_window (candidate included) beyond repeat_threshold.
bool window_violates(std::span<const int> generated, int candidate, const DecodeConfig& cfg) {
  const std::size_t len = generated.size();
  const auto window = std::min<std::size_t>(static_cast<std::size_t>(cfg.repeat_window), len + 1);
  std::size_t count = 1;
  for (std::size_t i = len + 1 - window; i < len; ++i) {
    if (generated[i] == candidate) ++count;
  }
  return count > static_cast<std::size_t>(cfg.repeat_threshold);
}

int argmax_token(const std::vector<double>& dist) {
  int best = -1;
  double best_p = 0.0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] > best_p) {
      best_p = dist[v];
      best = static_cast<int>(v);
    }
  }
  return best;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Probability-sorted positive candidates, ties by lowest id, at most k.
std::vector<int> top_candidates(const std::vector<double>& dist, int k) {
  std::vector<int> ids;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] > 0.0) ids.push_back(static_cast<int>(v));
  }
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const double pa = dist[static_cast<std::size_t>(a)];
    const double pb = dist[static_cast<std::size_t>(b)];
    return pa != pb ? pa > pb : a < b;
  });
  if (static_cast<int>(ids.size()) > k) ids.resize(static_cast<std::size_t>(k));
  return ids;
}

class StepwiseDecoder {
 public:
  StepwiseDecoder(const LanguageModel& lm, std::span<const int> prompt, const DecodeConfig& cfg)
      : lm_(lm), cfg_(cfg), context_(prompt.begin(), prompt.end()), rng_(cfg.seed) {}

  GenerationResult run() {
    GenerationResult res;
    while (static_cast<int>(res.tokens.size()) < cfg_.max_length) {
      std::vector<double> dist = lm_.next_distribution(context_);
      mask_repeats(dist, res.tokens, cfg_);
      const int v = pick(dist);
      if (v < 0) {
        res.halt_reason = HaltReason::NoValidToken;
        return res;
      }
      if (window_violates(res.tokens, v, cfg_)) {
        res.halt_reason = HaltReason::RepetitionHalt;
        res.halted_token = v;
        return res;
      }
      const double lp = std::log(dist[static_cast<std::size_t>(v)]);
      res.tokens.push_back(v);
      res.step_log_probs.push_back(lp);
      res.total_log_prob += lp;
      context_.push_back(v);
      if (v == Vocabulary::kEos) {
        res.halt_reason = HaltReason::Eos;
        return res;
      }
    }
    res.halt_reason = HaltReason::MaxLength;
    return res;
  }

 private:
  int pick(const std::vector<double>& dist) {
    switch (cfg_.algorithm) {
      case Algorithm::Greedy: return argmax_token(dist);
      case Algorithm::Sampling: return pick_sampled(dist);
      case Algorithm::Contrastive: return pick_contrastive(dist);
      case Algorithm::Beam: break;  // handled by BeamDecoder
    }
    return argmax_token(dist);
  }

  int pick_sampled(const std::vector<double>& dist) {
    if (cfg_.temperature <= 1e-6) return argmax_token(dist);

    struct Candidate {
      int id;
      double log_weight;
      double mass = 0.0;
    };
    std::vector<Candidate> candidates;
    for (std::size_t v = 0; v < dist.size(); ++v) {
      if (dist[v] > 0.0) candidates.push_back({static_cast<int>(v), std::log(dist[v]) / cfg_.temperature});
    }
    if (candidates.empty()) return -1;
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.log_weight != b.log_weight ? a.log_weight > b.log_weight : a.id < b.id;
    });
    if (static_cast<int>(candidates.size()) > cfg_.top_k) {
      candidates.resize(static_cast<std::size_t>(cfg_.top_k));
    }

    // exponentiate against the maximum for stability, then normalize
    const double max_lw = candidates.front().log_weight;
    double total = 0.0;
    for (Candidate& c : candidates) {
      c.mass = std::exp(c.log_weight - max_lw);
      total += c.mass;
    }
    for (Candidate& c : candidates) c.mass /= total;

    // nucleus: minimal sorted prefix with cumulative mass >= top_p
    std::size_t keep = candidates.size();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      cumulative += candidates[i].mass;
      if (cumulative >= cfg_.top_p - 1e-12) {
        keep = i + 1;
        break;
      }
    }
    candidates.resize(keep);
    double kept_total = 0.0;
    for (const Candidate& c : candidates) kept_total += c.mass;

    // portable uniform draw in [0,1)
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    double cum = 0.0;
    for (const Candidate& c : candidates) {
      cum += c.mass / kept_total;
      if (u < cum) return c.id;
    }
    return candidates.back().id;
  }

  int pick_contrastive(const std::vector<double>& dist) {
    const std::vector<int> candidates = top_candidates(dist, cfg_.top_k);
    if (candidates.empty()) return -1;
    const double alpha = cfg_.penalty_alpha;

    const std::vector<std::vector<double>> context_vecs = lm_.represent(context_);
    int best = -1;
    double best_score = 0.0;
    std::vector<int> extended = context_;
    extended.push_back(0);
    for (const int v : candidates) {
      extended.back() = v;
      const std::vector<std::vector<double>> vecs = lm_.represent(extended);
      const std::vector<double>& hv = vecs.back();
      double max_sim = 0.0;
      bool first = true;
      for (const auto& cv : context_vecs) {
        const double sim = cosine(hv, cv);
        if (first || sim > max_sim) {
          max_sim = sim;
          first = false;
        }
      }
      const double score = (1.0 - alpha) * dist[static_cast<std::size_t>(v)] - alpha * max_sim;
      if (best < 0 || score > best_score || (score == best_score && v < best)) {
        best = v;
        best_score = score;
      }
    }
    return best;
  }

  const LanguageModel& lm_;
  const DecodeConfig& cfg_;
  std::vector<int> context_;
  std::mt19937_64 rng_;
};

class BeamDecoder {
 public:
  BeamDecoder(const LanguageModel& lm, std::span<const int> prompt, const DecodeConfig& cfg)
      : lm_(lm), cfg_(cfg), prompt_(prompt.begin(), prompt.end()) {}

  GenerationResult run() {
    std::vector<Hyp> active(1);
    std::vector<Finished> finished;

    while (!active.empty()) {
      if (static_cast<int>(active.front().tokens.size()) >= cfg_.max_length) {
        for (Hyp& h : active) finish(finished, std::move(h), HaltReason::MaxLength, -1);
        break;
      }

      // rank all expansions of all active hypotheses
      struct Expansion {
        double logp;
        int token;
        std::size_t hyp;
        double step_lp;
      };
      std::vector<Expansion> expansions;
      for (std::size_t h = 0; h < active.size(); ++h) {
        std::vector<int> context = prompt_;
        context.insert(context.end(), active[h].tokens.begin(), active[h].tokens.end());
        std::vector<double> dist = lm_.next_distribution(context);
        mask_repeats(dist, active[h].tokens, cfg_);
        bool any = false;
        for (std::size_t v = 0; v < dist.size(); ++v) {
          if (dist[v] <= 0.0) continue;
          const double lp = std::log(dist[v]);
          expansions.push_back({active[h].logp + lp, static_cast<int>(v), h, lp});
          any = true;
        }
        if (!any) finish(finished, std::move(active[h]), HaltReason::NoValidToken, -1);
      }
      std::sort(expansions.begin(), expansions.end(), [](const Expansion& a, const Expansion& b) {
        if (a.logp != b.logp) return a.logp > b.logp;
        if (a.token != b.token) return a.token < b.token;
        return a.hyp < b.hyp;
      });

      // fill num_beams slots best-first; EOS and window-violating
      // expansions finish and consume their slot
      std::vector<Hyp> next;
      std::vector<char> halted(active.size(), 0);
      std::size_t slots = static_cast<std::size_t>(cfg_.num_beams);
      for (const Expansion& e : expansions) {
        if (slots == 0) break;
        Hyp& h = active[e.hyp];
        if (halted[e.hyp]) continue;
        if (window_violates(h.tokens, e.token, cfg_)) {
          halted[e.hyp] = 1;
          finish(finished, Hyp(h), HaltReason::RepetitionHalt, e.token);
          --slots;
          continue;
        }
        Hyp extended = h;
        extended.tokens.push_back(e.token);
        extended.step_lps.push_back(e.step_lp);
        extended.logp += e.step_lp;
        if (e.token == Vocabulary::kEos) {
          finish(finished, std::move(extended), HaltReason::Eos, -1);
        } else {
          next.push_back(std::move(extended));
        }
        --slots;
      }
      active = std::move(next);

      if (cfg_.early_stopping) {
        if (finished.size() >= static_cast<std::size_t>(cfg_.num_beams)) break;
      } else if (!finished.empty() && !active.empty()) {
        double best_active = active.front().logp;
        for (const Hyp& h : active) best_active = std::max(best_active, h.logp);
        if (best_finished(finished) >= best_active) break;  // no active can recover
      }
    }

    return select(finished);
  }

 private:
  struct Hyp {
    std::vector<int> tokens;
    std::vector<double> step_lps;
    double logp = 0.0;
  };
  struct Finished {
    Hyp hyp;
    HaltReason reason;
    int halted_token;
  };

  static void finish(std::vector<Finished>& finished, Hyp hyp, HaltReason reason, int halted) {
    finished.push_back({std::move(hyp), reason, halted});
  }

  static double best_finished(const std::vector<Finished>& finished) {
    double best = finished.front().hyp.logp;
    for (const Finished& f : finished) best = std::max(best, f.hyp.logp);
    return best;
  }

  GenerationResult select(std::vector<Finished>& finished) const {
    if (finished.empty()) {
      throw std::logic_error("beam search produced no finished hypothesis");
    }
    const Finished* best = &finished.front();
    for (const Finished& f : finished) {
      if (f.hyp.logp > best->hyp.logp ||
          (f.hyp.logp == best->hyp.logp && f.hyp.tokens < best->hyp.tokens)) {
        best = &f;
      }
    }
    GenerationResult res;
    res.tokens = best->hyp.tokens;
    res.step_log_probs = best->hyp.step_lps;
    res.total_log_prob = best->hyp.logp;
    res.halt_reason = best->reason;
    res.halted_token = best->halted_token;
    return res;
  }

  const LanguageModel& lm_;
  const DecodeConfig& cfg_;
  std::vector<int> prompt_;
};

}  // namespace

GenerationResult decode(const LanguageModel& lm, std::span<const int> prompt,
                        const DecodeConfig& cfg) {
  cfg.validate();
  if (prompt.empty() || prompt.back() != Vocabulary::kSep) {
    throw std::invalid_argument("decode: prompt must end with the SEP token");
  }
  if (cfg.algorithm == Algorithm::Beam) return BeamDecoder(lm, prompt, cfg).run();
  return StepwiseDecoder(lm, prompt, cfg).run();
}

std::vector<Violation> check_constraints(const GenerationResult& result,
                                         const DecodeConfig& cfg) {
  std::vector<Violation> violations;
  const std::vector<int>& t = result.tokens;
  const int s = cfg.no_ngram_repeat_size;

  if (static_cast<int>(t.size()) >= s) {
    std::map<std::vector<int>, std::size_t> seen;
    for (std::size_t i = 0; i + static_cast<std::size_t>(s) <= t.size(); ++i) {
      std::vector<int> gram(t.begin() + static_cast<std::ptrdiff_t>(i),
                            t.begin() + static_cast<std::ptrdiff_t>(i) + s);
      const auto [it, inserted] = seen.emplace(std::move(gram), i);
      if (!inserted) {
        violations.push_back({i, "ngram_repeat",
                              std::to_string(s) + "-gram at position " + std::to_string(i) +
                                  " repeats position " + std::to_string(it->second)});
      }
    }
  }

  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto window = std::min<std::size_t>(static_cast<std::size_t>(cfg.repeat_window), i + 1);
    std::size_t count = 0;
    for (std::size_t j = i + 1 - window; j <= i; ++j) {
      if (t[j] == t[i]) ++count;
    }
    if (count > static_cast<std::size_t>(cfg.repeat_threshold)) {
      violations.push_back({i, "window_frequency",
                            "token " + std::to_string(t[i]) + " occurs " + std::to_string(count) +
                                " times in the trailing window at position " + std::to_string(i)});
    }
  }

  if (result.halt_reason == HaltReason::RepetitionHalt) {
    if (result.halted_token < 0) {
      violations.push_back({t.size(), "halt_claim", "repetition halt without a halted token"});
    } else if (!window_violates(t, result.halted_token, cfg)) {
      violations.push_back({t.size(), "halt_claim",
                            "emitting token " + std::to_string(result.halted_token) +
                                " would not violate the window constraint"});
    }
  }
  return violations;
}

}  // namespace einfach

#include "einfach/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

namespace einfach {
namespace {

std::vector<std::string> to_vector(std::span<const std::string> s) {
  return {s.begin(), s.end()};
}

// --- METEOR chunk counting ---------------------------------------------
//
// A maximum matching pairs equal tokens of prediction and reference,
// each position used at most once; its size is m = Σ_w min(counts).
// chunks = the minimum, over all maximum matchings, of the number of
// maximal runs of pairs adjacent in both sequences.

struct RefIndex {
  std::unordered_map<std::string, std::uint64_t> masks;  // ref positions per word
  std::unordered_map<std::string, std::vector<int>> positions;
};

// Deterministic matching achieving m matches: walk the prediction, prefer
// extending the current chunk, otherwise take the leftmost free reference
// position. Used directly when the exact search would be too large.
std::int64_t greedy_chunks(const std::vector<std::string>& pred,
                           const std::vector<std::string>& ref,
                           const RefIndex& index,
                           std::unordered_map<std::string, std::int64_t> quota) {
  std::vector<char> used(ref.size(), 0);
  std::int64_t chunks = 0;
  std::int64_t last_pred = -2;
  std::int64_t last_ref = -2;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto q = quota.find(pred[i]);
    if (q == quota.end() || q->second == 0) continue;
    std::int64_t j = -1;
    if (static_cast<std::int64_t>(i) == last_pred + 1 && last_ref + 1 >= 0 &&
        last_ref + 1 < static_cast<std::int64_t>(ref.size()) && !used[last_ref + 1] &&
        ref[last_ref + 1] == pred[i]) {
      j = last_ref + 1;
    } else {
      for (const int cand : index.positions.at(pred[i])) {
        if (!used[cand]) {
          j = cand;
          break;
        }
      }
      ++chunks;
    }
    used[j] = 1;
    --q->second;
    last_pred = static_cast<std::int64_t>(i);
    last_ref = j;
  }
  return chunks;
}

// Exact minimum via layered search over (used-reference-bitset, reference
// matched at the previous prediction position). States that cannot reach m
// matches or cannot beat the incumbent are pruned; oversize inputs fall
// back to the greedy bound.
std::int64_t min_chunks(const std::vector<std::string>& pred,
                        const std::vector<std::string>& ref,
                        std::int64_t m, bool& exact) {
  exact = true;
  if (m == 0) return 0;

  RefIndex index;
  for (std::size_t j = 0; j < ref.size(); ++j) {
    index.positions[ref[j]].push_back(static_cast<int>(j));
    if (j < 64) index.masks[ref[j]] |= std::uint64_t{1} << j;
  }
  std::unordered_map<std::string, std::int64_t> pred_counts;
  for (const auto& w : pred) ++pred_counts[w];
  std::unordered_map<std::string, std::int64_t> quota;
  for (const auto& [w, c] : pred_counts) {
    const auto it = index.positions.find(w);
    if (it != index.positions.end()) {
      quota[w] = std::min<std::int64_t>(c, static_cast<std::int64_t>(it->second.size()));
    }
  }
  const std::int64_t upper = greedy_chunks(pred, ref, index, quota);
  if (ref.size() > 64 || upper <= 1) {
    exact = upper <= 1;  // a single chunk is already optimal
    return upper;
  }

  constexpr std::size_t kStateBudget = 100000;
  using Key = std::pair<std::uint64_t, int>;  // (used refs, last ref or -1)
  std::map<Key, std::int64_t> states;
  states[{0, -1}] = 0;
  std::unordered_map<std::string, std::int64_t> rem = pred_counts;
  std::int64_t best = upper;

  const auto reachable = [&](std::uint64_t bits) {
    std::int64_t possible = std::popcount(bits);
    for (const auto& [w, c] : rem) {
      if (c <= 0) continue;
      const auto it = index.masks.find(w);
      if (it == index.masks.end()) continue;
      possible += std::min(c, static_cast<std::int64_t>(std::popcount(it->second & ~bits)));
    }
    return possible >= m;
  };
  const auto relax = [](std::map<Key, std::int64_t>& layer, Key key, std::int64_t chunks) {
    const auto [it, inserted] = layer.emplace(key, chunks);
    if (!inserted && chunks < it->second) it->second = chunks;
  };

  for (std::size_t i = 0; i < pred.size() && !states.empty(); ++i) {
    --rem[pred[i]];
    std::map<Key, std::int64_t> next;
    for (const auto& [key, chunks] : states) {
      const auto [bits, last] = key;
      if (chunks >= best) continue;
      if (reachable(bits)) relax(next, {bits, -1}, chunks);
      const auto it = index.masks.find(pred[i]);
      if (it == index.masks.end()) continue;
      std::uint64_t avail = it->second & ~bits;
      while (avail != 0) {
        const int j = std::countr_zero(avail);
        avail &= avail - 1;
        const std::int64_t nc = chunks + (last >= 0 && j == last + 1 ? 0 : 1);
        if (nc >= best) continue;
        const std::uint64_t nb = bits | (std::uint64_t{1} << j);
        if (reachable(nb)) relax(next, {nb, j}, nc);
      }
    }
    if (next.size() > kStateBudget) {
      exact = false;
      return upper;
    }
    states = std::move(next);
  }
  for (const auto& [key, chunks] : states) {
    if (std::popcount(key.first) == m) best = std::min(best, chunks);
  }
  return best;
}

struct SariSets {
  std::unordered_set<std::string> source, pred, ref;
};

SariSets ngram_sets(std::span<const std::string> source, std::span<const std::string> pred,
                    std::span<const std::string> ref, int n) {
  SariSets sets;
  for (const auto& [g, c] : ngram_counts(source, n)) sets.source.insert(g);
  for (const auto& [g, c] : ngram_counts(pred, n)) sets.pred.insert(g);
  for (const auto& [g, c] : ngram_counts(ref, n)) sets.ref.insert(g);
  return sets;
}

std::size_t intersection_size(const std::unordered_set<std::string>& a,
                              const std::unordered_set<std::string>& b) {
  const auto& [small, large] = a.size() <= b.size() ? std::tie(a, b) : std::tie(b, a);
  std::size_t n = 0;
  for (const auto& g : small) n += large.count(g);
  return n;
}

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BleuReport bleu(const Document& prediction, const Document& reference) {
  const auto p = metric_tokens(prediction);
  const auto r = metric_tokens(reference);
  return bleu_tokens(p, r);
}

BleuReport bleu_tokens(std::span<const std::string> prediction,
                       std::span<const std::string> reference) {
  if (reference.empty()) throw std::invalid_argument("bleu: empty reference");
  BleuReport report;
  report.prediction_length = prediction.size();
  report.reference_length = reference.size();
  if (prediction.empty()) return report;  // score 0, all p_n = 0

  for (int n = 1; n <= 4; ++n) {
    const auto pred_counts = ngram_counts(prediction, n);
    const auto ref_counts = ngram_counts(reference, n);
    std::int64_t matched = 0;
    std::int64_t total = 0;
    for (const auto& [gram, count] : pred_counts) {
      total += count;
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    report.matches[n - 1] = matched;
    report.totals[n - 1] = total;
    report.precisions[n - 1] = total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
  }

  const double pred_len = static_cast<double>(prediction.size());
  const double ref_len = static_cast<double>(reference.size());
  report.brevity_penalty = pred_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / pred_len);

  double product = 1.0;
  bool any_zero = false;
  for (const double pn : report.precisions) {
    if (pn <= 0.0) any_zero = true;
    product *= pn;
  }
  report.score = any_zero ? 0.0 : 100.0 * report.brevity_penalty * std::pow(product, 0.25);
  return report;
}

MeteorReport meteor(const Document& prediction, const Document& reference) {
  const auto p = metric_tokens(prediction);
  const auto r = metric_tokens(reference);
  return meteor_tokens(p, r);
}

MeteorReport meteor_tokens(std::span<const std::string> prediction,
                           std::span<const std::string> reference) {
  MeteorReport report;
  if (prediction.empty() || reference.empty()) return report;

  std::unordered_map<std::string, std::int64_t> pred_counts;
  for (const auto& w : prediction) ++pred_counts[w];
  std::unordered_map<std::string, std::int64_t> ref_counts;
  for (const auto& w : reference) ++ref_counts[w];
  std::int64_t m = 0;
  for (const auto& [w, c] : pred_counts) {
    const auto it = ref_counts.find(w);
    if (it != ref_counts.end()) m += std::min(c, it->second);
  }
  report.matches = m;
  if (m == 0) return report;

  const std::vector<std::string> pred_vec = to_vector(prediction);
  const std::vector<std::string> ref_vec = to_vector(reference);
  report.chunks = min_chunks(pred_vec, ref_vec, m, report.exact_chunks);

  const double md = static_cast<double>(m);
  report.precision = md / static_cast<double>(prediction.size());
  report.recall = md / static_cast<double>(reference.size());
  report.fmean = 10.0 * report.precision * report.recall /
                 (report.recall + 9.0 * report.precision);
  const double frag = static_cast<double>(report.chunks) / md;
  report.fragmentation_penalty = 0.5 * frag * frag * frag;
  report.score = report.fmean * (1.0 - report.fragmentation_penalty);
  return report;
}

SariReport sari(const Document& source, const Document& prediction, const Document& reference) {
  const auto s = metric_tokens(source);
  const auto p = metric_tokens(prediction);
  const auto r = metric_tokens(reference);
  return sari_tokens(s, p, r);
}

SariReport sari_tokens(std::span<const std::string> source,
                       std::span<const std::string> prediction,
                       std::span<const std::string> reference) {
  if (source.empty()) throw std::invalid_argument("sari: empty source");
  SariReport report;

  const auto difference = [](const std::unordered_set<std::string>& a,
                             const std::unordered_set<std::string>& b) {
    std::unordered_set<std::string> out;
    for (const auto& g : a) {
      if (!b.count(g)) out.insert(g);
    }
    return out;
  };
  const auto intersection = [](const std::unordered_set<std::string>& a,
                               const std::unordered_set<std::string>& b) {
    std::unordered_set<std::string> out;
    for (const auto& g : a) {
      if (b.count(g)) out.insert(g);
    }
    return out;
  };

  for (int n = 1; n <= 4; ++n) {
    const SariSets sets = ngram_sets(source, prediction, reference, n);
    const std::string suffix = "_" + std::to_string(n);

    // F1 over prediction-vs-reference agreement on an operation.
    const auto f1 = [&](const std::unordered_set<std::string>& pred_op,
                        const std::unordered_set<std::string>& ref_op,
                        const std::string& name) {
      if (pred_op.empty() && ref_op.empty()) {
        report.empty_ops.push_back(name + suffix);
        return 1.0;
      }
      const double inter = static_cast<double>(intersection_size(pred_op, ref_op));
      const double prec = pred_op.empty() ? 0.0 : inter / static_cast<double>(pred_op.size());
      const double rec = ref_op.empty() ? 0.0 : inter / static_cast<double>(ref_op.size());
      return prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    };

    report.add_f[n - 1] = f1(difference(sets.pred, sets.source),
                             difference(sets.ref, sets.source), "add");
    report.keep_f[n - 1] = f1(intersection(sets.pred, sets.source),
                              intersection(sets.ref, sets.source), "keep");

    const auto pred_del = difference(sets.source, sets.pred);
    const auto ref_del = difference(sets.source, sets.ref);
    if (pred_del.empty() && ref_del.empty()) {
      report.empty_ops.push_back("del" + suffix);
      report.del_precision[n - 1] = 1.0;
    } else if (pred_del.empty()) {
      report.del_precision[n - 1] = 0.0;
    } else {
      report.del_precision[n - 1] =
          static_cast<double>(intersection_size(pred_del, ref_del)) /
          static_cast<double>(pred_del.size());
    }
  }

  for (int k = 0; k < 4; ++k) {
    report.add_F += report.add_f[k] / 4.0;
    report.keep_F += report.keep_f[k] / 4.0;
    report.del_P += report.del_precision[k] / 4.0;
  }
  report.score = 100.0 * (report.add_F + report.keep_F + report.del_P) / 3.0;
  return report;
}

SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  std::sort(values.begin(), values.end());
  SummaryStats s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = interpolated_quantile(values, 0.25);
  s.median = interpolated_quantile(values, 0.5);
  s.q3 = interpolated_quantile(values, 0.75);
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

DistributionSummary precision_distribution(std::span<const BleuReport> reports) {
  if (reports.empty()) throw std::invalid_argument("precision_distribution: empty input");
  DistributionSummary out;
  out.metric = "bleu_precision";
  for (int k = 0; k < 4; ++k) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const auto& r : reports) values.push_back(r.precisions[k]);
    out.per_n[k] = summarize(std::move(values));
  }
  return out;
}

DistributionSummary sari_delete_distribution(std::span<const SariReport> reports) {
  if (reports.empty()) throw std::invalid_argument("sari_delete_distribution: empty input");
  DistributionSummary out;
  out.metric = "sari_del_precision";
  for (int k = 0; k < 4; ++k) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const auto& r : reports) values.push_back(r.del_precision[k]);
    out.per_n[k] = summarize(std::move(values));
  }
  return out;
}

namespace {

nlohmann::json to_json(const SummaryStats& s) {
  return {{"count", s.count}, {"min", s.min},       {"q1", s.q1}, {"median", s.median},
          {"q3", s.q3},       {"max", s.max},       {"mean", s.mean}};
}

}  // namespace

std::string to_json_string(const BleuReport& report) {
  nlohmann::json j{{"score", report.score},
                   {"precisions", report.precisions},
                   {"matches", report.matches},
                   {"totals", report.totals},
                   {"brevity_penalty", report.brevity_penalty},
                   {"prediction_length", report.prediction_length},
                   {"reference_length", report.reference_length}};
  return j.dump();
}

std::string to_json_string(const MeteorReport& report) {
  nlohmann::json j{{"score", report.score},
                   {"matches", report.matches},
                   {"chunks", report.chunks},
                   {"precision", report.precision},
                   {"recall", report.recall},
                   {"fmean", report.fmean},
                   {"fragmentation_penalty", report.fragmentation_penalty},
                   {"exact_chunks", report.exact_chunks}};
  return j.dump();
}

std::string to_json_string(const SariReport& report) {
  nlohmann::json j{{"score", report.score},
                   {"add_f", report.add_f},
                   {"keep_f", report.keep_f},
                   {"del_precision", report.del_precision},
                   {"add_F", report.add_F},
                   {"keep_F", report.keep_F},
                   {"del_P", report.del_P},
                   {"empty_ops", report.empty_ops}};
  return j.dump();
}

std::string to_json_string(const DistributionSummary& summary) {
  nlohmann::json per_n = nlohmann::json::array();
  for (const auto& s : summary.per_n) per_n.push_back(to_json(s));
  nlohmann::json j{{"metric", summary.metric}, {"per_n", per_n}};
  return j.dump();
}

}  // namespace einfach

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "einfach/text.hpp"

namespace einfach {

/// BLEU with clipped modified n-gram precisions, unsmoothed geometric mean
/// and brevity penalty, on a 0..100 scale.
struct BleuReport {
  double score = 0.0;
  std::array<double, 4> precisions{};     // p_1..p_4
  std::array<std::int64_t, 4> matches{};  // clipped n-gram matches
  std::array<std::int64_t, 4> totals{};   // prediction n-gram counts
  double brevity_penalty = 0.0;
  std::size_t prediction_length = 0;
  std::size_t reference_length = 0;
};

/// METEOR with exact unigram matching, recall weight 9, fragmentation
/// penalty 0.5·(chunks/matches)³, on a 0..1 scale.
struct MeteorReport {
  double score = 0.0;
  std::int64_t matches = 0;
  std::int64_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double fragmentation_penalty = 0.0;
  bool exact_chunks = true;  // false when the chunk search hit its budget
};

/// SARI over set-based add/keep/delete operations per n = 1..4, on a
/// 0..100 scale. empty_ops lists the components ("add_3", "del_4", ...)
/// where both operation sets were empty and the 1.0 convention applied.
struct SariReport {
  double score = 0.0;
  std::array<double, 4> add_f{};
  std::array<double, 4> keep_f{};
  std::array<double, 4> del_precision{};
  double add_F = 0.0;  // means over n
  double keep_F = 0.0;
  double del_P = 0.0;
  std::vector<std::string> empty_ops;
};

struct SummaryStats {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Five-number summary + mean per n, over a batch of reports.
struct DistributionSummary {
  std::string metric;
  std::array<SummaryStats, 4> per_n{};
};

// Metrics run on the lowercased full token stream of a document (line
// breaks included as "\n" tokens); the *_tokens variants accept that
// stream directly.
BleuReport bleu(const Document& prediction, const Document& reference);
BleuReport bleu_tokens(std::span<const std::string> prediction,
                       std::span<const std::string> reference);

MeteorReport meteor(const Document& prediction, const Document& reference);
MeteorReport meteor_tokens(std::span<const std::string> prediction,
                           std::span<const std::string> reference);

SariReport sari(const Document& source, const Document& prediction, const Document& reference);
SariReport sari_tokens(std::span<const std::string> source,
                       std::span<const std::string> prediction,
                       std::span<const std::string> reference);

// Quartiles use linear interpolation between order statistics.
SummaryStats summarize(std::vector<double> values);

DistributionSummary precision_distribution(std::span<const BleuReport> reports);
DistributionSummary sari_delete_distribution(std::span<const SariReport> reports);

// Stable JSON renderings; keys match the struct field names.
std::string to_json_string(const BleuReport& report);
std::string to_json_string(const MeteorReport& report);
std::string to_json_string(const SariReport& report);
std::string to_json_string(const DistributionSummary& summary);

}  // namespace einfach

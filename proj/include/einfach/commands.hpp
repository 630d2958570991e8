#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "einfach/decode.hpp"

namespace einfach {

inline constexpr const char* kToolVersion = "einfach 0.1.0";

/// Raised for problems with input data (as opposed to bad flags or bugs).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Written next to every batch of output files. run_id is a deterministic
/// function of command name, config snapshot, input bytes, seed, and tool
/// version; created is the only field that varies between identical runs.
struct RunManifest {
  std::string run_id;
  std::string command;
  std::string tool_version = kToolVersion;
  std::string created;  // ISO-8601 UTC
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

RunManifest make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                          const std::map<std::string, std::string>& config, std::uint64_t seed);
void write_manifest(const RunManifest& manifest, const std::string& path);

/// Config snapshot used for manifests (keys match the config file schema).
std::map<std::string, std::string> config_snapshot(const DecodeConfig& cfg);

/// Resolves a model name against $EINFACH_MODEL_DIR when the name has no
/// directory component and does not exist as-is.
std::string resolve_model_path(const std::string& name);

struct EvalArgs {
  std::string corpus;       // references (provides sources for SARI)
  std::string predictions;  // same record format, target = system output
  std::string out_dir = "eval-out";
  bool distributions = false;  // also write per-n CSV distributions
  int jobs = 1;
};

struct ComplexityArgs {
  std::string corpus;
  std::string group_by = "provenance";  // "provenance", "split", or "meta:<key>"
  std::string field = "target";         // or "source"
  std::string verbs;                    // optional separable-verb lexicon file
  std::string out_dir;                  // optional JSON + manifest
};

struct DecodeArgs {
  std::string model;
  std::string corpus;
  std::string config_file;  // optional; overrides cfg values
  DecodeConfig cfg;
  std::string out = "predictions.jsonl";
  int jobs = 1;
};

struct StatsArgs {
  std::string corpus;
  std::string out_dir;  // optional JSON + manifest
};

struct TrainArgs {
  std::string corpus;
  std::string model_out = "model.lm";
  int order = 3;
  double discount = 0.0;
  int min_count = 2;
};

struct RatingsArgs {
  std::string ratings;
  std::string out_dir;  // optional JSON + manifest
};

struct SynthArgs {
  std::string corpus;     // targets are used as the simplifications
  std::string templates;  // prompt template file
  std::string out = "synthetic.jsonl";
  std::string prefix = "Alltagstext: ";
};

void cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
void cmd_complexity(const ComplexityArgs& args, std::ostream& out, std::ostream& err);
void cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err);
void cmd_stats(const StatsArgs& args, std::ostream& out, std::ostream& err);
void cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
void cmd_ratings(const RatingsArgs& args, std::ostream& out, std::ostream& err);
void cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);

}  // namespace einfach

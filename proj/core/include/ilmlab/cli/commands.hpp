#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ilmlab/cli/config.hpp"

namespace ilmlab::cli {

/// Command-line flags that override config keys.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<std::size_t> beam;
  std::optional<std::string> decoder;
  std::optional<std::size_t> decoder_width;
  std::optional<std::size_t> context_k;

  util::KeyValues as_kv() const;
};

/// Config file (if any) merged with the overrides; flags win.
ExperimentConfig resolve_config(const std::optional<std::string>& config_path, const Overrides& overrides);

enum class Command { kGen, kTrainAed, kTrainLm, kEstimate, kTune, kDecode, kEval, kPipeline };

std::string command_name(Command c);

struct RunContext {
  ExperimentConfig config;
  std::string out_dir;
  /// The invocation, recorded verbatim in manifests.
  std::vector<std::string> argv;
  std::size_t workers = 1;
  /// Restricts estimate/tune/eval to one method; otherwise all apply.
  std::optional<std::string> method;
  std::ostream* log = nullptr;
  std::ostream* out = nullptr;
};

// Every command reads and writes fixed paths below the output directory and
// records a manifest under manifests/<command>.manifest with the argv, the
// config hash and the hashes of its inputs and outputs.
//
//   gen        data/{train,dev,test,source_dev}.corpus, data/{target,source}.text
//   train-aed  models/aed.ckpt
//   train-lm   models/lm.ckpt (external, target text), models/dr_lm.ckpt
//   estimate   estimators/<method>.est
//   tune       results/tune.kv, results/grid_<method>.tsv
//   decode     decode/<method>.nbest, results/decode_<method>.kv
//   eval       results/table.txt, results/table.kv, decode/<method>.nbest
//   pipeline   all of the above in order

void cmd_gen(const RunContext& ctx);
void cmd_train_aed(const RunContext& ctx);
void cmd_train_lm(const RunContext& ctx);
void cmd_estimate(const RunContext& ctx);
void cmd_tune(const RunContext& ctx);
void cmd_decode(const RunContext& ctx);
void cmd_eval(const RunContext& ctx);
void cmd_pipeline(const RunContext& ctx);

void run_command(Command c, const RunContext& ctx);

/// File-name form of a method: none, sf, dr, zero, ed-h, ed-c, ex-h, mini-lstm.
std::string method_slug(fusion::Method m);

}  // namespace ilmlab::cli

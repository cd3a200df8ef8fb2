// ilmlab: command-line driver for the ILM estimation experiments.

#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "ilmlab/cli/commands.hpp"
#include "ilmlab/util/error.hpp"

namespace {

// Exit codes by failure class.
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInput = 4;
constexpr int kExitMissing = 5;
constexpr int kExitInternal = 10;

struct Flags {
  std::optional<std::string> config;
  std::string out = "ilmlab_out";
  std::size_t workers = 0;
  ilmlab::cli::Overrides overrides;
};

void add_common_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "Key-value config file");
  app.add_option("--seed", f.overrides.seed, "Base seed");
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  app.add_option("--workers", f.workers, "Worker threads (0: all cores)");
  app.add_option("--method", f.overrides.method, "Fusion or ILM method (none, SF, DR, zero, E_D[h], E_D[c], E_x[h], MiniLSTM)");
  app.add_option("--lambda1", f.overrides.lambda1, "External LM scale");
  app.add_option("--lambda2", f.overrides.lambda2, "ILM / prior scale");
  app.add_option("--beam", f.overrides.beam, "Beam width");
  app.add_option("--decoder", f.overrides.decoder, "Decoder kind")->check(CLI::IsMember({"lstm", "ff"}));
  app.add_option("--decoder-width", f.overrides.decoder_width, "Decoder hidden units");
  app.add_option("--context-k", f.overrides.context_k, "Label history of the FF decoder");
}

}  // namespace

int main(int argc, char** argv) {
  using ilmlab::cli::Command;
  CLI::App app{"ILM estimation lab for attention encoder-decoder models"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::kGen, "Generate the synthetic corpora and LM text"},
      {Command::kTrainAed, "Train the AED model"},
      {Command::kTrainLm, "Train the external LM and the decoder-like source LM"},
      {Command::kEstimate, "Compute ILM estimators (all, or --method)"},
      {Command::kTune, "Grid-search fusion scales on the dev set"},
      {Command::kDecode, "Decode the test set with one method and fixed scales"},
      {Command::kEval, "Decode with tuned scales and write the result table"},
      {Command::kPipeline, "Run gen through eval"},
  };
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [cmd, help] : commands) {
    auto* sub = app.add_subcommand(ilmlab::cli::command_name(cmd), help);
    add_common_flags(*sub, flags);
    subs.emplace_back(cmd, sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version are "errors" with exit code 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    ilmlab::cli::RunContext ctx;
    ctx.method = flags.overrides.method;
    ctx.config = ilmlab::cli::resolve_config(flags.config, flags.overrides);
    ctx.out_dir = flags.out;
    for (int i = 1; i < argc; ++i) ctx.argv.emplace_back(argv[i]);
    ctx.workers = flags.workers != 0 ? flags.workers : std::max(1u, std::thread::hardware_concurrency());
    ctx.log = &std::cerr;
    ctx.out = &std::cout;
    for (const auto& [cmd, sub] : subs)
      if (sub->parsed()) ilmlab::cli::run_command(cmd, ctx);
    return 0;
  } catch (const ilmlab::MissingArtifactError& e) {
    std::cerr << "ilmlab: " << e.what() << "\n";
    return kExitMissing;
  } catch (const ilmlab::ConfigError& e) {
    std::cerr << "ilmlab: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ilmlab::UsageError& e) {
    std::cerr << "ilmlab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ilmlab::InputError& e) {
    std::cerr << "ilmlab: " << e.what() << "\n";
    return kExitInput;
  } catch (const ilmlab::FormatError& e) {
    std::cerr << "ilmlab: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "ilmlab: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

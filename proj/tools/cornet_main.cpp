#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cornet/commands.hpp"
#include "cornet/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COR Network: co-occurrence relation training for multi-label "
               "temporal action localization"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, config_path, checkpoint_path, data_dir,
      report_path, annotations_path, vocab_path, out_csv;
  std::string split = "all";

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--spec", spec_path, "Synth spec JSON file")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train a COR Network");
  train->add_option("--config", config_path, "Run config JSON file")
      ->required();
  train->add_option("--out", out_dir, "Run directory for checkpoints and log");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON file")
      ->required();
  eval->add_option("--data", data_dir, "Corpus directory")->required();
  eval->add_option("--report", report_path, "Report JSON output path")
      ->required();
  eval->add_option("--split", split, "Videos to evaluate: all|train|val")
      ->check(CLI::IsMember({"all", "train", "val"}));

  CLI::App* cooc = app.add_subcommand("cooc", "Dump a co-occurrence matrix");
  cooc->add_option("--annotations", annotations_path, "Annotations JSON Lines")
      ->required();
  cooc->add_option("--vocab", vocab_path, "Vocabulary JSON file")->required();
  cooc->add_option("--out", out_csv, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      cornet::cmd_synth(spec_path, out_dir, std::cout);
    } else if (*train) {
      cornet::cmd_train(config_path, out_dir, std::cout);
    } else if (*eval) {
      const cornet::EvalSplit s = split == "train" ? cornet::EvalSplit::Train
                                  : split == "val" ? cornet::EvalSplit::Val
                                                   : cornet::EvalSplit::All;
      cornet::cmd_eval(checkpoint_path, data_dir, report_path, s, std::cout);
    } else if (*cooc) {
      cornet::cmd_cooc(annotations_path, vocab_path, out_csv, std::cout);
    }
  } catch (const cornet::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

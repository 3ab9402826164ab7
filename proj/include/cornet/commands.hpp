#pragma once

#include <iosfwd>
#include <string>

#include "cornet/trainer.hpp"

namespace cornet {

// Implementations behind the CLI subcommands. They throw on failure
// (ParseError for malformed inputs, Error otherwise); the CLI maps these to
// exit codes 2 and 1.

// Writes the corpus plus a manifest.json listing every file with its digest.
void cmd_synth(const std::string& spec_path, const std::string& out_dir,
               std::ostream& log);

TrainResult cmd_train(const std::string& config_path,
                      const std::string& out_dir, std::ostream& log);

EvalReport cmd_eval(const std::string& checkpoint_path,
                    const std::string& data_dir,
                    const std::string& report_path, EvalSplit split,
                    std::ostream& log);

void cmd_cooc(const std::string& annotations_path,
              const std::string& vocab_path, const std::string& out_csv,
              std::ostream& log);

}  // namespace cornet

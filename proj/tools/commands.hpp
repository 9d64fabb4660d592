// Copyright 2026 The attrib Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRIB_TOOLS_COMMANDS_HPP_
#define ATTRIB_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "attrib/run_config.hpp"

namespace attrib::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Registers every subcommand on construction; Run() executes whichever one
// was parsed and maps errors to exit codes (usage 2, domain 1).
class Commands {
 public:
  explicit Commands(CLI::App& app);
  int Run();

 private:
  void AddAttribute(CLI::App& app);
  void AddEval(CLI::App& app);
  void AddSpectra(CLI::App& app);
  void AddAttack(CLI::App& app);
  void AddAugment(CLI::App& app);
  void AddSynth(CLI::App& app);

  std::function<void()> selected_;
  std::unique_ptr<RunConfigParser> attribute_parser_;
  std::unique_ptr<RunConfigParser> eval_parser_;
  std::unique_ptr<RunConfigParser> augment_parser_;

  struct SpectraFlags {
    std::string dataset, out;
    std::size_t max_per_model = 1000;
  } spectra_;
  struct AttackFlags {
    std::string op, in, out;
    double param = 0;
  } attack_;
  struct AugmentFlags {
    std::size_t n_per_image = 10;
  } augment_;
  struct SynthFlags {
    std::uint64_t family_seed = 2023;
    std::size_t k = 4;
    std::string prompts, out;
    std::size_t per_prompt = 1;
    std::uint32_t size = 256;
  } synth_;
};

}  // namespace attrib::cli

#endif  // ATTRIB_TOOLS_COMMANDS_HPP_

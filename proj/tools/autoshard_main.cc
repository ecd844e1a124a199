/* Copyright 2026 The Autoshard Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// autoshard {analyze,partition,apply,simulate} MODULE.ir [flags]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "autoshard/driver.h"

namespace {

void AddCommonFlags(CLI::App* cmd, autoshard::RunConfig& cfg, bool* no_grouping) {
  cmd->add_option("input", cfg.input, "Module in the text IR")->required();
  cmd->add_option("--groups", cfg.groups,
                  "JSON argument groups overriding the automatic ones");
  cmd->add_flag("--no-grouping", *no_grouping,
                "Disable argument and set grouping");
  cmd->add_option("--dump-nda", cfg.dump_nda, "Write the name analysis JSON");
  cmd->add_option("--dump-graph", cfg.dump_graph,
                  "Write the dimension graph in dot format");
  cmd->add_option("--dump-conflicts", cfg.dump_conflicts,
                  "Write conflicts, sets, groups and resolutions JSON");
}

void AddMeshFlags(CLI::App* cmd, autoshard::RunConfig& cfg) {
  cmd->add_option("--mesh", cfg.mesh, "Device mesh, e.g. b=2,m=2")->required();
  cmd->add_option("--machine", cfg.machine, "Machine spec JSON");
  cmd->add_option("--seed", cfg.search.seed, "Seed for search and test inputs");
}

void AddOutputFlags(CLI::App* cmd, autoshard::RunConfig& cfg) {
  cmd->add_option("--emit-sharded", cfg.emit_sharded,
                  "Write the sharded module here instead of stdout");
  cmd->add_option("--report", cfg.report, "Write the report JSON");
  cmd->add_option("--memory-penalty", cfg.search.penalty_constant,
                  "Memory penalty constant");
  cmd->add_option("--verify", cfg.verify,
                  "Check the sharded module against the original")
      ->default_val(true);
}

}  // namespace

int main(int argc, char** argv) {
  autoshard::RunConfig cfg;
  bool no_grouping = false;
  CLI::App app{"Automatic tensor sharding over a device mesh"};
  app.require_subcommand(1);

  CLI::App* analyze = app.add_subcommand("analyze", "Print the name analysis");
  AddCommonFlags(analyze, cfg, &no_grouping);

  CLI::App* partition =
      app.add_subcommand("partition", "Search for a sharding and apply it");
  AddCommonFlags(partition, cfg, &no_grouping);
  AddMeshFlags(partition, cfg);
  AddOutputFlags(partition, cfg);
  partition->add_option("--budget", cfg.search.budget, "Total simulations")
      ->check(CLI::PositiveNumber);
  partition->add_option("--workers", cfg.search.workers, "Search threads")
      ->check(CLI::PositiveNumber);
  partition->add_option("--max-depth", cfg.search.max_depth,
                        "Maximum actions per trajectory")
      ->check(CLI::PositiveNumber);
  partition->add_option("--min-dims", cfg.search.min_unique_dims,
                        "Skip units with fewer dimensions");
  partition->add_option("--early-stop-rounds", cfg.search.early_stop_rounds,
                        "Stop after this many rounds without improvement");

  CLI::App* apply =
      app.add_subcommand("apply", "Apply an explicit sharding state");
  AddCommonFlags(apply, cfg, &no_grouping);
  AddMeshFlags(apply, cfg);
  AddOutputFlags(apply, cfg);
  apply->add_option("--state", cfg.state, "Sharding state JSON")->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Compare sharded and unsharded execution");
  AddCommonFlags(simulate, cfg, &no_grouping);
  AddMeshFlags(simulate, cfg);
  simulate->add_option("--state", cfg.state, "Sharding state JSON")
      ->required();
  simulate->add_option("--inputs", cfg.inputs, "Input tensors JSON");

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) cfg.subcommand = autoshard::Subcommand::kAnalyze;
  if (partition->parsed()) cfg.subcommand = autoshard::Subcommand::kPartition;
  if (apply->parsed()) cfg.subcommand = autoshard::Subcommand::kApply;
  if (simulate->parsed()) cfg.subcommand = autoshard::Subcommand::kSimulate;
  if (no_grouping) {
    cfg.group_args = false;
    cfg.group_sets = false;
  }

  absl::Status status = autoshard::Run(cfg, std::cout);
  if (!status.ok()) {
    std::cerr << "error: " << status.message() << "\n";
    return 1;
  }
  return 0;
}

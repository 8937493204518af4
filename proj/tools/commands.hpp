// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "physopt/config.hpp"

namespace physopt::cli {

struct CommandOptions {
  bool force = false;
  std::string out_name;       // generate: file name inside the output dir
  std::string instance_path;  // infer: instance JSON instead of a dataset record
  std::string split = "test";
};

int cmd_generate(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_train(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_infer(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_bench_baselines(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_bench_conditioning(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_landscape(const ExperimentConfig& cfg, const CommandOptions& opts);

}  // namespace physopt::cli

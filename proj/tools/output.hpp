// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace physopt::cli {

std::string sha256_file(const std::string& path);

// Output directory of one command. Files are write-once unless `force`;
// finish() records the resolved config and a manifest with file hashes.
class RunOutput {
 public:
  RunOutput(std::string dir, std::string command, bool force);

  // Full path for a new output file; fails if it exists and force is off.
  std::string claim(const std::string& name);
  void finish(const std::string& resolved_config);

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::string command_;
  bool force_;
  std::vector<std::string> files_;
};

}  // namespace physopt::cli

// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace physopt {

// Shortest round-trip text for a double ("nan", "inf" for non-finite).
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(long v) { return field(static_cast<long long>(v)); }
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
  std::size_t current_ = 0;
};

}  // namespace physopt

// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/csv.hpp"

#include <charconv>
#include <cmath>

#include "physopt/error.hpp"

namespace physopt {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size()) {
  if (!out_) raise(ErrorKind::Io, "cannot open '" + path + "' for writing");
  for (const auto& h : header) field(h);
  end_row();
}

CsvWriter& CsvWriter::field(const std::string& s) {
  if (current_++) out_ << ',';
  out_ << s;
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::field(long long v) { return field(std::to_string(v)); }

void CsvWriter::end_row() {
  if (current_ != columns_)
    raise(ErrorKind::ShapeMismatch, path_ + ": row has " + std::to_string(current_) + " fields, header " +
                                        std::to_string(columns_));
  out_ << '\n';
  current_ = 0;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) raise(ErrorKind::Io, "write to '" + path_ + "' failed");
}

}  // namespace physopt

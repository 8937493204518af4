// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace physopt {

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// float64 arrays in little-endian byte order regardless of host order.
std::vector<std::uint8_t> doubles_to_le_bytes(const double* data, std::size_t n);
std::vector<double> le_bytes_to_doubles(const std::vector<std::uint8_t>& bytes);

}  // namespace physopt

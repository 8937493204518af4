// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "output.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "physopt/error.hpp"

namespace physopt::cli {

namespace fs = std::filesystem;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot read '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    raise(ErrorKind::Io, "sha256 unavailable");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunOutput::RunOutput(std::string dir, std::string command, bool force)
    : dir_(std::move(dir)), command_(std::move(command)), force_(force) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) raise(ErrorKind::Io, "cannot create output directory '" + dir_ + "': " + ec.message());
}

std::string RunOutput::claim(const std::string& name) {
  const std::string path = (fs::path(dir_) / name).string();
  if (!force_ && fs::exists(path))
    raise(ErrorKind::Io, "'" + path + "' exists (use --force to overwrite)");
  files_.push_back(name);
  return path;
}

void RunOutput::finish(const std::string& resolved_config) {
  const std::string cfg_name = command_ + ".config.json";
  {
    const std::string path = claim(cfg_name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << resolved_config;
    if (!out) raise(ErrorKind::Io, "cannot write '" + path + "'");
  }
  nlohmann::ordered_json m;
  m["command"] = command_;
  m["files"] = nlohmann::ordered_json::object();
  for (const auto& f : files_) {
    const std::string path = (fs::path(dir_) / f).string();
    m["files"][f] = {{"sha256", sha256_file(path)}, {"bytes", fs::file_size(path)}};
  }
  const std::string path = claim(command_ + ".manifest.json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << m.dump(2) << '\n';
  if (!out) raise(ErrorKind::Io, "cannot write '" + path + "'");
}

}  // namespace physopt::cli

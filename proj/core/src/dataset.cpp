// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "physopt/base64.hpp"
#include "physopt/error.hpp"
#include "physopt/parallel.hpp"

namespace physopt {

using nlohmann::json;

Dataset generate_dataset(Family family, int n_total, std::uint64_t seed, double train_fraction) {
  if (n_total < 0) raise(ErrorKind::InvalidSpec, "negative instance count");
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
    raise(ErrorKind::InvalidSpec, "train fraction outside [0, 1]");
  Dataset ds;
  ds.family = family;
  ds.seed = seed;
  ds.grid = default_grid(family);
  const int n_train = static_cast<int>(std::lround(train_fraction * n_total));
  std::vector<Record> all(static_cast<std::size_t>(n_total));
  parallel_for(all.size(), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(family), i}));
    Record r;
    r.instance = sample_instance(family, rng, ds.grid);
    r.solution = solve_reference(r.instance, ds.grid);
    all[i] = std::move(r);
  });
  for (int i = 0; i < n_total; ++i) {
    if (i < n_train) ds.train.push_back(std::move(all[i]));
    else ds.test.push_back(std::move(all[i]));
  }
  return ds;
}

namespace {

json grid_to_json(const GridSpec& g) {
  return json{{"fine_nx", g.fine_nx},     {"stride_x", g.stride_x}, {"periodic_x", g.periodic_x},
              {"fine_nt", g.fine_nt},     {"stride_t", g.stride_t}, {"t_end", g.t_end},
              {"shape", json::array({g.nx(), g.nt()})}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.fine_nx = j.at("fine_nx").get<int>();
  g.stride_x = j.at("stride_x").get<int>();
  g.periodic_x = j.at("periodic_x").get<bool>();
  g.fine_nt = j.at("fine_nt").get<int>();
  g.stride_t = j.at("stride_t").get<int>();
  g.t_end = j.at("t_end").get<double>();
  if (g.fine_nx < 2 || g.stride_x < 1 || g.fine_nt < 1 || g.stride_t < 1)
    raise(ErrorKind::Parse, "invalid grid description");
  return g;
}

Provenance parse_provenance(const std::string& s) {
  if (s == "analytic") return Provenance::Analytic;
  if (s == "finite_difference") return Provenance::FiniteDifference;
  if (s == "splitting") return Provenance::Splitting;
  raise(ErrorKind::Parse, "unknown provenance '" + s + "'");
}

}  // namespace

std::string record_to_json(const Record& r, const std::string& split, int index) {
  json j;
  j["split"] = split;
  j["index"] = index;
  const PdeInstance& inst = r.instance;
  if (const auto* h = std::get_if<HelmholtzParams>(&inst.params)) {
    j["params"] = {{"omega", h->omega}};
    j["bc"] = {{"u0", h->u0}, {"v0", h->v0}};
    j["forcing"] = json::object();
  } else if (const auto* p = std::get_if<PoissonParams>(&inst.params)) {
    j["params"] = json::object();
    j["bc"] = {{"u0", p->u0}, {"v0", p->v0}};
    j["forcing"] = {{"a", p->a}};
  } else {
    const auto& q = std::get<NlrdParams>(inst.params);
    j["params"] = {{"nu", q.nu}, {"rho", q.rho}};
    j["bc"] = {{"initial", "gaussian_bump"}};
    j["forcing"] = json::object();
  }
  j["grid_shape"] = {r.solution.nx, r.solution.nt};
  j["provenance"] = provenance_name(r.solution.provenance);
  j["u"] = base64_encode(
      doubles_to_le_bytes(r.solution.values.data(), static_cast<std::size_t>(r.solution.values.size())));
  return j.dump();
}

PdeInstance instance_from_json(const std::string& line, Family family, const GridSpec& grid) {
  const json j = json::parse(line);
  PdeParams params;
  switch (family) {
    case Family::Helmholtz1d: {
      HelmholtzParams h;
      h.omega = j.at("params").at("omega").get<double>();
      h.u0 = j.at("bc").at("u0").get<double>();
      h.v0 = j.at("bc").at("v0").get<double>();
      params = h;
      break;
    }
    case Family::Poisson1d: {
      PoissonParams p;
      const auto a = j.at("forcing").at("a").get<std::vector<double>>();
      if (a.size() != p.a.size()) raise(ErrorKind::Parse, "expected 16 forcing coefficients");
      std::copy(a.begin(), a.end(), p.a.begin());
      p.u0 = j.at("bc").at("u0").get<double>();
      p.v0 = j.at("bc").at("v0").get<double>();
      params = p;
      break;
    }
    case Family::Nlrd1dt: {
      NlrdParams q;
      q.nu = j.at("params").at("nu").get<double>();
      q.rho = j.at("params").at("rho").get<double>();
      params = q;
      break;
    }
  }
  return instance_from_params(family, params, grid);
}

Record record_from_json(const std::string& line, Family family, const GridSpec& grid) {
  const json j = json::parse(line);
  Record r;
  r.instance = instance_from_json(line, family, grid);
  const auto shape = j.at("grid_shape").get<std::vector<int>>();
  if (shape.size() != 2 || shape[0] != grid.nx() || shape[1] != grid.nt())
    raise(ErrorKind::Parse, "grid shape does not match header");
  const std::vector<double> u = le_bytes_to_doubles(base64_decode(j.at("u").get<std::string>()));
  if (static_cast<int>(u.size()) != grid.nx() * grid.nt())
    raise(ErrorKind::Parse, "solution has " + std::to_string(u.size()) + " values");
  r.solution.nx = shape[0];
  r.solution.nt = shape[1];
  r.solution.values = Eigen::Map<const Vector>(u.data(), static_cast<Eigen::Index>(u.size()));
  r.solution.provenance = parse_provenance(j.at("provenance").get<std::string>());
  return r;
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::Io, "cannot open '" + path + "' for writing");
  json header{{"schema_version", kDatasetSchemaVersion},
              {"family", family_name(ds.family)},
              {"seed", ds.seed},
              {"grid", grid_to_json(ds.grid)},
              {"n_train", ds.train.size()},
              {"n_test", ds.test.size()}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < ds.train.size(); ++i)
    out << record_to_json(ds.train[i], "train", static_cast<int>(i)) << '\n';
  for (std::size_t i = 0; i < ds.test.size(); ++i)
    out << record_to_json(ds.test[i], "test", static_cast<int>(i)) << '\n';
  if (!out) raise(ErrorKind::Io, "write to '" + path + "' failed");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open '" + path + "'");
  Dataset ds;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) -> void {
    raise(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing header");
  }
  line_no = 1;
  std::size_t n_train = 0, n_test = 0;
  try {
    const json h = json::parse(line);
    if (h.at("schema_version").get<int>() != kDatasetSchemaVersion) fail("unsupported schema version");
    ds.family = parse_family(h.at("family").get<std::string>());
    ds.seed = h.at("seed").get<std::uint64_t>();
    ds.grid = grid_from_json(h.at("grid"));
    n_train = h.at("n_train").get<std::size_t>();
    n_test = h.at("n_test").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(std::string("bad header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse && std::string(e.what()).find(path) != std::string::npos) throw;
    fail(e.detail());
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string split = j.at("split").get<std::string>();
      Record r = record_from_json(line, ds.family, ds.grid);
      if (split == "train") ds.train.push_back(std::move(r));
      else if (split == "test") ds.test.push_back(std::move(r));
      else fail("unknown split '" + split + "'");
    } catch (const json::exception& e) {
      fail(std::string("malformed record: ") + e.what());
    } catch (const Error& e) {
      if (std::string(e.what()).find(path + ":") != std::string::npos) throw;
      fail(e.detail());
    }
  }
  if (ds.train.size() != n_train || ds.test.size() != n_test)
    raise(ErrorKind::Parse, path + ": header announces " + std::to_string(n_train) + "/" +
                                std::to_string(n_test) + " records, file has " +
                                std::to_string(ds.train.size()) + "/" + std::to_string(ds.test.size()));
  return ds;
}

}  // namespace physopt

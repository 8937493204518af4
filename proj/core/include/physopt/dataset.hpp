// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "physopt/pde.hpp"
#include "physopt/rng.hpp"

namespace physopt {

enum class Provenance { Analytic, FiniteDifference, Splitting };

std::string_view provenance_name(Provenance p);

// Fine reference grid and the subsampling stride that yields the training
// grid. x spans [0, 1]; a periodic axis drops the duplicated endpoint.
struct GridSpec {
  int fine_nx = 64;
  int stride_x = 1;
  bool periodic_x = false;
  int fine_nt = 1;  // 1 for stationary families
  int stride_t = 1;
  double t_end = 1.0;

  int nx() const { return (fine_nx + stride_x - 1) / stride_x; }
  int nt() const { return (fine_nt + stride_t - 1) / stride_t; }
  bool operator==(const GridSpec&) const = default;
};

GridSpec default_grid(Family family);
Vector fine_x(const GridSpec& g);
Vector fine_t(const GridSpec& g);
Vector coarse_x(const GridSpec& g);
Vector coarse_t(const GridSpec& g);

struct SolutionField {
  Vector values;  // row order matches the instance grid
  int nx = 0;
  int nt = 1;
  Provenance provenance = Provenance::Analytic;
};

PdeInstance instance_from_params(Family family, const PdeParams& params, const GridSpec& grid);
PdeInstance sample_instance(Family family, Rng& rng, const GridSpec& grid);
PdeInstance sample_instance(Family family, Rng& rng);

struct ReferenceOptions {
  int substeps_per_frame = 20;  // NLRD splitting steps between stored fine frames
};

SolutionField solve_reference(const PdeInstance& inst, const GridSpec& grid,
                              const ReferenceOptions& opts = {});

// Pieces of the reference solvers, exposed for testing.
Vector poisson_march(const Vector& x, const Vector& f, double u0, double v0);
Matrix nlrd_splitting(const NlrdParams& p, const Vector& x, const Vector& t, int substeps);

struct Record {
  PdeInstance instance;
  SolutionField solution;
};

struct Dataset {
  Family family = Family::Poisson1d;
  std::uint64_t seed = 0;
  GridSpec grid;
  std::vector<Record> train;
  std::vector<Record> test;
};

inline constexpr int kDatasetSchemaVersion = 1;

// n_total instances, the first round(train_fraction * n_total) for training.
Dataset generate_dataset(Family family, int n_total, std::uint64_t seed,
                         double train_fraction = 0.8);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

// Single record as one JSON line, and back (grid is rebuilt from the spec).
std::string record_to_json(const Record& r, const std::string& split, int index);
// Parameters of one record (params, bc, forcing); the solution is ignored.
PdeInstance instance_from_json(const std::string& line, Family family, const GridSpec& grid);
Record record_from_json(const std::string& line, Family family, const GridSpec& grid);

}  // namespace physopt

// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "physopt/nnet/tape.hpp"
#include "physopt/pde.hpp"
#include "physopt/types.hpp"

namespace physopt::nnet {

enum class LayerKind { Dense, Gelu, SpectralConv1d, Flatten, Unflatten };

struct LayerDesc {
  LayerKind kind = LayerKind::Dense;
  int in = 0;     // Dense
  int out = 0;    // Dense
  int width = 0;  // SpectralConv1d
  int modes = 0;  // SpectralConv1d

  static LayerDesc dense(int in, int out) { return {LayerKind::Dense, in, out, 0, 0}; }
  static LayerDesc gelu() { return {LayerKind::Gelu, 0, 0, 0, 0}; }
  static LayerDesc spectral(int width, int modes) {
    return {LayerKind::SpectralConv1d, 0, 0, width, modes};
  }
  static LayerDesc flatten() { return {LayerKind::Flatten, 0, 0, 0, 0}; }
  static LayerDesc unflatten() { return {LayerKind::Unflatten, 0, 0, 0, 0}; }
  bool operator==(const LayerDesc&) const = default;
};

std::size_t layer_param_count(const LayerDesc& d);

enum class GradientEncoding {
  Scaled,      // g / gradient_scale, one channel
  Normalized,  // g / rms(g) and log10(rms(g)) / 5, two channels
};

// Per-coefficient input channels, in this order:
//   gradient  (1 or 2 channels, see GradientEncoding)
//   gamma     PDE parameters broadcast (Poisson a_i/100 x16; Helmholtz omega/50;
//             NLRD (nu-3)/2, rho/5)
//   bc        Helmholtz/Poisson u0, v0 broadcast; NLRD projection of the
//             initial profile onto the basis
//   forcing   Poisson: projection of f onto the basis, /50
//   position  i/(N-1)
struct InputSpec {
  bool gradient = true;
  bool gamma = true;
  bool bc = true;
  bool forcing = true;
  bool position = true;
  GradientEncoding encoding = GradientEncoding::Normalized;
  double gradient_scale = 1.0;
  // Each gamma channel g also feeds sin(k pi g), cos(k pi g) for k = 1..F.
  int gamma_frequencies = 0;
  bool operator==(const InputSpec&) const = default;
};

int gradient_channels(const InputSpec& spec);
int context_channels(const InputSpec& spec, Family family);
int input_channels(const InputSpec& spec, Family family);

// Per-instance constant channels (N x context_channels).
Matrix context_features(const InputSpec& spec, const PdeProblem& problem);

// Encoded gradient channels on the tape (N x gradient_channels).
Var encode_gradient(Tape& t, Var grad, const InputSpec& spec);

struct ConditionerNet {
  Family family = Family::Poisson1d;
  int basis_size = 0;
  InputSpec input;
  std::vector<LayerDesc> layers;
  std::uint64_t seed = 0;
  std::vector<double> weights;

  std::size_t param_count() const { return weights.size(); }
  std::vector<std::size_t> layer_offsets() const;

  // features (N x C) -> update direction (N x 1)
  Var apply(Tape& t, Var features) const;
  // Full forward from the raw gradient and the precomputed context.
  Var forward(Tape& t, Var grad, const Matrix& context) const;
  Vector forward(const Vector& grad, const Matrix& context) const;
};

struct FnoOptions {
  int width = 32;
  int modes = 16;
  int blocks = 3;
  int fc = 64;
};

struct MlpOptions {
  int hidden = 256;
  int depth = 2;
};

// Validates layer chaining for an N x channels input and draws weights:
// dense uniform +-sqrt(6/(in+out)), zero bias; spectral U[0,1)/(in*out).
void initialize(ConditionerNet& net);

ConditionerNet make_fno_conditioner(Family family, int basis_size, const InputSpec& input,
                                    const FnoOptions& opts, std::uint64_t seed);
ConditionerNet make_mlp_conditioner(Family family, int basis_size, const InputSpec& input,
                                    const MlpOptions& opts, std::uint64_t seed);
// One 1 -> 1 dense layer with weight 1 and bias 0 over the scaled gradient:
// the update direction equals the raw gradient.
ConditionerNet make_identity_conditioner(Family family, int basis_size);

// Zeroes the weights and bias of the last dense layer.
void zero_output_layer(ConditionerNet& net);

inline constexpr const char* kCheckpointMagic = "physopt-checkpoint";
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const ConditionerNet& net, const std::string& path);
ConditionerNet load_checkpoint(const std::string& path);

}  // namespace physopt::nnet

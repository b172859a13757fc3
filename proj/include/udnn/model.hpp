#pragma once

#include <cstdint>
#include <vector>

#include "udnn/signal_model.hpp"
#include "udnn/split_complex.hpp"

namespace udnn {

// Learnable parameters of one layer: the reconstruction weights
// W1 (M x N), W2 (M x M) in split real/imaginary blocks, and the
// shrinkage threshold theta.
struct LayerParams {
  SplitComplexMatrix w1;
  SplitComplexMatrix w2;
  double theta = 0.0;
};

// Metadata carried with a model so runs are self-describing and a model
// cannot silently be applied to a measurement setup it was not built for.
struct ModelMeta {
  int n = 0;
  int m = 0;
  int k_layers = 0;
  double init_lambda = 0.0;
  double init_lipschitz = 0.0;
  std::uint64_t grid_fingerprint = 0;
};

struct UdnnModel {
  std::vector<LayerParams> layers;
  ModelMeta meta;

  int k_layers() const { return static_cast<int>(layers.size()); }
  void validate() const;
};

// Per-layer records needed by the hand-derived backward pass.
struct LayerTrace {
  SplitComplexVector x_input;   // x^{(k-1)}
  SplitComplexVector z_pre;     // z^{(k)} before thresholding
  SplitComplexVector x_output;  // x^{(k)}
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
};

// Every layer k gets w1 = (1/L) A^H, w2 = I - (1/L) A^H A, theta = lambda/L,
// so the initialized network is an exact realization of K ISTA iterations.
UdnnModel init_from_ista(const MeasurementModel& model, int k_layers,
                         double lambda);

// K-layer forward pass from x = 0. Each layer computes the four real-block
// products
//   z_R = W2_R x_R - W2_I x_I + W1_R y_R - W1_I y_I
//   z_I = W2_R x_I + W2_I x_R + W1_R y_I + W1_I y_R
// followed by the per-part soft threshold with the layer's theta.
SplitComplexVector forward(const UdnnModel& model,
                           const SplitComplexVector& y);

// As forward, additionally recording every layer's (x_input, z, x_output).
std::pair<SplitComplexVector, ForwardTrace> forward_traced(
    const UdnnModel& model, const SplitComplexVector& y);

// True when the model's shapes and fingerprint match the measurement model.
bool compatible(const UdnnModel& model, const MeasurementModel& measurement);

// Throws IntegrityError when not compatible.
void require_compatible(const UdnnModel& model,
                        const MeasurementModel& measurement);

}  // namespace udnn

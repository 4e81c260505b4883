#pragma once

#include <cstdint>
#include <vector>

#include "diffusion.hpp"
#include "rng.hpp"

namespace gdiff {

// Reference denoiser: MLP with 4 hidden layers of width 128, SiLU
// activations, and a 32-dim sinusoidal embedding of t/T concatenated onto the
// flattened state. The embedding's lowest frequency is one full turn over
// (0, 1], which alone makes it injective on t = 1..T; higher frequencies are
// geometrically spaced for resolution.
//
// Hidden weights are Xavier-uniform; the output layer starts at zero, so a
// freshly initialized model predicts zero noise.
class ReferenceMlp : public NoisePredictor {
 public:
  static constexpr int kHiddenWidth = 128;
  static constexpr int kHiddenLayers = 4;
  static constexpr int kTimeEmbedDim = 32;

  ReferenceMlp(int data_dim, int T);

  void init_params(RngStream& rng);

  int data_dim() const { return data_dim_; }
  int steps() const { return T_; }
  std::int64_t param_count() const { return static_cast<std::int64_t>(params_.size()); }
  const std::vector<double>& parameters() const { return params_; }
  // Direct access for the optimizer hot path; bypasses validation.
  std::vector<double>& mutable_parameters() { return params_; }
  // Validates count and finiteness.
  void set_parameters(const std::vector<double>& p);

  // NoisePredictor: x is [n, data_dim] row-major, one shared timestep.
  void eval_batch(const double* x, std::int64_t n, std::int64_t dim, int t,
                  double* out) const override;

  // Mean L1 over batch*dim between prediction and target, with the exact
  // subgradient (0 at zero residual) accumulated into grad (param layout).
  // x: [batch, data_dim]; t: per-sample timesteps; target: [batch, data_dim].
  double loss_and_grad(const double* x, const int* t, const double* target, std::int64_t batch,
                       std::vector<double>& grad);
  double loss_only(const double* x, const int* t, const double* target, std::int64_t batch) const;

  const std::vector<double>& embedding_at(int t) const;

 private:
  struct Layer {
    int in = 0, out = 0;
    std::size_t w_off = 0, b_off = 0;
  };

  void forward(const double* input, std::int64_t batch, const std::vector<int>& ts,
               std::vector<std::vector<double>>& acts, std::vector<std::vector<double>>& sigms,
               std::vector<double>& out) const;
  void assemble_input(const double* x, std::int64_t batch, const int* t,
                      std::vector<double>& input) const;

  int data_dim_;
  int T_;
  int input_dim_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
  std::vector<std::vector<double>> embed_;  // [T][kTimeEmbedDim]
};

// Adam with default moments (0.9, 0.999, eps 1e-8), no weight decay.
struct AdamState {
  std::vector<double> m, v;
  std::int64_t step = 0;
};

// Throws on non-finite gradient entries.
void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr);

}  // namespace gdiff

#include "mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "errors.hpp"

namespace gdiff {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::int64_t kEvalChunk = 256;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sign_of(double r) {
  if (r > 0.0) return 1.0;
  if (r < 0.0) return -1.0;
  return 0.0;
}

}  // namespace

ReferenceMlp::ReferenceMlp(int data_dim, int T) : data_dim_(data_dim), T_(T) {
  if (data_dim < 1) throw std::invalid_argument("ReferenceMlp: data_dim must be >= 1, got " + std::to_string(data_dim));
  if (T < 1) throw std::invalid_argument("ReferenceMlp: T must be >= 1, got " + std::to_string(T));
  input_dim_ = data_dim_ + kTimeEmbedDim;

  std::size_t off = 0;
  auto push_layer = [&](int in, int out) {
    Layer l;
    l.in = in;
    l.out = out;
    l.w_off = off;
    off += static_cast<std::size_t>(in) * out;
    l.b_off = off;
    off += static_cast<std::size_t>(out);
    layers_.push_back(l);
  };
  push_layer(input_dim_, kHiddenWidth);
  for (int i = 1; i < kHiddenLayers; ++i) push_layer(kHiddenWidth, kHiddenWidth);
  push_layer(kHiddenWidth, data_dim_);
  params_.assign(off, 0.0);

  const int pairs = kTimeEmbedDim / 2;
  embed_.resize(static_cast<std::size_t>(T_));
  for (int t = 1; t <= T_; ++t) {
    std::vector<double>& e = embed_[static_cast<std::size_t>(t - 1)];
    e.resize(kTimeEmbedDim);
    const double u = static_cast<double>(t) / static_cast<double>(T_);
    for (int i = 0; i < pairs; ++i) {
      const double expo = (pairs > 1) ? static_cast<double>(i) / (pairs - 1) : 0.0;
      const double omega = 2.0 * kPi * std::pow(1000.0, expo);
      e[static_cast<std::size_t>(2 * i)] = std::sin(omega * u);
      e[static_cast<std::size_t>(2 * i + 1)] = std::cos(omega * u);
    }
  }
}

void ReferenceMlp::init_params(RngStream& rng) {
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    const bool last = (li + 1 == layers_.size());
    const std::size_t nw = static_cast<std::size_t>(l.in) * l.out;
    if (last) {
      for (std::size_t i = 0; i < nw; ++i) params_[l.w_off + i] = 0.0;
    } else {
      const double a = std::sqrt(6.0 / (l.in + l.out));
      for (std::size_t i = 0; i < nw; ++i) params_[l.w_off + i] = (2.0 * rng.uniform() - 1.0) * a;
    }
    for (int o = 0; o < l.out; ++o) params_[l.b_off + static_cast<std::size_t>(o)] = 0.0;
  }
}

void ReferenceMlp::set_parameters(const std::vector<double>& p) {
  if (p.size() != params_.size()) {
    throw std::invalid_argument("ReferenceMlp: parameter count mismatch: expected " +
                                std::to_string(params_.size()) + ", got " + std::to_string(p.size()));
  }
  for (double v : p) {
    if (!std::isfinite(v)) throw std::invalid_argument("ReferenceMlp: non-finite parameter");
  }
  params_ = p;
}

const std::vector<double>& ReferenceMlp::embedding_at(int t) const {
  if (t < 1 || t > T_) throw std::invalid_argument("ReferenceMlp: timestep out of range: " + std::to_string(t));
  return embed_[static_cast<std::size_t>(t - 1)];
}

void ReferenceMlp::assemble_input(const double* x, std::int64_t batch, const int* t,
                                  std::vector<double>& input) const {
  input.resize(static_cast<std::size_t>(batch) * input_dim_);
  for (std::int64_t b = 0; b < batch; ++b) {
    const std::vector<double>& e = embedding_at(t[b]);
    double* row = input.data() + static_cast<std::size_t>(b) * input_dim_;
    std::memcpy(row, x + static_cast<std::size_t>(b) * data_dim_, sizeof(double) * static_cast<std::size_t>(data_dim_));
    std::memcpy(row + data_dim_, e.data(), sizeof(double) * kTimeEmbedDim);
  }
}

// acts[0] is the assembled input; acts[l+1] = silu(Z_l) for hidden layers.
// sigms stores [Z_l, sigmoid(Z_l)] pairs per hidden layer (interleaved as two
// blocks) so the backward pass can form silu'(z) = s * (1 + z * (1 - s)).
void ReferenceMlp::forward(const double* input, std::int64_t batch, const std::vector<int>&,
                           std::vector<std::vector<double>>& acts,
                           std::vector<std::vector<double>>& sigms,
                           std::vector<double>& out) const {
  const std::size_t nl = layers_.size();
  acts.resize(nl);
  sigms.resize(nl);
  const double* cur = input;
  for (std::size_t li = 0; li < nl; ++li) {
    const Layer& l = layers_[li];
    const bool last = (li + 1 == nl);
    std::vector<double>& y = last ? out : acts[li];
    y.assign(static_cast<std::size_t>(batch) * l.out, 0.0);
    const double* W = params_.data() + l.w_off;
    const double* bias = params_.data() + l.b_off;
    for (std::int64_t b = 0; b < batch; ++b) {
      double* yrow = y.data() + static_cast<std::size_t>(b) * l.out;
      for (int o = 0; o < l.out; ++o) yrow[o] = bias[o];
      const double* xrow = cur + static_cast<std::size_t>(b) * l.in;
      for (int i = 0; i < l.in; ++i) {
        const double xv = xrow[i];
        const double* wrow = W + static_cast<std::size_t>(i) * l.out;
        for (int o = 0; o < l.out; ++o) yrow[o] += xv * wrow[o];
      }
    }
    if (!last) {
      // In place: y holds Z; sigms[li] gets [Z | sigmoid(Z)]; y becomes silu(Z).
      std::vector<double>& zs = sigms[li];
      const std::size_t n = y.size();
      zs.resize(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        const double z = y[i];
        const double s = sigmoid(z);
        zs[i] = z;
        zs[n + i] = s;
        y[i] = z * s;
      }
      cur = y.data();
    }
  }
}

void ReferenceMlp::eval_batch(const double* x, std::int64_t n, std::int64_t dim, int t,
                              double* out) const {
  if (dim != data_dim_) {
    throw std::invalid_argument("ReferenceMlp: eval dim " + std::to_string(dim) +
                                " does not match data_dim " + std::to_string(data_dim_));
  }
  if (t < 1 || t > T_) throw std::invalid_argument("ReferenceMlp: timestep out of range: " + std::to_string(t));
  std::vector<double> input;
  std::vector<std::vector<double>> acts, sigms;
  std::vector<double> y;
  std::vector<int> ts;
  for (std::int64_t start = 0; start < n; start += kEvalChunk) {
    const std::int64_t chunk = std::min<std::int64_t>(kEvalChunk, n - start);
    ts.assign(static_cast<std::size_t>(chunk), t);
    assemble_input(x + static_cast<std::size_t>(start) * data_dim_, chunk, ts.data(), input);
    forward(input.data(), chunk, ts, acts, sigms, y);
    std::memcpy(out + static_cast<std::size_t>(start) * data_dim_, y.data(),
                sizeof(double) * static_cast<std::size_t>(chunk) * data_dim_);
  }
}

double ReferenceMlp::loss_only(const double* x, const int* t, const double* target,
                               std::int64_t batch) const {
  std::vector<double> input;
  std::vector<std::vector<double>> acts, sigms;
  std::vector<double> y;
  std::vector<int> ts(t, t + batch);
  assemble_input(x, batch, t, input);
  forward(input.data(), batch, ts, acts, sigms, y);
  const std::size_t n = static_cast<std::size_t>(batch) * data_dim_;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(y[i] - target[i]);
  return acc / static_cast<double>(n);
}

double ReferenceMlp::loss_and_grad(const double* x, const int* t, const double* target,
                                   std::int64_t batch, std::vector<double>& grad) {
  std::vector<double> input;
  std::vector<std::vector<double>> acts, sigms;
  std::vector<double> y;
  std::vector<int> ts(t, t + batch);
  assemble_input(x, batch, t, input);
  forward(input.data(), batch, ts, acts, sigms, y);

  grad.assign(params_.size(), 0.0);
  const std::size_t n = static_cast<std::size_t>(batch) * data_dim_;
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  std::vector<double> dy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - target[i];
    acc += std::fabs(r);
    dy[i] = sign_of(r) * inv_n;
  }

  std::vector<double> wt;  // transposed weights of the layer being walked
  std::vector<double> dx;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const double* a_in = (li == 0) ? input.data() : acts[li - 1].data();
    double* gW = grad.data() + l.w_off;
    double* gb = grad.data() + l.b_off;
    for (std::int64_t b = 0; b < batch; ++b) {
      const double* arow = a_in + static_cast<std::size_t>(b) * l.in;
      const double* drow = dy.data() + static_cast<std::size_t>(b) * l.out;
      for (int o = 0; o < l.out; ++o) gb[o] += drow[o];
      for (int i = 0; i < l.in; ++i) {
        const double av = arow[i];
        double* gwrow = gW + static_cast<std::size_t>(i) * l.out;
        for (int o = 0; o < l.out; ++o) gwrow[o] += av * drow[o];
      }
    }
    if (li == 0) break;

    const double* W = params_.data() + l.w_off;
    wt.assign(static_cast<std::size_t>(l.in) * l.out, 0.0);
    for (int i = 0; i < l.in; ++i)
      for (int o = 0; o < l.out; ++o)
        wt[static_cast<std::size_t>(o) * l.in + i] = W[static_cast<std::size_t>(i) * l.out + o];

    dx.assign(static_cast<std::size_t>(batch) * l.in, 0.0);
    for (std::int64_t b = 0; b < batch; ++b) {
      const double* drow = dy.data() + static_cast<std::size_t>(b) * l.out;
      double* dxrow = dx.data() + static_cast<std::size_t>(b) * l.in;
      for (int o = 0; o < l.out; ++o) {
        const double dv = drow[o];
        if (dv == 0.0) continue;
        const double* wtrow = wt.data() + static_cast<std::size_t>(o) * l.in;
        for (int i = 0; i < l.in; ++i) dxrow[i] += dv * wtrow[i];
      }
    }

    // Through the SiLU of the layer below.
    const std::vector<double>& zs = sigms[li - 1];
    const std::size_t m = dx.size();
    dy.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double z = zs[i];
      const double s = zs[m + i];
      dy[i] = dx[i] * s * (1.0 + z * (1.0 - s));
    }
  }
  return acc * inv_n;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: grad size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adam_step: state size mismatch");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  state.step += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw NumericError("adam_step: non-finite gradient at index " + std::to_string(i));
    }
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace gdiff

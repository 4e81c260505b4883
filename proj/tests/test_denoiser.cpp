#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "mlp.hpp"
#include "rng.hpp"

using namespace gdiff;

TEST_CASE("time embeddings are pairwise distinct over the full range") {
  const ReferenceMlp mlp(1, 1000);
  // Compare all pairs; two timesteps collide only if every coordinate agrees.
  for (int a = 1; a <= 1000; ++a) {
    const auto& ea = mlp.embedding_at(a);
    for (int b = a + 1; b <= 1000; ++b) {
      const auto& eb = mlp.embedding_at(b);
      double diff = 0.0;
      for (std::size_t i = 0; i < ea.size(); ++i) diff = std::max(diff, std::abs(ea[i] - eb[i]));
      if (diff <= 1e-9) {
        CAPTURE(a);
        CAPTURE(b);
        REQUIRE(diff > 1e-9);
      }
    }
  }
}

TEST_CASE("fresh model predicts exactly zero noise") {
  ReferenceMlp mlp(2, 10);
  RngStream rng(1);
  mlp.init_params(rng);
  const std::vector<double> x{0.5, -1.0, 2.0, 0.1};
  std::vector<double> out(4, 7.0);
  mlp.eval_batch(x.data(), 2, 2, 3, out.data());
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("eval guards dimensions and timestep range") {
  ReferenceMlp mlp(2, 10);
  RngStream rng(1);
  mlp.init_params(rng);
  const std::vector<double> x{0.0, 0.0};
  std::vector<double> out(2);
  CHECK_THROWS_AS(mlp.eval_batch(x.data(), 1, 3, 1, out.data()), std::invalid_argument);
  CHECK_THROWS_AS(mlp.eval_batch(x.data(), 1, 2, 0, out.data()), std::invalid_argument);
  CHECK_THROWS_AS(mlp.eval_batch(x.data(), 1, 2, 11, out.data()), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceMlp(0, 10), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceMlp(2, 0), std::invalid_argument);
}

TEST_CASE("set_parameters validates count and finiteness") {
  ReferenceMlp mlp(1, 5);
  RngStream rng(2);
  mlp.init_params(rng);
  auto p = mlp.parameters();
  CHECK_NOTHROW(mlp.set_parameters(p));
  p.push_back(0.0);
  CHECK_THROWS_AS(mlp.set_parameters(p), std::invalid_argument);
  p.pop_back();
  p[0] = std::nan("");
  CHECK_THROWS_AS(mlp.set_parameters(p), std::invalid_argument);
}

TEST_CASE("adam drives a quadratic to its minimum") {
  std::vector<double> theta{-4.0};
  AdamState state;
  for (int i = 0; i < 3000; ++i) {
    const std::vector<double> grad{2.0 * (theta[0] - 3.0)};
    adam_step(theta, grad, state, 0.02);
  }
  CHECK(std::abs(theta[0] - 3.0) < 0.01);
}

TEST_CASE("adam rejects non-finite gradients and size mismatches") {
  std::vector<double> theta{1.0};
  AdamState state;
  CHECK_THROWS_AS(adam_step(theta, {std::nan("")}, state, 0.1), NumericError);
  std::vector<double> theta2{1.0, 2.0};
  AdamState s2;
  adam_step(theta2, {0.1, 0.1}, s2, 0.1);
  CHECK_THROWS_AS(adam_step(theta2, {0.1}, s2, 0.1), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central differences") {
  ReferenceMlp mlp(2, 5);
  RngStream rng(12);
  mlp.init_params(rng);
  {
    // Wake the output layer; zero-initialized weights would silence most of
    // the gradient signal.
    auto& p = mlp.mutable_parameters();
    for (auto& v : p) v += 0.05 * rng.normal();
  }

  const std::int64_t batch = 3;
  std::vector<double> x(batch * 2);
  for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
  std::vector<int> ts(batch);
  for (auto& t : ts) t = 1 + static_cast<int>(rng.uniform_int(5));

  // Keep every residual away from the L1 kink so the difference stencil
  // stays on one side.
  std::vector<double> target(batch * 2);
  std::vector<double> pred(batch * 2);
  for (int redraw = 0; redraw < 200; ++redraw) {
    for (auto& v : target) v = rng.normal();
    double min_gap = 1e9;
    for (std::int64_t i = 0; i < batch; ++i) {
      mlp.eval_batch(x.data() + i * 2, 1, 2, ts[static_cast<std::size_t>(i)], pred.data() + i * 2);
    }
    for (std::size_t i = 0; i < target.size(); ++i)
      min_gap = std::min(min_gap, std::abs(pred[i] - target[i]));
    if (min_gap > 1e-3) break;
  }

  std::vector<double> grad;
  mlp.loss_and_grad(x.data(), ts.data(), target.data(), batch, grad);
  REQUIRE(grad.size() == static_cast<std::size_t>(mlp.param_count()));

  RngStream pick(99);
  const double h = 1e-5;
  int checked = 0;
  for (int tries = 0; tries < 5000 && checked < 30; ++tries) {
    const auto idx = static_cast<std::size_t>(pick.uniform_int(mlp.param_count()));
    if (std::abs(grad[idx]) < 1e-6) continue;
    auto& p = mlp.mutable_parameters();
    const double saved = p[idx];
    p[idx] = saved + h;
    const double up = mlp.loss_only(x.data(), ts.data(), target.data(), batch);
    p[idx] = saved - h;
    const double down = mlp.loss_only(x.data(), ts.data(), target.data(), batch);
    p[idx] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(grad[idx] - numeric) / std::max(std::abs(grad[idx]), std::abs(numeric));
    CHECK(rel < 1e-4);
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("checkpoint files round trip bit for bit") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "gdiff_test_ckpt.bin").string();

  ReferenceMlp mlp(2, 7);
  RngStream rng(5);
  mlp.init_params(rng);
  {
    auto& p = mlp.mutable_parameters();
    for (auto& v : p) v += 0.1 * rng.normal();
  }
  nlohmann::json header{{"format", "gdiff-checkpoint-v1"},
                        {"arch", {{"data_dim", 2}, {"T", 7}}},
                        {"noise", "gaussian"},
                        {"param_count", mlp.param_count()}};
  save_checkpoint(path, header, mlp.parameters());
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.header == header);
  REQUIRE(loaded.params.size() == mlp.parameters().size());
  CHECK(loaded.params == mlp.parameters());
  fs::remove(path);

  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}

#include "runs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "datasets.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "mlp.hpp"
#include "schedule.hpp"
#include "training.hpp"
#include "verify.hpp"
#include "version.hpp"

namespace gdiff {
namespace {

using nlohmann::json;

const json* find_key(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

double num_or(const json& j, const char* key, double dflt) {
  const json* v = find_key(j, key);
  if (!v) return dflt;
  if (!v->is_number()) throw std::invalid_argument(std::string("config: ") + key + " must be a number");
  return v->get<double>();
}

std::int64_t int_or(const json& j, const char* key, std::int64_t dflt) {
  const json* v = find_key(j, key);
  if (!v) return dflt;
  if (!v->is_number())
    throw std::invalid_argument(std::string("config: ") + key + " must be an integer");
  const double d = v->get<double>();
  const double r = std::nearbyint(d);
  if (!(std::fabs(d - r) < 1e-9))
    throw std::invalid_argument(std::string("config: ") + key + " must be an integer");
  return static_cast<std::int64_t>(r);
}

std::string str_or(const json& j, const char* key, const std::string& dflt) {
  const json* v = find_key(j, key);
  if (!v) return dflt;
  if (!v->is_string())
    throw std::invalid_argument(std::string("config: ") + key + " must be a string");
  return v->get<std::string>();
}

std::string require_str(const json& j, const char* key) {
  const json* v = find_key(j, key);
  if (!v || !v->is_string())
    throw std::invalid_argument(std::string("config: missing required string '") + key + "'");
  return v->get<std::string>();
}

std::vector<int> int_list_or(const json& j, const char* key, std::vector<int> dflt) {
  const json* v = find_key(j, key);
  if (!v) return dflt;
  if (!v->is_array())
    throw std::invalid_argument(std::string("config: ") + key + " must be an integer array");
  std::vector<int> out;
  for (const json& e : *v) {
    if (!e.is_number())
      throw std::invalid_argument(std::string("config: ") + key + " must hold integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<std::string> str_list_or(const json& j, const char* key) {
  const json* v = find_key(j, key);
  if (!v) return {};
  if (!v->is_array())
    throw std::invalid_argument(std::string("config: ") + key + " must be a string array");
  std::vector<std::string> out;
  for (const json& e : *v) {
    if (!e.is_string())
      throw std::invalid_argument(std::string("config: ") + key + " must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

struct BuiltSchedule {
  NoiseSchedule sched;
  json resolved;
};

BuiltSchedule build_schedule(const json& cfg) {
  const std::string kind = str_or(cfg, "schedule", "linear");
  if (kind == "linear") {
    const int T = static_cast<int>(int_or(cfg, "T", 1000));
    const double bs = num_or(cfg, "beta_start", 1e-4);
    const double be = num_or(cfg, "beta_end", 0.02);
    return {linear_schedule(T, bs, be),
            json{{"schedule", kind}, {"T", T}, {"beta_start", bs}, {"beta_end", be}}};
  }
  if (kind == "fibonacci") {
    const int T = static_cast<int>(int_or(cfg, "T", 10));
    const double b1 = num_or(cfg, "beta1", 1e-6);
    const double b2 = num_or(cfg, "beta2", 1e-6);
    return {fibonacci_schedule(T, b1, b2),
            json{{"schedule", kind}, {"T", T}, {"beta1", b1}, {"beta2", b2}}};
  }
  throw std::invalid_argument("config: schedule must be 'linear' or 'fibonacci'");
}

bool is_builtin_dataset(const std::string& name) {
  return name == "mixture1d" || name == "rings2d" || name == "blobs8x8";
}

json manifest_base(const char* command, json resolved_config) {
  return json{{"command", command}, {"version", kVersion}, {"config", std::move(resolved_config)}};
}

json schedule_header_json(const NoiseSchedule& sched, double theta0) {
  json j{{"T", sched.steps()}, {"beta", sched.beta}};
  if (std::isfinite(theta0)) j["theta0"] = theta0;
  return j;
}

}  // namespace

void cmd_schedule(const json& cfg, const std::string& out_dir) {
  BuiltSchedule built = build_schedule(cfg);
  const double theta0 = num_or(cfg, "theta0", std::numeric_limits<double>::quiet_NaN());
  if (find_key(cfg, "theta0")) built.resolved["theta0"] = theta0;

  ensure_dir(out_dir);
  atomic_write_text(out_dir + "/schedule.json", schedule_to_json(built.sched, theta0) + "\n");

  json results{{"T", built.sched.steps()},
               {"beta_first", built.sched.beta_at(1)},
               {"beta_last", built.sched.beta_at(built.sched.steps())},
               {"alpha_bar_last", built.sched.alpha_bar_at(built.sched.steps())},
               {"schedule_hash", schedule_hash(built.sched)}};
  if (std::isfinite(theta0)) {
    // Echo the variance identities so a schedule dump doubles as a quick
    // invariant report.
    const GammaParams gp = gamma_params(built.sched, theta0);
    double step_rel = 0.0, cum_rel = 0.0;
    for (int t = 1; t <= built.sched.steps(); ++t) {
      const double th2 = gp.theta_at(t) * gp.theta_at(t);
      step_rel = std::max(step_rel, std::fabs(gp.k_at(t) * th2 - built.sched.beta_at(t)) /
                                        built.sched.beta_at(t));
      const double target = 1.0 - built.sched.alpha_bar_at(t);
      cum_rel = std::max(cum_rel, std::fabs(gp.k_bar_at(t) * th2 - target) / target);
    }
    results["identity_step_rel"] = step_rel;
    results["identity_cum_rel"] = cum_rel;
  }

  json manifest = manifest_base("schedule", built.resolved);
  manifest["results"] = results;
  write_manifest(out_dir, manifest);
}

void cmd_train(const json& cfg, const std::string& out_dir) {
  BuiltSchedule built = build_schedule(cfg);

  TrainConfig tc;
  tc.noise = noise_kind_from_string(str_or(cfg, "noise", "gaussian"));
  tc.theta0 = num_or(cfg, "theta0", 0.001);
  tc.steps = int_or(cfg, "steps", 1000);
  tc.batch = int_or(cfg, "batch", 128);
  tc.lr = num_or(cfg, "lr", 1e-3);
  tc.seed = static_cast<std::uint64_t>(int_or(cfg, "seed", 0));

  const std::string dataset_name = str_or(cfg, "dataset", "mixture1d");
  const std::int64_t n_data = int_or(cfg, "n_data", 4096);
  const std::uint64_t data_seed = static_cast<std::uint64_t>(int_or(cfg, "data_seed", 1));
  Dataset data = is_builtin_dataset(dataset_name)
                     ? make_dataset(dataset_kind_from_string(dataset_name), n_data, data_seed)
                     : load_dataset_csv(dataset_name);

  TrainOutput out = train(tc, data, built.sched);

  json resolved = built.resolved;
  resolved["noise"] = noise_kind_to_string(tc.noise);
  if (tc.noise == NoiseKind::kGamma) resolved["theta0"] = tc.theta0;
  resolved["dataset"] = dataset_name;
  if (is_builtin_dataset(dataset_name)) {
    resolved["n_data"] = n_data;
    resolved["data_seed"] = data_seed;
  }
  resolved["steps"] = tc.steps;
  resolved["batch"] = tc.batch;
  resolved["lr"] = tc.lr;
  resolved["seed"] = tc.seed;

  ensure_dir(out_dir);
  atomic_write_text(out_dir + "/loss.csv", loss_history_csv(out.losses));

  const double theta0_hdr = tc.noise == NoiseKind::kGamma
                                ? tc.theta0
                                : std::numeric_limits<double>::quiet_NaN();
  json header{{"format", "gdiff-checkpoint-v1"},
              {"arch",
               {{"data_dim", out.model.data_dim()},
                {"T", out.model.steps()},
                {"hidden_width", ReferenceMlp::kHiddenWidth},
                {"hidden_layers", ReferenceMlp::kHiddenLayers},
                {"time_embed_dim", ReferenceMlp::kTimeEmbedDim}}},
              {"noise", noise_kind_to_string(tc.noise)},
              {"schedule", schedule_header_json(built.sched, theta0_hdr)},
              {"schedule_hash", schedule_hash(built.sched)},
              {"dataset",
               {{"name", data.name},
                {"dim", data.data.shape[1]},
                {"n", data.data.shape[0]},
                {"shift", data.shift},
                {"scale", data.scale}}},
              {"param_count", out.model.param_count()},
              {"train", {{"steps", tc.steps}, {"batch", tc.batch}, {"lr", tc.lr}, {"seed", tc.seed}}}};
  if (tc.noise == NoiseKind::kGamma) header["theta0"] = tc.theta0;
  save_checkpoint(out_dir + "/checkpoint.ckpt", header, out.model.parameters());

  json results{{"schedule_hash", schedule_hash(built.sched)},
               {"param_count", out.model.param_count()},
               {"data_dim", out.model.data_dim()}};
  if (!out.losses.empty()) {
    const std::size_t window =
        std::min<std::size_t>(500, out.losses.size());
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < window; ++i) first += out.losses[i].loss;
    for (std::size_t i = out.losses.size() - window; i < out.losses.size(); ++i)
      last += out.losses[i].loss;
    results["final_loss"] = out.losses.back().loss;
    results["loss_window"] = window;
    results["initial_window_mean"] = first / static_cast<double>(window);
    results["final_window_mean"] = last / static_cast<double>(window);
  } else {
    results["final_loss"] = nullptr;
  }

  json manifest = manifest_base("train", resolved);
  manifest["results"] = results;
  write_manifest(out_dir, manifest);
}

void cmd_sample(const json& cfg, const std::string& out_dir) {
  const std::string ckpt_path = require_str(cfg, "checkpoint");
  const Checkpoint ck = load_checkpoint(ckpt_path);
  const json& header = ck.header;

  if (str_or(header, "format", "") != "gdiff-checkpoint-v1")
    throw IoError("sample: unsupported checkpoint format in " + ckpt_path);
  const json* arch = find_key(header, "arch");
  const json* sched_json = find_key(header, "schedule");
  const json* dataset = find_key(header, "dataset");
  if (!arch || !sched_json || !dataset)
    throw IoError("sample: checkpoint header missing arch/schedule/dataset");

  const LoadedSchedule loaded = schedule_from_json(sched_json->dump());
  const NoiseSchedule& sched = loaded.schedule;
  const std::string hash = schedule_hash(sched);
  if (str_or(header, "schedule_hash", "") != hash)
    throw IoError("sample: checkpoint schedule hash does not match its own schedule (corrupt?)");
  const std::string want_hash = str_or(cfg, "schedule_hash", "");
  if (!want_hash.empty() && want_hash != hash)
    throw std::invalid_argument("sample: schedule hash mismatch: checkpoint has " + hash +
                                ", config expects " + want_hash);

  const int data_dim = static_cast<int>(int_or(*arch, "data_dim", 0));
  const int T = static_cast<int>(int_or(*arch, "T", 0));
  if (data_dim < 1 || T != sched.steps())
    throw IoError("sample: checkpoint arch disagrees with its schedule");

  const std::string noise = str_or(header, "noise", "gaussian");
  const std::string default_sampler = noise == "gamma" ? "ddgm" : "ddpm";
  const std::string sampler_name = str_or(cfg, "sampler", default_sampler);

  ChainConfig cc;
  if (sampler_name == "ddpm") {
    cc.sampler = SamplerKind::kDdpm;
  } else if (sampler_name == "ddgm") {
    cc.sampler = SamplerKind::kDdgm;
  } else if (sampler_name == "ddim") {
    cc.sampler = SamplerKind::kDdim;
  } else {
    throw std::invalid_argument("sample: sampler must be ddpm, ddgm or ddim");
  }
  if (cc.sampler == SamplerKind::kDdgm && noise != "gamma")
    throw std::invalid_argument("sample: the ddgm sampler needs a gamma checkpoint; this one was "
                                "trained with " + noise + " noise");

  const std::string init = str_or(cfg, "init", cc.sampler == SamplerKind::kDdgm ? "gamma" : "gaussian");
  if (init == "gamma") {
    cc.init = InitialState::kGamma;
  } else if (init == "gaussian") {
    cc.init = InitialState::kGaussian;
  } else {
    throw std::invalid_argument("sample: init must be gaussian or gamma");
  }
  if ((cc.sampler == SamplerKind::kDdgm || cc.init == InitialState::kGamma)) {
    if (noise != "gamma")
      throw std::invalid_argument("sample: gamma initialization needs a gamma checkpoint");
    cc.theta0 = num_or(header, "theta0", 0.0);
    if (!(cc.theta0 > 0.0)) throw IoError("sample: gamma checkpoint missing theta0");
  }

  const std::string sigma = str_or(cfg, "sigma", "sqrt_beta");
  if (sigma == "sqrt_beta") {
    cc.sigma = SigmaMode::kSqrtBeta;
  } else if (sigma == "beta") {
    cc.sigma = SigmaMode::kBeta;
  } else if (sigma == "zero") {
    cc.sigma = SigmaMode::kZero;
  } else {
    throw std::invalid_argument("sample: sigma must be sqrt_beta, beta or zero");
  }

  const int steps_n = static_cast<int>(int_or(cfg, "steps", T));
  const std::string strategy_name = str_or(cfg, "strategy", "uniform");
  SubsampleStrategy strategy;
  if (strategy_name == "uniform") {
    strategy = SubsampleStrategy::kUniform;
  } else if (strategy_name == "quadratic") {
    strategy = SubsampleStrategy::kQuadratic;
  } else {
    throw std::invalid_argument("sample: strategy must be uniform or quadratic");
  }
  cc.steps = subsample_timesteps(T, steps_n, strategy);

  cc.trace_at = int_list_or(cfg, "trace_at", {});
  cc.record_trace = !cc.trace_at.empty();

  const std::int64_t n = int_or(cfg, "n", 10000);
  const std::uint64_t seed = static_cast<std::uint64_t>(int_or(cfg, "seed", 0));
  if (n < 1) throw std::invalid_argument("sample: n must be positive");

  ReferenceMlp mlp(data_dim, T);
  mlp.set_parameters(ck.params);

  RngStream rng(seed);
  const ChainResult res = sample_chain(mlp, sched, cc, n, data_dim, rng);

  const std::vector<double> shift = dataset->at("shift").get<std::vector<double>>();
  const std::vector<double> scale = dataset->at("scale").get<std::vector<double>>();
  const Tensor raw = denormalize(res.samples, shift, scale);

  ensure_dir(out_dir);
  atomic_write_text(out_dir + "/samples.csv", samples_csv(raw.data, n, data_dim));
  if (cc.record_trace) {
    std::string csv = "t,index";
    for (int d = 0; d < data_dim; ++d) csv += ",x" + std::to_string(d);
    csv += "\n";
    for (std::size_t si = 0; si < res.trace.t.size(); ++si) {
      const Tensor& state = res.trace.state[si];
      for (std::int64_t i = 0; i < n; ++i) {
        csv += std::to_string(res.trace.t[si]);
        csv += ',';
        csv += std::to_string(i);
        for (int d = 0; d < data_dim; ++d) {
          csv += ',';
          csv += format_double(state.data[static_cast<std::size_t>(i * data_dim + d)]);
        }
        csv += '\n';
      }
    }
    atomic_write_text(out_dir + "/trace.csv", csv);
  }

  json resolved{{"checkpoint", ckpt_path}, {"sampler", sampler_name}, {"init", init},
                {"sigma", sigma},          {"steps", steps_n},        {"strategy", strategy_name},
                {"n", n},                  {"seed", seed}};
  if (!want_hash.empty()) resolved["schedule_hash"] = want_hash;
  if (cc.record_trace) resolved["trace_at"] = cc.trace_at;

  json results{{"n", n},
               {"dim", data_dim},
               {"schedule_hash", hash},
               {"trace_space", cc.record_trace ? json("normalized") : json(nullptr)}};
  const std::string ds_name = str_or(*dataset, "name", "");
  if (ds_name == "mixture1d" && data_dim == 1) {
    results["w1_mixture1d"] = wasserstein1_vs_mixture1d(raw.data);
  } else if (is_builtin_dataset(ds_name)) {
    const Tensor ref = generate_raw(dataset_kind_from_string(ds_name), n, RngStream(seed).split(12345));
    results["w1_marginal_mean_vs_fresh"] = wasserstein1_marginal_mean(raw, ref);
  }

  json manifest = manifest_base("sample", resolved);
  manifest["results"] = results;
  write_manifest(out_dir, manifest);
}

void cmd_verify(const json& cfg, const std::string& out_dir) {
  VerifyOptions opt;
  opt.only = str_list_or(cfg, "only");
  opt.corrupt = str_or(cfg, "corrupt", "");
  opt.t_grid = int_list_or(cfg, "t", opt.t_grid);
  opt.chains = int_or(cfg, "chains", opt.chains);
  opt.draws = int_or(cfg, "draws", opt.draws);
  opt.sweep_n = int_or(cfg, "sweep_n", opt.sweep_n);
  opt.sweep_t = int_list_or(cfg, "sweep_t", opt.sweep_t);
  opt.lemma2_n = int_or(cfg, "lemma2_n", opt.lemma2_n);
  opt.random_schedules = static_cast<int>(int_or(cfg, "random_schedules", opt.random_schedules));
  opt.grad_params = static_cast<int>(int_or(cfg, "grad_params", opt.grad_params));
  opt.grad_instances = static_cast<int>(int_or(cfg, "grad_instances", opt.grad_instances));
  opt.seed = static_cast<std::uint64_t>(int_or(cfg, "seed", static_cast<std::int64_t>(opt.seed)));

  const VerifyReport report = run_verify(opt);

  json resolved{{"only", opt.only},
                {"corrupt", opt.corrupt},
                {"t", opt.t_grid},
                {"chains", opt.chains},
                {"draws", opt.draws},
                {"sweep_n", opt.sweep_n},
                {"sweep_t", opt.sweep_t},
                {"lemma2_n", opt.lemma2_n},
                {"random_schedules", opt.random_schedules},
                {"grad_params", opt.grad_params},
                {"grad_instances", opt.grad_instances},
                {"seed", opt.seed}};

  ensure_dir(out_dir);
  atomic_write_text(out_dir + "/report.json", report.to_json().dump(2) + "\n");
  atomic_write_text(out_dir + "/summary.csv", report.summary_csv());

  json checks = json::object();
  for (const CheckResult& c : report.checks) checks[c.name] = c.passed;
  json manifest = manifest_base("verify", resolved);
  manifest["results"] = json{{"all_passed", report.all_passed}, {"checks", checks}};
  write_manifest(out_dir, manifest);

  if (!report.all_passed) {
    std::string failed;
    for (const CheckResult& c : report.checks)
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    throw CheckFailed("verify: failing checks: " + failed);
  }
}

void cmd_fit_noise(const json& cfg, const std::string& out_dir) {
  const std::string source = require_str(cfg, "source");
  const int bins = static_cast<int>(int_or(cfg, "bins", 100));
  const int repeats = static_cast<int>(int_or(cfg, "repeats", 100));
  const std::int64_t samples = int_or(cfg, "samples", 2000);
  const std::uint64_t seed = static_cast<std::uint64_t>(int_or(cfg, "seed", 0));
  if (repeats < 1) throw std::invalid_argument("fit-noise: repeats must be positive");

  std::vector<FitCurveRow> rows;
  json resolved{{"source", source}, {"bins", bins},   {"repeats", repeats},
                {"samples", samples}, {"seed", seed}};

  if (source == "synthetic-gamma" || source == "synthetic-gaussian") {
    BuiltSchedule built = build_schedule(cfg);
    const int points = static_cast<int>(
        int_or(cfg, "points", std::min(10, built.sched.steps())));
    const std::vector<int> t_grid =
        subsample_timesteps(built.sched.steps(), points, SubsampleStrategy::kUniform);
    GammaParams gp;
    const GammaParams* gpp = nullptr;
    if (source == "synthetic-gamma") {
      const double theta0 = num_or(cfg, "theta0", 0.1);
      gp = gamma_params(built.sched, theta0);
      gpp = &gp;
      resolved["theta0"] = theta0;
    }
    for (auto& [k, v] : built.resolved.items()) resolved[k] = v;
    resolved["points"] = points;
    rows = fit_error_curve_synthetic(built.sched, gpp, t_grid, repeats, samples, bins,
                                     RngStream(seed));
  } else if (source == "model") {
    const std::string ckpt_path = require_str(cfg, "checkpoint");
    const Checkpoint ck = load_checkpoint(ckpt_path);
    const json* arch = find_key(ck.header, "arch");
    const json* sched_json = find_key(ck.header, "schedule");
    if (!arch || !sched_json) throw IoError("fit-noise: checkpoint header missing arch/schedule");
    const LoadedSchedule loaded = schedule_from_json(sched_json->dump());
    const NoiseSchedule& sched = loaded.schedule;
    const int data_dim = static_cast<int>(int_or(*arch, "data_dim", 0));
    const int T = sched.steps();
    ReferenceMlp mlp(data_dim, T);
    mlp.set_parameters(ck.params);

    const int points = static_cast<int>(int_or(cfg, "points", std::min(10, T)));
    const std::vector<int> t_grid = subsample_timesteps(T, points, SubsampleStrategy::kUniform);
    const std::int64_t n_chains = std::max<std::int64_t>(1, samples / data_dim);

    ChainConfig cc;
    cc.steps.resize(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) cc.steps[static_cast<std::size_t>(t - 1)] = t;
    const std::string noise = str_or(ck.header, "noise", "gaussian");
    if (noise == "gamma") {
      cc.sampler = SamplerKind::kDdgm;
      cc.init = InitialState::kGamma;
      cc.theta0 = num_or(ck.header, "theta0", 0.0);
      if (!(cc.theta0 > 0.0)) throw IoError("fit-noise: gamma checkpoint missing theta0");
    }
    cc.record_trace = true;
    cc.trace_at = t_grid;

    std::vector<std::vector<std::vector<double>>> residuals(
        t_grid.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(repeats)));
    RngStream root(seed);
    for (int r = 0; r < repeats; ++r) {
      RngStream rng = root.split(static_cast<std::uint64_t>(r));
      const ChainResult res = sample_chain(mlp, sched, cc, n_chains, data_dim, rng);
      for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        const auto it = std::find(res.trace.t.begin(), res.trace.t.end(), t_grid[ti]);
        if (it == res.trace.t.end()) throw std::logic_error("fit-noise: trace point missing");
        const Tensor& x_t = res.trace.state[static_cast<std::size_t>(it - res.trace.t.begin())];
        const Tensor resid = residual_noise(res.samples, x_t, t_grid[ti], sched);
        residuals[ti][static_cast<std::size_t>(r)] = resid.data;
      }
    }
    resolved["checkpoint"] = ckpt_path;
    resolved["points"] = points;
    rows = fit_error_curve_from_residuals(t_grid, residuals, bins);
  } else {
    throw std::invalid_argument("fit-noise: source must be synthetic-gamma, synthetic-gaussian "
                                "or model");
  }

  std::string csv = "t,gaussian_mse_mean,gaussian_mse_sd,gamma_mse_mean,gamma_mse_sd\n";
  for (const FitCurveRow& r : rows) {
    csv += std::to_string(r.t);
    csv += ',' + format_double(r.gaussian_mse_mean);
    csv += ',' + format_double(r.gaussian_mse_sd);
    csv += ',' + format_double(r.gamma_mse_mean);
    csv += ',' + format_double(r.gamma_mse_sd);
    csv += '\n';
  }

  SvgSeries gauss{"gaussian fit", "#4363d8", {}, {}};
  SvgSeries gamma{"gamma fit", "#e6194b", {}, {}};
  bool gamma_le = true;
  double max_rel_gap = 0.0;
  for (const FitCurveRow& r : rows) {
    gauss.x.push_back(r.t);
    gauss.y.push_back(r.gaussian_mse_mean);
    gamma.x.push_back(r.t);
    gamma.y.push_back(r.gamma_mse_mean);
    if (r.gamma_mse_mean > r.gaussian_mse_mean) gamma_le = false;
    const double denom = std::max(r.gamma_mse_mean, r.gaussian_mse_mean);
    if (denom > 0.0)
      max_rel_gap =
          std::max(max_rel_gap, std::fabs(r.gamma_mse_mean - r.gaussian_mse_mean) / denom);
  }

  ensure_dir(out_dir);
  atomic_write_text(out_dir + "/curve.csv", csv);
  atomic_write_text(out_dir + "/curve.svg",
                    svg_line_plot("fit error by timestep", {gauss, gamma}));

  json manifest = manifest_base("fit-noise", resolved);
  manifest["results"] = json{{"rows", rows.size()},
                             {"gamma_mse_le_gaussian_everywhere", gamma_le},
                             {"max_relative_mean_gap", max_rel_gap}};
  write_manifest(out_dir, manifest);
}

}  // namespace gdiff

// gdiff command-line tool. All real work happens behind the C API in
// libgdiff; this file only resolves configuration (file < GDIFF_* environment
// < flags), forwards one JSON config per command, and reports results.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdiff/gdiff.h"

namespace {

using nlohmann::json;

// Collects (option, key, getter) bindings so the final config can honor
// precedence: config file lowest, environment and flags (which CLI11 already
// orders) on top.
class ConfigBinds {
 public:
  void bind(CLI::Option* opt, std::string key, std::function<json()> get) {
    binds_.push_back({opt, std::move(key), std::move(get)});
  }

  json resolve(const json& file) const {
    json cfg = file.is_object() ? file : json::object();
    for (const auto& b : binds_)
      if (b.opt->count() > 0) cfg[b.key] = b.get();
    return cfg;
  }

 private:
  struct Bind {
    CLI::Option* opt;
    std::string key;
    std::function<json()> get;
  };
  std::vector<Bind> binds_;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "gdiff: cannot open config file %s\n", path.c_str());
    std::exit(2);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::fprintf(stderr, "gdiff: config file %s is not a JSON object\n", path.c_str());
    std::exit(2);
  }
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return json();
  std::ostringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  return j.is_discarded() ? json() : j;
}

int status_to_exit(gdiff_status s) {
  switch (s) {
    case GDIFF_OK:
      return 0;
    case GDIFF_ERR_INVALID_ARGUMENT:
    case GDIFF_ERR_IO:
      return 2;
    default:
      return 1;
  }
}

int finish(const char* command, gdiff_status status) {
  if (status != GDIFF_OK)
    std::fprintf(stderr, "gdiff %s: %s\n", command, gdiff_last_error());
  return status_to_exit(status);
}

void print_verify_summary(const std::string& out_dir) {
  const json report = read_json_file(out_dir + "/report.json");
  if (!report.is_object() || !report.contains("checks")) return;
  for (const json& c : report.at("checks"))
    std::printf("%s: %s\n", c.at("name").get<std::string>().c_str(),
                c.at("passed").get<bool>() ? "pass" : "FAIL");
  std::printf("all passed: %s\n", report.at("all_passed").get<bool>() ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("gdiff ") + gdiff_version() +
               ": denoising diffusion with Gaussian and Gamma noise"};
  app.require_subcommand(1);

  // ----- schedule -----
  auto* sc = app.add_subcommand("schedule", "Build a noise schedule and dump it as JSON");
  std::string sc_config, sc_out = "runs/schedule";
  int sc_T = 1000;
  double sc_bs = 1e-4, sc_be = 0.02, sc_b1 = 1e-6, sc_b2 = 1e-6, sc_theta0 = 0.0;
  sc->add_option("--config", sc_config, "JSON config file")->envname("GDIFF_CONFIG");
  sc->add_option("--out", sc_out, "output directory")->envname("GDIFF_OUT");
  auto* sc_linear = sc->add_flag("--linear", "evenly spaced betas");
  auto* sc_fib = sc->add_flag("--fibonacci", "beta_t = beta_{t-1} + beta_{t-2}");
  sc_fib->excludes(sc_linear);
  auto* sc_T_o = sc->add_option("--T,--n", sc_T, "number of timesteps")->envname("GDIFF_T");
  auto* sc_bs_o = sc->add_option("--beta-start", sc_bs, "beta at t=1")->envname("GDIFF_BETA_START");
  auto* sc_be_o = sc->add_option("--beta-end", sc_be, "beta at t=T")->envname("GDIFF_BETA_END");
  auto* sc_b1_o = sc->add_option("--beta1", sc_b1, "first fibonacci seed")->envname("GDIFF_BETA1");
  auto* sc_b2_o = sc->add_option("--beta2", sc_b2, "second fibonacci seed")->envname("GDIFF_BETA2");
  auto* sc_th_o = sc->add_option("--theta0", sc_theta0, "include Gamma params at this theta0")
                      ->envname("GDIFF_THETA0");

  // ----- train -----
  auto* tr = app.add_subcommand("train", "Train a denoiser on a toy or CSV dataset");
  std::string tr_config, tr_out = "runs/train", tr_noise = "gaussian", tr_dataset = "mixture1d",
              tr_schedule = "linear";
  double tr_theta0 = 0.001, tr_bs = 1e-4, tr_be = 0.02, tr_lr = 1e-3;
  std::int64_t tr_T = 1000, tr_steps = 1000, tr_batch = 128, tr_seed = 0, tr_ndata = 4096,
               tr_dseed = 1;
  tr->add_option("--config", tr_config, "JSON config file")->envname("GDIFF_CONFIG");
  tr->add_option("--out", tr_out, "output directory")->envname("GDIFF_OUT");
  auto* tr_noise_o = tr->add_option("--kind,--noise", tr_noise, "noise kind: gaussian|gamma")
                         ->envname("GDIFF_NOISE");
  auto* tr_th_o = tr->add_option("--theta0", tr_theta0, "Gamma scale at t=0")->envname("GDIFF_THETA0");
  auto* tr_ds_o = tr->add_option("--dataset", tr_dataset, "mixture1d|rings2d|blobs8x8 or CSV path")
                      ->envname("GDIFF_DATASET");
  auto* tr_nd_o = tr->add_option("--n-data", tr_ndata, "builtin dataset size")->envname("GDIFF_N_DATA");
  auto* tr_dsd_o = tr->add_option("--data-seed", tr_dseed, "builtin dataset seed")
                       ->envname("GDIFF_DATA_SEED");
  auto* tr_sk_o = tr->add_option("--schedule", tr_schedule, "linear|fibonacci")->envname("GDIFF_SCHEDULE");
  auto* tr_T_o = tr->add_option("--T", tr_T, "number of timesteps")->envname("GDIFF_T");
  auto* tr_bs_o = tr->add_option("--beta-start", tr_bs, "beta at t=1")->envname("GDIFF_BETA_START");
  auto* tr_be_o = tr->add_option("--beta-end", tr_be, "beta at t=T")->envname("GDIFF_BETA_END");
  auto* tr_st_o = tr->add_option("--steps", tr_steps, "optimizer steps")->envname("GDIFF_STEPS");
  auto* tr_ba_o = tr->add_option("--batch", tr_batch, "batch size")->envname("GDIFF_BATCH");
  auto* tr_lr_o = tr->add_option("--lr", tr_lr, "learning rate")->envname("GDIFF_LR");
  auto* tr_se_o = tr->add_option("--seed", tr_seed, "training seed")->envname("GDIFF_SEED");

  // ----- sample -----
  auto* sa = app.add_subcommand("sample", "Sample from a trained checkpoint");
  std::string sa_config, sa_out = "runs/sample", sa_ckpt, sa_sampler, sa_init, sa_sigma,
              sa_strategy, sa_hash;
  std::int64_t sa_steps = 0, sa_n = 10000, sa_seed = 0;
  std::vector<int> sa_trace;
  sa->add_option("--config", sa_config, "JSON config file")->envname("GDIFF_CONFIG");
  sa->add_option("--out", sa_out, "output directory")->envname("GDIFF_OUT");
  auto* sa_ck_o = sa->add_option("--checkpoint", sa_ckpt, "checkpoint file")->envname("GDIFF_CHECKPOINT");
  auto* sa_sp_o = sa->add_option("--sampler", sa_sampler, "ddpm|ddgm|ddim")->envname("GDIFF_SAMPLER");
  auto* sa_in_o = sa->add_option("--init", sa_init, "initial state: gaussian|gamma")
                      ->envname("GDIFF_INIT");
  auto* sa_si_o = sa->add_option("--sigma", sa_sigma, "sqrt_beta|beta|zero")->envname("GDIFF_SIGMA");
  auto* sa_st_o = sa->add_option("--steps", sa_steps, "reverse steps (default: all T)")
                      ->envname("GDIFF_STEPS");
  auto* sa_sg_o = sa->add_option("--strategy", sa_strategy, "step grid: uniform|quadratic")
                      ->envname("GDIFF_STRATEGY");
  auto* sa_n_o = sa->add_option("--n", sa_n, "number of samples")->envname("GDIFF_N");
  auto* sa_se_o = sa->add_option("--seed", sa_seed, "sampling seed")->envname("GDIFF_SEED");
  auto* sa_tr_o = sa->add_option("--trace-at", sa_trace, "timesteps to record in trace.csv")
                      ->delimiter(',')
                      ->envname("GDIFF_TRACE_AT");
  auto* sa_ha_o = sa->add_option("--schedule-hash", sa_hash, "expected schedule hash")
                      ->envname("GDIFF_SCHEDULE_HASH");

  // ----- verify -----
  auto* ve = app.add_subcommand("verify", "Run the numerical verification suite");
  std::string ve_config, ve_out = "runs/verify", ve_corrupt;
  std::vector<std::string> ve_only;
  std::vector<int> ve_t, ve_sweep_t;
  std::int64_t ve_chains = 0, ve_draws = 0, ve_sweep_n = 0, ve_lemma2 = 0, ve_rand = 0,
               ve_gp = 0, ve_gi = 0, ve_seed = 0;
  ve->add_option("--config", ve_config, "JSON config file")->envname("GDIFF_CONFIG");
  ve->add_option("--out", ve_out, "output directory")->envname("GDIFF_OUT");
  auto* ve_on_o = ve->add_option("--only", ve_only, "run only these checks")
                      ->delimiter(',')
                      ->envname("GDIFF_ONLY");
  auto* ve_co_o = ve->add_option("--corrupt", ve_corrupt, "fault injection: kbar")
                      ->envname("GDIFF_CORRUPT");
  auto* ve_t_o = ve->add_option("--t", ve_t, "timestep grid for chain checks")
                     ->delimiter(',')
                     ->envname("GDIFF_T_GRID");
  auto* ve_ch_o = ve->add_option("--chains", ve_chains, "chains per MC comparison")
                      ->envname("GDIFF_CHAINS");
  auto* ve_dr_o = ve->add_option("--draws", ve_draws, "draws per moment check")->envname("GDIFF_DRAWS");
  auto* ve_sn_o = ve->add_option("--sweep-n", ve_sweep_n, "valid configs per sweep timestep")
                      ->envname("GDIFF_SWEEP_N");
  auto* ve_st_o = ve->add_option("--sweep-t", ve_sweep_t, "sweep timesteps")
                      ->delimiter(',')
                      ->envname("GDIFF_SWEEP_T");
  auto* ve_l2_o = ve->add_option("--lemma2-n", ve_lemma2, "identity residual instances")
                      ->envname("GDIFF_LEMMA2_N");
  auto* ve_rs_o = ve->add_option("--random-schedules", ve_rand, "random schedules for identities")
                      ->envname("GDIFF_RANDOM_SCHEDULES");
  auto* ve_gp_o = ve->add_option("--grad-params", ve_gp, "parameters per gradient instance")
                      ->envname("GDIFF_GRAD_PARAMS");
  auto* ve_gi_o = ve->add_option("--grad-instances", ve_gi, "gradient check instances")
                      ->envname("GDIFF_GRAD_INSTANCES");
  auto* ve_se_o = ve->add_option("--seed", ve_seed, "suite seed")->envname("GDIFF_SEED");

  // ----- fit-noise -----
  auto* fn = app.add_subcommand("fit-noise", "Fit Gaussian and Gamma pdfs to residual noise");
  std::string fn_config, fn_out = "runs/fit-noise", fn_source, fn_ckpt, fn_schedule = "linear";
  double fn_theta0 = 0.1, fn_bs = 1e-4, fn_be = 0.02;
  std::int64_t fn_T = 1000, fn_points = 10, fn_repeats = 100, fn_samples = 2000, fn_bins = 100,
               fn_seed = 0;
  fn->add_option("--config", fn_config, "JSON config file")->envname("GDIFF_CONFIG");
  fn->add_option("--out", fn_out, "output directory")->envname("GDIFF_OUT");
  auto* fn_so_o = fn->add_option("--source", fn_source,
                                 "synthetic-gamma|synthetic-gaussian|model")
                      ->envname("GDIFF_SOURCE");
  auto* fn_ck_o = fn->add_option("--checkpoint", fn_ckpt, "checkpoint for the model source")
                      ->envname("GDIFF_CHECKPOINT");
  auto* fn_th_o = fn->add_option("--theta0", fn_theta0, "theta0 for synthetic-gamma")
                      ->envname("GDIFF_THETA0");
  auto* fn_sk_o = fn->add_option("--schedule", fn_schedule, "linear|fibonacci")->envname("GDIFF_SCHEDULE");
  auto* fn_T_o = fn->add_option("--T", fn_T, "number of timesteps")->envname("GDIFF_T");
  auto* fn_bs_o = fn->add_option("--beta-start", fn_bs, "beta at t=1")->envname("GDIFF_BETA_START");
  auto* fn_be_o = fn->add_option("--beta-end", fn_be, "beta at t=T")->envname("GDIFF_BETA_END");
  auto* fn_po_o = fn->add_option("--points", fn_points, "timestep grid size")->envname("GDIFF_POINTS");
  auto* fn_re_o = fn->add_option("--repeats", fn_repeats, "repeats per timestep")
                      ->envname("GDIFF_REPEATS");
  auto* fn_sa_o = fn->add_option("--samples", fn_samples, "residuals per repeat")
                      ->envname("GDIFF_SAMPLES");
  auto* fn_bi_o = fn->add_option("--bins", fn_bins, "histogram bins")->envname("GDIFF_BINS");
  auto* fn_se_o = fn->add_option("--seed", fn_seed, "source seed")->envname("GDIFF_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand(sc)) {
    ConfigBinds binds;
    binds.bind(sc_linear, "schedule", [] { return json("linear"); });
    binds.bind(sc_fib, "schedule", [] { return json("fibonacci"); });
    binds.bind(sc_T_o, "T", [&] { return json(sc_T); });
    binds.bind(sc_bs_o, "beta_start", [&] { return json(sc_bs); });
    binds.bind(sc_be_o, "beta_end", [&] { return json(sc_be); });
    binds.bind(sc_b1_o, "beta1", [&] { return json(sc_b1); });
    binds.bind(sc_b2_o, "beta2", [&] { return json(sc_b2); });
    binds.bind(sc_th_o, "theta0", [&] { return json(sc_theta0); });
    const json cfg = binds.resolve(load_config_file(sc_config));
    const gdiff_status st = gdiff_run_schedule(cfg.dump().c_str(), sc_out.c_str());
    if (st == GDIFF_OK) {
      const json manifest = read_json_file(sc_out + "/manifest.json");
      if (manifest.contains("results"))
        std::printf("schedule written: %s/schedule.json (T=%d, hash %s)\n", sc_out.c_str(),
                    manifest["results"]["T"].get<int>(),
                    manifest["results"]["schedule_hash"].get<std::string>().c_str());
    }
    return finish("schedule", st);
  }

  if (app.got_subcommand(tr)) {
    ConfigBinds binds;
    binds.bind(tr_noise_o, "noise", [&] { return json(tr_noise); });
    binds.bind(tr_th_o, "theta0", [&] { return json(tr_theta0); });
    binds.bind(tr_ds_o, "dataset", [&] { return json(tr_dataset); });
    binds.bind(tr_nd_o, "n_data", [&] { return json(tr_ndata); });
    binds.bind(tr_dsd_o, "data_seed", [&] { return json(tr_dseed); });
    binds.bind(tr_sk_o, "schedule", [&] { return json(tr_schedule); });
    binds.bind(tr_T_o, "T", [&] { return json(tr_T); });
    binds.bind(tr_bs_o, "beta_start", [&] { return json(tr_bs); });
    binds.bind(tr_be_o, "beta_end", [&] { return json(tr_be); });
    binds.bind(tr_st_o, "steps", [&] { return json(tr_steps); });
    binds.bind(tr_ba_o, "batch", [&] { return json(tr_batch); });
    binds.bind(tr_lr_o, "lr", [&] { return json(tr_lr); });
    binds.bind(tr_se_o, "seed", [&] { return json(tr_seed); });
    const json cfg = binds.resolve(load_config_file(tr_config));
    const gdiff_status st = gdiff_run_train(cfg.dump().c_str(), tr_out.c_str());
    if (st == GDIFF_OK) {
      const json manifest = read_json_file(tr_out + "/manifest.json");
      const json results = manifest.value("results", json::object());
      if (results.contains("final_loss") && !results["final_loss"].is_null())
        std::printf("final loss %.6f (window mean %.6f); checkpoint %s/checkpoint.ckpt\n",
                    results["final_loss"].get<double>(),
                    results["final_window_mean"].get<double>(), tr_out.c_str());
      else
        std::printf("initialization checkpoint written to %s/checkpoint.ckpt\n", tr_out.c_str());
    }
    return finish("train", st);
  }

  if (app.got_subcommand(sa)) {
    ConfigBinds binds;
    binds.bind(sa_ck_o, "checkpoint", [&] { return json(sa_ckpt); });
    binds.bind(sa_sp_o, "sampler", [&] { return json(sa_sampler); });
    binds.bind(sa_in_o, "init", [&] { return json(sa_init); });
    binds.bind(sa_si_o, "sigma", [&] { return json(sa_sigma); });
    binds.bind(sa_st_o, "steps", [&] { return json(sa_steps); });
    binds.bind(sa_sg_o, "strategy", [&] { return json(sa_strategy); });
    binds.bind(sa_n_o, "n", [&] { return json(sa_n); });
    binds.bind(sa_se_o, "seed", [&] { return json(sa_seed); });
    binds.bind(sa_tr_o, "trace_at", [&] { return json(sa_trace); });
    binds.bind(sa_ha_o, "schedule_hash", [&] { return json(sa_hash); });
    const json cfg = binds.resolve(load_config_file(sa_config));
    const gdiff_status st = gdiff_run_sample(cfg.dump().c_str(), sa_out.c_str());
    if (st == GDIFF_OK) {
      const json manifest = read_json_file(sa_out + "/manifest.json");
      const json results = manifest.value("results", json::object());
      std::printf("samples written to %s/samples.csv\n", sa_out.c_str());
      if (results.contains("w1_mixture1d"))
        std::printf("W1 to mixture1d: %.6f\n", results["w1_mixture1d"].get<double>());
      if (results.contains("w1_marginal_mean_vs_fresh"))
        std::printf("mean marginal W1 to fresh data: %.6f\n",
                    results["w1_marginal_mean_vs_fresh"].get<double>());
    }
    return finish("sample", st);
  }

  if (app.got_subcommand(ve)) {
    ConfigBinds binds;
    binds.bind(ve_on_o, "only", [&] { return json(ve_only); });
    binds.bind(ve_co_o, "corrupt", [&] { return json(ve_corrupt); });
    binds.bind(ve_t_o, "t", [&] { return json(ve_t); });
    binds.bind(ve_ch_o, "chains", [&] { return json(ve_chains); });
    binds.bind(ve_dr_o, "draws", [&] { return json(ve_draws); });
    binds.bind(ve_sn_o, "sweep_n", [&] { return json(ve_sweep_n); });
    binds.bind(ve_st_o, "sweep_t", [&] { return json(ve_sweep_t); });
    binds.bind(ve_l2_o, "lemma2_n", [&] { return json(ve_lemma2); });
    binds.bind(ve_rs_o, "random_schedules", [&] { return json(ve_rand); });
    binds.bind(ve_gp_o, "grad_params", [&] { return json(ve_gp); });
    binds.bind(ve_gi_o, "grad_instances", [&] { return json(ve_gi); });
    binds.bind(ve_se_o, "seed", [&] { return json(ve_seed); });
    const json cfg = binds.resolve(load_config_file(ve_config));
    const gdiff_status st = gdiff_run_verify(cfg.dump().c_str(), ve_out.c_str());
    if (st == GDIFF_OK || st == GDIFF_ERR_CHECK_FAILED) print_verify_summary(ve_out);
    return finish("verify", st);
  }

  if (app.got_subcommand(fn)) {
    ConfigBinds binds;
    binds.bind(fn_so_o, "source", [&] { return json(fn_source); });
    binds.bind(fn_ck_o, "checkpoint", [&] { return json(fn_ckpt); });
    binds.bind(fn_th_o, "theta0", [&] { return json(fn_theta0); });
    binds.bind(fn_sk_o, "schedule", [&] { return json(fn_schedule); });
    binds.bind(fn_T_o, "T", [&] { return json(fn_T); });
    binds.bind(fn_bs_o, "beta_start", [&] { return json(fn_bs); });
    binds.bind(fn_be_o, "beta_end", [&] { return json(fn_be); });
    binds.bind(fn_po_o, "points", [&] { return json(fn_points); });
    binds.bind(fn_re_o, "repeats", [&] { return json(fn_repeats); });
    binds.bind(fn_sa_o, "samples", [&] { return json(fn_samples); });
    binds.bind(fn_bi_o, "bins", [&] { return json(fn_bins); });
    binds.bind(fn_se_o, "seed", [&] { return json(fn_seed); });
    const json cfg = binds.resolve(load_config_file(fn_config));
    const gdiff_status st = gdiff_run_fit_noise(cfg.dump().c_str(), fn_out.c_str());
    if (st == GDIFF_OK) {
      const json manifest = read_json_file(fn_out + "/manifest.json");
      const json results = manifest.value("results", json::object());
      std::printf("curve written to %s/curve.csv\n", fn_out.c_str());
      if (results.contains("gamma_mse_le_gaussian_everywhere"))
        std::printf("gamma fit <= gaussian fit at every t: %s\n",
                    results["gamma_mse_le_gaussian_everywhere"].get<bool>() ? "yes" : "no");
    }
    return finish("fit-noise", st);
  }

  return 2;
}

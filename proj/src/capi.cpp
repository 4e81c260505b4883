#include "gdiff/gdiff.h"

#include <exception>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "mlp.hpp"
#include "runs.hpp"
#include "schedule.hpp"
#include "version.hpp"

namespace {

thread_local std::string g_last_error;

gdiff_status fail(gdiff_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs fn, translating exceptions into status codes. std::domain_error joins
// invalid_argument: both mean the caller handed in values outside a
// documented precondition.
template <typename Fn>
gdiff_status guarded(Fn&& fn) {
  try {
    fn();
    return GDIFF_OK;
  } catch (const std::invalid_argument& e) {
    return fail(GDIFF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(GDIFF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const gdiff::IoError& e) {
    return fail(GDIFF_ERR_IO, e.what());
  } catch (const gdiff::NumericError& e) {
    return fail(GDIFF_ERR_NUMERIC, e.what());
  } catch (const gdiff::CheckFailed& e) {
    return fail(GDIFF_ERR_CHECK_FAILED, e.what());
  } catch (const std::exception& e) {
    return fail(GDIFF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GDIFF_ERR_INTERNAL, "unknown error");
  }
}

nlohmann::json parse_config(const char* config_json) {
  if (config_json == nullptr) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(config_json, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config is not valid JSON");
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  return j;
}

std::string require_cstr(const char* s, const char* what) {
  if (s == nullptr || *s == '\0')
    throw std::invalid_argument(std::string(what) + " must be non-empty");
  return s;
}

template <typename T>
void require_out(T* p) {
  if (p == nullptr) throw std::invalid_argument("out pointer is null");
}

}  // namespace

struct gdiff_schedule {
  gdiff::NoiseSchedule sched;
};

struct gdiff_model {
  gdiff::ReferenceMlp mlp;
  std::string noise;
};

extern "C" {

const char* gdiff_version(void) { return gdiff::kVersion; }

const char* gdiff_last_error(void) { return g_last_error.c_str(); }

gdiff_status gdiff_schedule_create_linear(int T, double beta_start, double beta_end,
                                          gdiff_schedule** out) {
  return guarded([&] {
    require_out(out);
    *out = new gdiff_schedule{gdiff::linear_schedule(T, beta_start, beta_end)};
  });
}

gdiff_status gdiff_schedule_create_fibonacci(int n, gdiff_schedule** out) {
  return guarded([&] {
    require_out(out);
    *out = new gdiff_schedule{gdiff::fibonacci_schedule(n)};
  });
}

gdiff_status gdiff_schedule_steps(const gdiff_schedule* s, int* out) {
  return guarded([&] {
    require_out(s);
    require_out(out);
    *out = s->sched.steps();
  });
}

gdiff_status gdiff_schedule_beta(const gdiff_schedule* s, int t, double* out) {
  return guarded([&] {
    require_out(s);
    require_out(out);
    if (t < 1 || t > s->sched.steps())
      throw std::invalid_argument("beta: t outside [1, T]");
    *out = s->sched.beta_at(t);
  });
}

gdiff_status gdiff_schedule_alpha_bar(const gdiff_schedule* s, int t, double* out) {
  return guarded([&] {
    require_out(s);
    require_out(out);
    if (t < 0 || t > s->sched.steps())
      throw std::invalid_argument("alpha_bar: t outside [0, T]");
    *out = s->sched.alpha_bar_at(t);
  });
}

gdiff_status gdiff_schedule_gamma_params(const gdiff_schedule* s, double theta0, int t,
                                         double* theta, double* k, double* k_bar) {
  return guarded([&] {
    require_out(s);
    if (t < 1 || t > s->sched.steps())
      throw std::invalid_argument("gamma_params: t outside [1, T]");
    const gdiff::GammaParams p = gdiff::gamma_params(s->sched, theta0);
    if (theta != nullptr) *theta = p.theta_at(t);
    if (k != nullptr) *k = p.k_at(t);
    if (k_bar != nullptr) *k_bar = p.k_bar_at(t);
  });
}

void gdiff_schedule_free(gdiff_schedule* s) { delete s; }

gdiff_status gdiff_model_load(const char* checkpoint_path, gdiff_model** out) {
  return guarded([&] {
    require_out(out);
    const std::string path = require_cstr(checkpoint_path, "checkpoint_path");
    const gdiff::Checkpoint ck = gdiff::load_checkpoint(path);
    if (!ck.header.contains("arch"))
      throw gdiff::IoError("checkpoint header missing arch: " + path);
    const nlohmann::json& arch = ck.header.at("arch");
    const int data_dim = arch.at("data_dim").get<int>();
    const int T = arch.at("T").get<int>();
    gdiff::ReferenceMlp mlp(data_dim, T);
    mlp.set_parameters(ck.params);
    std::string noise = ck.header.value("noise", "gaussian");
    *out = new gdiff_model{std::move(mlp), std::move(noise)};
  });
}

gdiff_status gdiff_model_data_dim(const gdiff_model* m, int* out) {
  return guarded([&] {
    require_out(m);
    require_out(out);
    *out = m->mlp.data_dim();
  });
}

gdiff_status gdiff_model_steps(const gdiff_model* m, int* out) {
  return guarded([&] {
    require_out(m);
    require_out(out);
    *out = m->mlp.steps();
  });
}

gdiff_status gdiff_model_param_count(const gdiff_model* m, int64_t* out) {
  return guarded([&] {
    require_out(m);
    require_out(out);
    *out = m->mlp.param_count();
  });
}

gdiff_status gdiff_model_noise_kind(const gdiff_model* m, const char** out) {
  return guarded([&] {
    require_out(m);
    require_out(out);
    *out = m->noise.c_str();
  });
}

gdiff_status gdiff_model_predict(const gdiff_model* m, const double* x, int64_t n, int t,
                                 double* out) {
  return guarded([&] {
    require_out(m);
    require_out(out);
    if (x == nullptr) throw std::invalid_argument("predict: x is null");
    if (n < 1) throw std::invalid_argument("predict: n must be positive");
    m->mlp.eval_batch(x, n, m->mlp.data_dim(), t, out);
  });
}

void gdiff_model_free(gdiff_model* m) { delete m; }

gdiff_status gdiff_run_schedule(const char* config_json, const char* out_dir) {
  return guarded([&] {
    gdiff::cmd_schedule(parse_config(config_json), require_cstr(out_dir, "out_dir"));
  });
}

gdiff_status gdiff_run_train(const char* config_json, const char* out_dir) {
  return guarded([&] {
    gdiff::cmd_train(parse_config(config_json), require_cstr(out_dir, "out_dir"));
  });
}

gdiff_status gdiff_run_sample(const char* config_json, const char* out_dir) {
  return guarded([&] {
    gdiff::cmd_sample(parse_config(config_json), require_cstr(out_dir, "out_dir"));
  });
}

gdiff_status gdiff_run_verify(const char* config_json, const char* out_dir) {
  return guarded([&] {
    gdiff::cmd_verify(parse_config(config_json), require_cstr(out_dir, "out_dir"));
  });
}

gdiff_status gdiff_run_fit_noise(const char* config_json, const char* out_dir) {
  return guarded([&] {
    gdiff::cmd_fit_noise(parse_config(config_json), require_cstr(out_dir, "out_dir"));
  });
}

}  // extern "C"

#include "sparsym/sparsym.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "app/checkpoint.hpp"
#include "app/commands.hpp"
#include "common/error.hpp"
#include "expr/json.hpp"
#include "expr/text.hpp"
#include "expr/unroll.hpp"
#include "net/graph.hpp"

struct sparsym_network {
  sparsym::app::Checkpoint ckpt;
};

struct sparsym_expr {
  sparsym::expr::Expr e;
  std::vector<std::string> feature_names;  // used by to_text
};

namespace {

thread_local std::string g_last_error;

sparsym_status map_code(sparsym::ErrorCode code) {
  using sparsym::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return SPARSYM_ERR_INVALID_ARGUMENT;
    case ErrorCode::Config: return SPARSYM_ERR_CONFIG;
    case ErrorCode::Io: return SPARSYM_ERR_IO;
    case ErrorCode::Parse: return SPARSYM_ERR_PARSE;
    case ErrorCode::Shape: return SPARSYM_ERR_SHAPE;
    case ErrorCode::Numeric: return SPARSYM_ERR_NUMERIC;
    case ErrorCode::Runtime: return SPARSYM_ERR_RUNTIME;
  }
  return SPARSYM_ERR_INTERNAL;
}

template <typename Fn>
sparsym_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SPARSYM_OK;
  } catch (const sparsym::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown exception";
  }
  return SPARSYM_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) sparsym::fail(sparsym::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sparsym::app::CommandOptions options(const char* out_dir, int has_seed, uint64_t seed) {
  sparsym::app::CommandOptions o;
  if (out_dir) o.out_dir = out_dir;
  if (has_seed) o.seed = seed;
  return o;
}

std::vector<std::string> split_commas(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

extern "C" {

const char* sparsym_version(void) { return "0.1.0"; }

const char* sparsym_last_error(void) { return g_last_error.c_str(); }

const char* sparsym_status_name(sparsym_status status) {
  switch (status) {
    case SPARSYM_OK: return "ok";
    case SPARSYM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SPARSYM_ERR_CONFIG: return "config";
    case SPARSYM_ERR_IO: return "io";
    case SPARSYM_ERR_PARSE: return "parse";
    case SPARSYM_ERR_SHAPE: return "shape";
    case SPARSYM_ERR_NUMERIC: return "numeric";
    case SPARSYM_ERR_RUNTIME: return "runtime";
    case SPARSYM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void sparsym_string_free(char* s) { std::free(s); }

sparsym_status sparsym_cmd_train(const char* config_path, const char* out_dir, int has_seed,
                                 uint64_t seed, char** result_json) {
  return guarded([&] {
    require(config_path && result_json, "config_path and result_json are required");
    auto r = sparsym::app::cmd_train(config_path, options(out_dir, has_seed, seed));
    *result_json = dup_string(r.dump());
  });
}

sparsym_status sparsym_cmd_scan(const char* config_path, const char* out_dir, int has_seed,
                                uint64_t seed, char** result_json) {
  return guarded([&] {
    require(config_path && result_json, "config_path and result_json are required");
    auto r = sparsym::app::cmd_scan(config_path, options(out_dir, has_seed, seed));
    *result_json = dup_string(r.dump());
  });
}

sparsym_status sparsym_cmd_eval(const char* expressions_path, const char* dataset_path,
                                const char* label_columns, const char* task, char** result_json) {
  return guarded([&] {
    require(expressions_path && dataset_path && result_json,
            "expressions_path, dataset_path and result_json are required");
    sparsym::app::EvalOptions o;
    o.label_columns = split_commas(label_columns);
    if (task) o.task = sparsym::data::parse_task(task);
    auto r = sparsym::app::cmd_eval(expressions_path, dataset_path, o);
    *result_json = dup_string(r.dump());
  });
}

sparsym_status sparsym_cmd_export(const char* checkpoint_path, const char* out_dir,
                                  char** result_json) {
  return guarded([&] {
    require(checkpoint_path && out_dir && result_json,
            "checkpoint_path, out_dir and result_json are required");
    auto r = sparsym::app::cmd_export(checkpoint_path, out_dir);
    *result_json = dup_string(r.dump());
  });
}

sparsym_status sparsym_network_load(const char* checkpoint_path, sparsym_network** out) {
  return guarded([&] {
    require(checkpoint_path && out, "checkpoint_path and out are required");
    *out = new sparsym_network{sparsym::app::load_checkpoint(checkpoint_path)};
  });
}

void sparsym_network_free(sparsym_network* net) { delete net; }

sparsym_status sparsym_network_dims(const sparsym_network* net, size_t* n_input,
                                    size_t* n_output) {
  return guarded([&] {
    require(net, "net is null");
    if (n_input) *n_input = net->ckpt.net.spec.input_dim;
    if (n_output) *n_output = net->ckpt.net.spec.output_dim;
  });
}

sparsym_status sparsym_network_forward(const sparsym_network* net, const double* x,
                                       size_t n_rows, double* y) {
  return guarded([&] {
    require(net && x && y && n_rows > 0, "net, x, y must be non-null and n_rows positive");
    const auto& spec = net->ckpt.net.spec;
    sparsym::diff::Array batch({n_rows, spec.input_dim},
                               std::vector<double>(x, x + n_rows * spec.input_dim));
    const auto out = sparsym::net::forward_masked(net->ckpt.net, batch);
    std::memcpy(y, out.values().data(), out.size() * sizeof(double));
  });
}

sparsym_status sparsym_network_sparsity(const sparsym_network* net, double out[4]) {
  return guarded([&] {
    require(net && out, "net and out are required");
    const auto r = sparsym::net::sparsity(net->ckpt.net);
    out[0] = r.s_weight;
    out[1] = r.s_input;
    out[2] = r.s_unary;
    out[3] = r.s_binary;
  });
}

sparsym_status sparsym_network_unroll(const sparsym_network* net, size_t output,
                                      sparsym_expr** out) {
  return guarded([&] {
    require(net && out, "net and out are required");
    require(output < net->ckpt.net.spec.output_dim, "output index out of range");
    auto exprs = sparsym::expr::unroll_simplified(net->ckpt.net, net->ckpt.standardization);
    *out = new sparsym_expr{exprs[output], net->ckpt.feature_names};
  });
}

sparsym_status sparsym_expr_parse(const char* text, const char* const* feature_names,
                                  size_t n_features, sparsym_expr** out) {
  return guarded([&] {
    require(text && out, "text and out are required");
    std::vector<std::string> names;
    for (size_t i = 0; feature_names && i < n_features; ++i) names.emplace_back(feature_names[i]);
    auto parsed = sparsym::expr::parse_text(text, names);
    *out = new sparsym_expr{std::move(parsed), std::move(names)};
  });
}

sparsym_status sparsym_expr_from_json(const char* json, sparsym_expr** out) {
  return guarded([&] {
    require(json && out, "json and out are required");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      sparsym::fail(sparsym::ErrorCode::Parse, e.what());
    }
    *out = new sparsym_expr{sparsym::expr::from_json(j), {}};
  });
}

void sparsym_expr_free(sparsym_expr* e) { delete e; }

sparsym_status sparsym_expr_eval(const sparsym_expr* e, const double* x, size_t n,
                                 double* value) {
  return guarded([&] {
    require(e && value && (x || n == 0), "e, x and value are required");
    *value = sparsym::expr::eval(e->e, std::span<const double>(x, n));
  });
}

size_t sparsym_expr_complexity(const sparsym_expr* e) {
  return e ? sparsym::expr::complexity(e->e) : 0;
}

sparsym_status sparsym_expr_to_text(const sparsym_expr* e, int display, char** text) {
  return guarded([&] {
    require(e && text, "e and text are required");
    sparsym::expr::TextOptions o;
    o.display = display != 0;
    o.feature_names = e->feature_names;
    *text = dup_string(sparsym::expr::to_text(e->e, o));
  });
}

sparsym_status sparsym_expr_to_json(const sparsym_expr* e, char** json) {
  return guarded([&] {
    require(e && json, "e and json are required");
    *json = dup_string(sparsym::expr::to_json(e->e).dump());
  });
}

}  // extern "C"

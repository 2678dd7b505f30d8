#include "app/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace sparsym::app {

namespace {

constexpr const char* kFormat = "sparsym-checkpoint";
constexpr int kVersion = 1;

nlohmann::json array_to_json(const diff::Array& a) {
  return {{"shape", a.shape()}, {"data", std::vector<double>(a.values().begin(), a.values().end())}};
}

diff::Array array_from_json(const nlohmann::json& j, const std::string& name) {
  try {
    auto shape = j.at("shape").get<diff::Shape>();
    auto data = j.at("data").get<std::vector<double>>();
    return diff::Array(std::move(shape), std::move(data));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "checkpoint array '" + name + "': " + e.what());
  }
}

}  // namespace

nlohmann::json spec_to_json(const net::NetworkSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) layers.push_back({{"unary", l.unary}, {"binary", l.binary}});
  return {{"input_dim", spec.input_dim},
          {"output_dim", spec.output_dim},
          {"layers", layers},
          {"alpha_weight", spec.targets.weight},
          {"alpha_input", spec.targets.input},
          {"alpha_unary", spec.targets.unary},
          {"alpha_binary", spec.targets.binary},
          {"decay_rate", spec.decay_rate},
          {"seed", spec.seed}};
}

net::NetworkSpec spec_from_json(const nlohmann::json& j) {
  net::NetworkSpec s;
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.output_dim = j.at("output_dim").get<std::size_t>();
  for (const auto& l : j.at("layers")) {
    s.layers.push_back({l.at("unary").get<std::vector<std::string>>(),
                        l.at("binary").get<std::vector<std::string>>()});
  }
  s.targets.weight = j.at("alpha_weight").get<double>();
  s.targets.input = j.at("alpha_input").get<double>();
  s.targets.unary = j.at("alpha_unary").get<double>();
  s.targets.binary = j.at("alpha_binary").get<double>();
  s.decay_rate = j.at("decay_rate").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& net = ckpt.net;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : net::trainable_params(net)) params[p.name] = array_to_json(*p.values);
  nlohmann::json frozen = nlohmann::json::object();
  for (std::size_t k = 0; k < net.linear.size(); ++k) {
    const std::string p = "L" + std::to_string(k) + ".";
    if (!net.linear[k].weight.frozen.empty()) frozen[p + "w"] = net.linear[k].weight.frozen;
    if (!net.linear[k].bias.frozen.empty()) frozen[p + "b"] = net.linear[k].bias.frozen;
  }
  nlohmann::json j = {{"format", kFormat},
                      {"version", kVersion},
                      {"spec", spec_to_json(net.spec)},
                      {"gating", net.gating == net::Gating::Pruned ? "pruned" : "plain"},
                      {"task", data::to_string(ckpt.task)},
                      {"epoch", ckpt.epoch},
                      {"params", params},
                      {"frozen", frozen},
                      {"feature_names", ckpt.feature_names}};
  if (ckpt.standardization) {
    j["standardization"] = {{"mean", ckpt.standardization->mean},
                            {"stddev", ckpt.standardization->stddev}};
  } else {
    j["standardization"] = nullptr;
  }
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kFormat) {
      fail(ErrorCode::Parse, "not a sparsym checkpoint");
    }
    if (j.at("version").get<int>() != kVersion) {
      fail(ErrorCode::Parse, "unsupported checkpoint version " + j.at("version").dump());
    }
    Checkpoint c;
    const auto spec = spec_from_json(j.at("spec"));
    const auto gating_name = j.at("gating").get<std::string>();
    if (gating_name != "pruned" && gating_name != "plain") fail(ErrorCode::Parse, "unknown gating");
    const auto gating = gating_name == "pruned" ? net::Gating::Pruned : net::Gating::Plain;
    try {
      c.net = net::build(spec, gating);
    } catch (const Error& e) {
      fail(ErrorCode::Parse, std::string("checkpoint spec is invalid: ") + e.what());
    }
    const auto& params = j.at("params");
    auto refs = net::trainable_params(c.net);
    if (params.size() != refs.size()) fail(ErrorCode::Parse, "checkpoint parameter count mismatch");
    for (auto& p : refs) {
      auto it = params.find(p.name);
      if (it == params.end()) fail(ErrorCode::Parse, "checkpoint lacks parameter '" + p.name + "'");
      diff::Array a = array_from_json(*it, p.name);
      if (a.shape() != p.values->shape()) {
        fail(ErrorCode::Parse, "checkpoint parameter '" + p.name + "' has the wrong shape");
      }
      *p.values = std::move(a);
    }
    for (const auto& [name, mask] : j.at("frozen").items()) {
      auto m = mask.get<std::vector<std::uint8_t>>();
      bool found = false;
      for (std::size_t k = 0; k < c.net.linear.size(); ++k) {
        const std::string p = "L" + std::to_string(k) + ".";
        for (auto [suffix, tensor] : {std::pair{"w", &c.net.linear[k].weight},
                                      std::pair{"b", &c.net.linear[k].bias}}) {
          if (name != p + suffix) continue;
          if (m.size() != tensor->weights.size()) fail(ErrorCode::Parse, "frozen mask size mismatch");
          tensor->frozen = m;
          found = true;
        }
      }
      if (!found) fail(ErrorCode::Parse, "frozen mask for unknown parameter '" + name + "'");
    }
    c.task = data::parse_task(j.at("task").get<std::string>());
    c.epoch = j.at("epoch").get<std::size_t>();
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("standardization").is_null()) {
      data::Standardization st;
      st.mean = j["standardization"].at("mean").get<std::vector<double>>();
      st.stddev = j["standardization"].at("stddev").get<std::vector<double>>();
      if (st.mean.size() != spec.input_dim || st.stddev.size() != spec.input_dim) {
        fail(ErrorCode::Parse, "checkpoint standardization size mismatch");
      }
      c.standardization = std::move(st);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("corrupt checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    fail(ErrorCode::Parse, std::string("corrupt checkpoint: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::string& path, ErrorCode on_parse_error) {
  std::ifstream in(path);
  if (!in) fail(on_parse_error == ErrorCode::Config ? ErrorCode::Config : ErrorCode::Io,
                "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(on_parse_error, path + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::Io, "short write to '" + path + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_text_file(path, checkpoint_to_json(ckpt).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_json_file(path, ErrorCode::Parse));
}

}  // namespace sparsym::app

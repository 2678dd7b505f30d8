#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common/error.hpp"
#include "data/dataset.hpp"
#include "net/network.hpp"

namespace sparsym::app {

// What a checkpoint carries besides the network: enough to unroll
// expressions on raw features.
struct Checkpoint {
  net::Network net;
  std::optional<data::Standardization> standardization;
  std::vector<std::string> feature_names;
  data::Task task = data::Task::Regression;
  std::size_t epoch = 0;
};

nlohmann::json spec_to_json(const net::NetworkSpec& spec);
net::NetworkSpec spec_from_json(const nlohmann::json& j);

/// {"format":"sparsym-checkpoint","version":1, spec, gating, params, frozen,
/// ...}. Doubles are written in shortest round-trip form, so loading is
/// bit-exact.
nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws ErrorCode::Parse on a corrupt or foreign file, Io when unreadable.
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json read_json_file(const std::string& path, ErrorCode on_parse_error = ErrorCode::Parse);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sparsym::app

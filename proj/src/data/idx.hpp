#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data/dataset.hpp"

namespace sparsym::data {

// Unsigned-byte IDX tensor (type code 0x08). Dimensions are stored big-endian.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  friend bool operator==(const IdxTensor&, const IdxTensor&) = default;
};

IdxTensor read_idx(const std::string& path);
void write_idx(const std::string& path, const IdxTensor& tensor);

/// Images (magic 0x00000803) and labels (0x00000801). Pixels are scaled by
/// 1/255 and flattened row-major. `classes` keeps only those digits, in the
/// given order, and one-hot encodes over them; empty keeps all ten.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const std::vector<int>& classes = {});

}  // namespace sparsym::data

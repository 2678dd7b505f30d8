#include "data/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "common/error.hpp"

namespace sparsym::data {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxTensor read_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open idx file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4) fail(ErrorCode::Parse, path + ": truncated idx header");
  if (bytes[0] != 0 || bytes[1] != 0 || bytes[2] != 0x08) {
    fail(ErrorCode::Parse, path + ": bad idx magic (expected unsigned-byte data)");
  }
  const std::size_t rank = bytes[3];
  if (rank == 0 || bytes.size() < 4 + 4 * rank) fail(ErrorCode::Parse, path + ": truncated idx header");
  IdxTensor t;
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    t.dims.push_back(read_be32(bytes, 4 + 4 * i));
    count *= t.dims.back();
  }
  const std::size_t offset = 4 + 4 * rank;
  if (bytes.size() - offset != count) {
    fail(ErrorCode::Parse, path + ": idx payload has " + std::to_string(bytes.size() - offset) +
                               " bytes, dimensions imply " + std::to_string(count));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return t;
}

void write_idx(const std::string& path, const IdxTensor& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 255) {
    fail(ErrorCode::InvalidArgument, "idx tensor rank must be 1..255");
  }
  std::size_t count = 1;
  for (auto d : tensor.dims) count *= d;
  if (count != tensor.data.size()) fail(ErrorCode::Shape, "idx dimensions do not match data size");
  std::vector<std::uint8_t> out = {0, 0, 0x08, static_cast<std::uint8_t>(tensor.dims.size())};
  for (auto d : tensor.dims) put_be32(out, d);
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::Io, "cannot write idx file '" + path + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::Io, "short write to '" + path + "'");
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const std::vector<int>& classes) {
  IdxTensor images = read_idx(images_path);
  IdxTensor labels = read_idx(labels_path);
  if (images.dims.size() != 3 && images.dims.size() != 4) {
    fail(ErrorCode::Parse, images_path + ": bad magic, expected 0x00000803 image data");
  }
  if (labels.dims.size() != 1) {
    fail(ErrorCode::Parse, labels_path + ": bad magic, expected 0x00000801 label data");
  }
  const std::size_t n = images.dims[0];
  if (labels.dims[0] != n) {
    fail(ErrorCode::Shape, "idx count mismatch: " + std::to_string(n) + " images, " +
                               std::to_string(labels.dims[0]) + " labels");
  }
  std::size_t width = 1;
  for (std::size_t i = 1; i < images.dims.size(); ++i) width *= images.dims[i];

  std::vector<int> keep = classes;
  if (keep.empty()) {
    for (int k = 0; k < 10; ++k) keep.push_back(k);
  }
  for (int k : keep) {
    if (k < 0 || k > 255) fail(ErrorCode::Config, "idx class filter out of range");
  }

  std::vector<std::size_t> rows;
  std::vector<std::size_t> code;
  for (std::size_t r = 0; r < n; ++r) {
    auto it = std::find(keep.begin(), keep.end(), static_cast<int>(labels.data[r]));
    if (it == keep.end()) {
      if (classes.empty()) {
        fail(ErrorCode::Parse, labels_path + ": label " + std::to_string(labels.data[r]) +
                                   " outside 0..9");
      }
      continue;
    }
    rows.push_back(r);
    code.push_back(static_cast<std::size_t>(it - keep.begin()));
  }
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "idx: no samples of the requested classes");

  Dataset ds;
  ds.task = Task::Classification;
  ds.features = Array(diff::Shape{rows.size(), width});
  ds.labels = Array(diff::Shape{rows.size(), keep.size()}, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::uint8_t* px = images.data.data() + rows[i] * width;
    for (std::size_t j = 0; j < width; ++j) ds.features[i * width + j] = px[j] / 255.0;
    ds.labels[i * keep.size() + code[i]] = 1.0;
  }
  ds.validate();
  return ds;
}

}  // namespace sparsym::data

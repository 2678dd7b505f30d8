#pragma once

#include <string>
#include <vector>

#include "data/dataset.hpp"

namespace sparsym::data {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 subset: comma separated, optional double-quoted fields with ""
/// escapes, LF or CRLF line ends, header row required. Blank lines skipped.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Features are every column not listed in `label_columns`, in file order.
/// Classification with one label column one-hot encodes its distinct values
/// (numeric values sorted numerically, otherwise lexicographically); with
/// several label columns they are taken as an existing one-hot encoding.
Dataset load_csv(const std::string& path, const std::vector<std::string>& label_columns, Task task);
Dataset table_to_dataset(const CsvTable& table, const std::vector<std::string>& label_columns,
                         Task task, const std::string& source = "csv");

}  // namespace sparsym::data

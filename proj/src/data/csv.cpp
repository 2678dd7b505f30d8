#include "data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <cmath>
#include <sstream>

#include "common/error.hpp"

namespace sparsym::data {

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) fail(ErrorCode::Parse, "csv: unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  if (records.empty()) fail(ErrorCode::Parse, "csv: empty file");
  CsvTable table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size()) {
      fail(ErrorCode::Parse, "csv: row " + std::to_string(r + 1) + " has " +
                                 std::to_string(table.rows[r].size()) + " fields, header has " +
                                 std::to_string(table.header.size()));
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open csv file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

namespace {

bool parse_number(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset table_to_dataset(const CsvTable& table, const std::vector<std::string>& label_columns,
                         Task task, const std::string& source) {
  if (table.rows.empty()) fail(ErrorCode::Parse, source + ": no data rows");
  if (label_columns.empty()) fail(ErrorCode::Config, source + ": no label columns given");

  std::vector<std::size_t> label_idx;
  for (const auto& name : label_columns) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) fail(ErrorCode::Parse, source + ": missing column '" + name + "'");
    label_idx.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  std::vector<std::size_t> feature_idx;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (std::find(label_idx.begin(), label_idx.end(), c) == label_idx.end()) feature_idx.push_back(c);
  }
  if (feature_idx.empty()) fail(ErrorCode::Parse, source + ": no feature columns");

  const std::size_t n = table.rows.size();
  Dataset ds;
  ds.task = task;
  for (auto c : feature_idx) ds.feature_names.push_back(table.header[c]);
  ds.features = Array(diff::Shape{n, feature_idx.size()});

  auto numeric = [&](std::size_t r, std::size_t c) {
    double v = 0.0;
    if (!parse_number(table.rows[r][c], v)) {
      fail(ErrorCode::Parse, source + ": non-numeric cell '" + table.rows[r][c] + "' at row " +
                                 std::to_string(r + 1) + ", column '" + table.header[c] + "'");
    }
    return v;
  };

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < feature_idx.size(); ++j) {
      ds.features[r * feature_idx.size() + j] = numeric(r, feature_idx[j]);
    }
  }

  if (task == Task::Classification && label_idx.size() == 1) {
    const std::size_t c = label_idx[0];
    bool all_numeric = true;
    for (std::size_t r = 0; r < n && all_numeric; ++r) {
      double v;
      all_numeric = parse_number(table.rows[r][c], v);
    }
    // Category order: numeric ascending, or lexicographic for string labels.
    std::vector<std::size_t> code(n);
    std::size_t n_classes = 0;
    if (all_numeric) {
      std::vector<double> values;
      for (std::size_t r = 0; r < n; ++r) values.push_back(numeric(r, c));
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (std::size_t r = 0; r < n; ++r) {
        code[r] = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), values[r]) - sorted.begin());
      }
      n_classes = sorted.size();
    } else {
      std::vector<std::string> sorted;
      for (std::size_t r = 0; r < n; ++r) sorted.push_back(table.rows[r][c]);
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (std::size_t r = 0; r < n; ++r) {
        code[r] = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), table.rows[r][c]) - sorted.begin());
      }
      n_classes = sorted.size();
    }
    ds.labels = Array(diff::Shape{n, n_classes}, 0.0);
    for (std::size_t r = 0; r < n; ++r) ds.labels[r * n_classes + code[r]] = 1.0;
  } else {
    ds.labels = Array(diff::Shape{n, label_idx.size()});
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < label_idx.size(); ++j) {
        ds.labels[r * label_idx.size() + j] = numeric(r, label_idx[j]);
      }
    }
  }
  ds.validate();
  return ds;
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& label_columns, Task task) {
  return table_to_dataset(read_csv(path), label_columns, task, path);
}

}  // namespace sparsym::data

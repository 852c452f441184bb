#include "gbtx/dataset.h"

#include <charconv>
#include <cmath>

#include "gbtx/error.h"

namespace gbtx {

namespace {

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos
                                                                                : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '"')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '"' || cell.back() == '\r'))
      cell.remove_suffix(1);
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Dataset ParseCsv(std::string_view text, const FeatureSpace& features) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty()) throw SchemaError("csv: missing header row");

  const auto header = SplitCommas(lines[0]);
  const std::size_t width = features.size();
  bool has_label = false;
  if (header.size() == width + 1 && header.back() == "label") {
    has_label = true;
  } else if (header.size() != width) {
    throw SchemaError("csv: header has " + std::to_string(header.size()) +
                      " columns, model has " + std::to_string(width) + " features");
  }
  for (std::size_t i = 0; i < width; ++i)
    if (header[i] != features.name(static_cast<int>(i)))
      throw SchemaError("csv: column " + std::to_string(i) + " is '" + std::string(header[i]) +
                        "', expected '" + features.name(static_cast<int>(i)) + "'");

  Dataset data;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = SplitCommas(lines[r]);
    if (cells.size() != header.size())
      throw SchemaError("csv: row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                        " columns");
    Instance row(width);
    for (std::size_t i = 0; i < width; ++i) {
      const auto cell = cells[i];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[i]);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(row[i]))
        throw SchemaError("csv: row " + std::to_string(r) + " column " + std::to_string(i) +
                          ": invalid value '" + std::string(cell) + "'");
    }
    data.rows.push_back(std::move(row));
    if (has_label) {
      const auto cell = cells.back();
      double label = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || label < 0 ||
          label != std::floor(label))
        throw SchemaError("csv: row " + std::to_string(r) + ": invalid label '" +
                          std::string(cell) + "'");
      data.labels.push_back(static_cast<int>(label));
    }
  }
  return data;
}

Dataset LoadCsv(const std::string& path, const FeatureSpace& features) {
  return ParseCsv(ReadFile(path), features);
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string ToCsv(std::span<const Instance> rows, const FeatureSpace& features) {
  std::string out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) out += ',';
    out += features.name(static_cast<int>(i));
  }
  out += '\n';
  for (const Instance& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += FormatDouble(row[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace gbtx

#ifndef GBTX_DATASET_H_
#define GBTX_DATASET_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gbtx/model.h"

namespace gbtx {

struct Dataset {
  std::vector<Instance> rows;
  // Empty when the CSV carried no `label` column.
  std::vector<int> labels;

  std::size_t size() const { return rows.size(); }
  bool has_labels() const { return !labels.empty(); }
};

// CSV with a header of feature names, in model order, plus an optional
// trailing `label` column. Throws SchemaError on malformed content.
Dataset ParseCsv(std::string_view text, const FeatureSpace& features);
Dataset LoadCsv(const std::string& path, const FeatureSpace& features);

std::string ToCsv(std::span<const Instance> rows, const FeatureSpace& features);

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double value);

}  // namespace gbtx

#endif  // GBTX_DATASET_H_

#ifndef GBTX_MODEL_H_
#define GBTX_MODEL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gbtx {

// Feature values of one sample, indexed by feature.
using Instance = std::vector<double>;

class FeatureSpace {
 public:
  FeatureSpace() = default;
  // Throws SchemaError on duplicate or empty names.
  explicit FeatureSpace(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> IndexOf(std::string_view name) const;

  bool operator==(const FeatureSpace&) const = default;

 private:
  std::vector<std::string> names_;
};

// A tree node is either a split (value <= threshold goes left) or a leaf
// holding a raw score contribution.
struct Node {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  static Node Split(int feature, double threshold, int left, int right) {
    return Node{false, feature, threshold, left, right, 0.0};
  }
  static Node Leaf(double value) { return Node{true, -1, 0.0, -1, -1, value}; }

  bool operator==(const Node&) const = default;
};

struct Tree {
  std::vector<Node> nodes;
  int root = 0;
  int class_index = 0;

  // Leaf node ids in depth-first, left-first order.
  std::vector<int> Leaves() const;
  // Node id of the leaf reached by `x`.
  int Descend(std::span<const double> x) const;

  bool operator==(const Tree&) const = default;
};

enum class Objective { kBinaryRaw, kMulticlassRaw };

struct Ensemble {
  FeatureSpace features;
  std::vector<Tree> trees;
  // 1 for binary raw-score models.
  int num_classes = 1;
  std::vector<double> base_scores;
  Objective objective = Objective::kBinaryRaw;

  // Length of the raw score vector.
  int num_outputs() const { return num_classes < 1 ? 1 : num_classes; }
  // Number of predictable classes: 2 for binary models.
  int num_labels() const {
    return objective == Objective::kBinaryRaw ? 2 : num_classes;
  }
  std::size_t num_features() const { return features.size(); }

  bool operator==(const Ensemble&) const = default;
};

// Checks every Ensemble invariant; throws SchemaError describing the first
// violation. Fills in missing base scores with zeros.
void Validate(Ensemble& ensemble);

std::vector<double> PredictRaw(const Ensemble& ensemble,
                               std::span<const double> x);

// Binary: class 1 iff raw > 0. Multiclass: argmax, ties to the lowest index.
int Predict(const Ensemble& ensemble, std::span<const double> x);
int PredictFromScores(const Ensemble& ensemble, std::span<const double> raw);

const char* ObjectiveName(Objective objective);

Ensemble ParseLightGbmText(std::string_view text);
Ensemble ParsePortableJson(std::string_view text);
std::string EmitPortableJson(const Ensemble& ensemble);

enum class ModelFormat { kLightGbm, kJson };

// Reads a model file; throws IoError when the file cannot be read.
Ensemble LoadModel(const std::string& path, ModelFormat format);

std::string ReadFile(const std::string& path);

}  // namespace gbtx

#endif  // GBTX_MODEL_H_

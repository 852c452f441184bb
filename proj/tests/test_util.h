#ifndef GBTX_TESTS_TEST_UTIL_H_
#define GBTX_TESTS_TEST_UTIL_H_

#include <memory>
#include <string>

#include "gbtx/encoder.h"
#include "gbtx/model.h"

namespace gbtx::testing {

inline std::string Fixture(const std::string& name) {
  return std::string(GBTX_FIXTURE_DIR) + "/" + name;
}

inline std::shared_ptr<const Ensemble> LoadShared(const std::string& fixture,
                                                  ModelFormat format = ModelFormat::kJson) {
  return std::make_shared<const Ensemble>(LoadModel(Fixture(fixture), format));
}

// f0, f1; tree0: f0<=0.5 -> -1 | (f1<=2 -> 0.5 | 2.0); tree1: f0<=1.5 -> 0.25 | -0.75.
inline std::shared_ptr<const Ensemble> Toy2F() { return LoadShared("toy2f.json"); }

// +1 only when f0 > 0.5 and f1 > 0.5, else -1.
inline std::shared_ptr<const Ensemble> Conjunction() { return LoadShared("conjunction.json"); }

inline std::shared_ptr<const Ensemble> Share(Ensemble e) {
  return std::make_shared<const Ensemble>(std::move(e));
}

}  // namespace gbtx::testing

#endif  // GBTX_TESTS_TEST_UTIL_H_

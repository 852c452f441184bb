#ifndef GBTX_CLI_H_
#define GBTX_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gbtx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string model_path;
  std::string format = "auto";  // lightgbm | json | auto (by extension)
  std::string data_path;
  std::string out_path;         // empty -> stdout
  int scale_exponent = 6;       // weight scale 10^k, k in [0, 12]
  std::string order = "index";  // index | margin
  std::string interval = "quantile";
  double alpha = 0.05;          // (0, 0.5)
  double tau = 0.5;             // [0, 1]
  std::string attack = "interval";
  bool full_free = false;
  double min_frequency = 0.0;   // [0, 1]
  double rbo_p = 0.9;           // (0, 1)
  int jobs = 1;                 // >= 1
  std::uint64_t seed = 0;
  std::string instances = "all";
  std::optional<std::size_t> sample;

  // Throws UsageError when a parameter is out of range.
  void Validate() const;
  std::int64_t scale() const;
};

// Parses `argv` and runs the selected subcommand. Returns the process exit
// code: 0 success, 1 domain error, 2 IO or usage error.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Row indices picked by a selector: "all", or a comma list of indices and
// inclusive ranges ("0,4,7-9"). Throws UsageError when out of range.
std::vector<std::size_t> SelectInstances(const std::string& selector, std::size_t rows);

}  // namespace gbtx::cli

#endif  // GBTX_CLI_H_

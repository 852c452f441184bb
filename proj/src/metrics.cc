#include "gbtx/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "gbtx/dataset.h"
#include "gbtx/error.h"

namespace gbtx {

Ranking MakeRanking(std::span<const int> ranks) {
  std::vector<int> distinct(ranks.begin(), ranks.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  Ranking r;
  for (int v : ranks) {
    if (v < 1) throw SchemaError("ranks must be positive");
    r.ranks.push_back(static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), v) -
                                       distinct.begin()) + 1);
  }
  r.order.resize(ranks.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](int a, int b) { return r.ranks[a] < r.ranks[b]; });
  return r;
}

Ranking RankingFromOrder(std::span<const int> order) {
  std::vector<int> ranks(order.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int f = order[pos];
    if (f < 0 || static_cast<std::size_t>(f) >= order.size() || ranks[f] != 0)
      throw SchemaError("ranking order is not a permutation of the features");
    ranks[f] = static_cast<int>(pos) + 1;
  }
  return Ranking{std::move(ranks), std::vector<int>(order.begin(), order.end())};
}

Ranking FormalRanking(const Explanation& explanation, std::size_t num_features) {
  std::vector<int> ranks(num_features, 2);
  for (const auto& [f, v] : explanation.kept) ranks[f] = 1;
  return MakeRanking(ranks);
}

std::vector<double> FractionalRanks(std::span<const int> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[idx[k]] = avg;
    i = j + 1;
  }
  return out;
}

namespace {

void CheckAligned(const Ranking& a, const Ranking& b) {
  if (a.ranks.size() != b.ranks.size())
    throw SchemaError("rankings cover different feature counts");
}

}  // namespace

std::optional<double> Spearman(const Ranking& a, const Ranking& b) {
  CheckAligned(a, b);
  const auto ra = FractionalRanks(a.ranks);
  const auto rb = FractionalRanks(b.ranks);
  const double n = static_cast<double>(ra.size());
  if (ra.empty()) return std::nullopt;
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

// Counts inversions of v while merge-sorting it.
std::int64_t CountSwaps(std::vector<int>& v, std::vector<int>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::int64_t swaps = CountSwaps(v, buf, lo, mid) + CountSwaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

std::int64_t TiedPairs(const std::vector<int>& sorted) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run * (run - 1) / 2);
      run = 1;
    }
  }
  return ties;
}

}  // namespace

// Knight's O(n log n) tau-b.
std::optional<double> KendallTauB(const Ranking& a, const Ranking& b) {
  CheckAligned(a, b);
  const std::size_t n = a.ranks.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) {
    return a.ranks[i] != a.ranks[j] ? a.ranks[i] < a.ranks[j] : b.ranks[i] < b.ranks[j];
  });
  const auto pairs = static_cast<std::int64_t>(n * (n - 1) / 2);
  std::int64_t ties_a = 0, ties_joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && a.ranks[idx[j + 1]] == a.ranks[idx[i]]) ++j;
    const auto run = static_cast<std::int64_t>(j - i + 1);
    ties_a += run * (run - 1) / 2;
    for (std::size_t k = i; k <= j;) {
      std::size_t m = k;
      while (m + 1 <= j && b.ranks[idx[m + 1]] == b.ranks[idx[k]]) ++m;
      const auto jr = static_cast<std::int64_t>(m - k + 1);
      ties_joint += jr * (jr - 1) / 2;
      k = m + 1;
    }
    i = j + 1;
  }
  std::vector<int> bseq(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) bseq[i] = b.ranks[idx[i]];
  const std::int64_t swaps = CountSwaps(bseq, buf, 0, n);
  const std::int64_t ties_b = TiedPairs(bseq);
  const std::int64_t untied_a = pairs - ties_a;
  const std::int64_t untied_b = pairs - ties_b;
  if (untied_a == 0 || untied_b == 0) return std::nullopt;
  const std::int64_t numerator = pairs - ties_a - ties_b + ties_joint - 2 * swaps;
  const double tau = static_cast<double>(numerator) /
                     std::sqrt(static_cast<double>(untied_a) * static_cast<double>(untied_b));
  return std::clamp(tau, -1.0, 1.0);
}

double Rbo(std::span<const int> a, std::span<const int> b, double p) {
  if (a.size() != b.size()) throw SchemaError("rbo needs equal-length lists");
  if (!(p > 0.0 && p < 1.0)) throw UsageError("rbo persistence must lie in (0, 1)");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  // Accumulates 1 - RBO = (1-p) * sum p^(d-1) (1 - A_d) + p^n (1 - A_n), which
  // is exactly zero for identical lists.
  std::unordered_set<int> seen_a, seen_b;
  std::size_t overlap = 0;
  std::size_t total_overlap = 0;
  double deficit = 0.0;
  double weight = 1.0;  // p^(d-1)
  for (std::size_t d = 1; d <= n; ++d) {
    const int x = a[d - 1];
    const int y = b[d - 1];
    seen_a.insert(x);
    seen_b.insert(y);
    overlap += (seen_b.count(x) ? 1 : 0) + (seen_a.count(y) ? 1 : 0) - (x == y ? 1 : 0);
    total_overlap += overlap;
    deficit += weight * static_cast<double>(d - overlap) / static_cast<double>(d);
    weight *= p;
  }
  if (total_overlap == 0) return 0.0;
  // weight == p^n here.
  deficit = (1.0 - p) * deficit + weight * static_cast<double>(n - overlap) / static_cast<double>(n);
  return std::clamp(1.0 - deficit, 0.0, 1.0);
}

double Consistency(std::span<const Ranking> run1, std::span<const Ranking> run2) {
  if (run1.size() != run2.size()) throw SchemaError("consistency runs differ in length");
  if (run1.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < run1.size(); ++i)
    if (run1[i] == run2[i]) ++same;
  return static_cast<double>(same) / static_cast<double>(run1.size());
}

Aggregate Summarize(std::span<const std::optional<double>> values) {
  Aggregate agg;
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    agg.min = agg.min ? std::min(*agg.min, *v) : *v;
    agg.max = agg.max ? std::max(*agg.max, *v) : *v;
    sum += *v;
    ++agg.count;
  }
  if (agg.count > 0) agg.avg = sum / agg.count;
  return agg;
}

namespace {

std::string Cell(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string("degenerate");
}

}  // namespace

std::string MetricsCsv(std::span<const InstanceMetrics> rows) {
  std::string out = "instance,spearman,kendall,rbo\n";
  std::vector<std::optional<double>> s, k, r;
  for (const InstanceMetrics& m : rows) {
    out += std::to_string(m.instance) + ',' + Cell(m.spearman) + ',' + Cell(m.kendall) + ',' +
           FormatDouble(m.rbo) + '\n';
    s.push_back(m.spearman);
    k.push_back(m.kendall);
    r.push_back(m.rbo);
  }
  const Aggregate as = Summarize(s), ak = Summarize(k), ar = Summarize(r);
  auto empty_or = [](const std::optional<double>& v) { return v ? FormatDouble(*v) : std::string(); };
  out += "min," + empty_or(as.min) + ',' + empty_or(ak.min) + ',' + empty_or(ar.min) + '\n';
  out += "avg," + empty_or(as.avg) + ',' + empty_or(ak.avg) + ',' + empty_or(ar.avg) + '\n';
  out += "max," + empty_or(as.max) + ',' + empty_or(ak.max) + ',' + empty_or(ar.max) + '\n';
  return out;
}

}  // namespace gbtx

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphereproc/log.hpp"
#include "sphereproc/summaries.hpp"

namespace sphereproc {

struct CurveSegment {
  std::string name;
  std::size_t length = 0;
};

/// Observed test-function curve plus s simulated curves on a shared
/// evaluation grid (flattened; surfaces row-major, concatenations with
/// segment markers). NaN values are a hard error: cumulative statistics are
/// zero where no pair contributes, so NaNs cannot legitimately occur.
struct CurveSet {
  std::vector<double> observed;
  std::vector<std::vector<double>> simulated;
  std::vector<CurveSegment> segments;

  void validate() const {
    if (observed.empty()) throw std::invalid_argument("CurveSet: empty observed curve");
    if (simulated.empty()) throw std::invalid_argument("CurveSet: need at least one simulation");
    for (double v : observed)
      if (std::isnan(v)) throw std::invalid_argument("CurveSet: NaN in observed curve");
    for (const auto& sim : simulated) {
      if (sim.size() != observed.size())
        throw std::invalid_argument("CurveSet: simulated curve length mismatch");
      for (double v : sim)
        if (std::isnan(v)) throw std::invalid_argument("CurveSet: NaN in simulated curve");
    }
  }

  std::size_t n_curves() const { return simulated.size() + 1; }
  double value(std::size_t curve, std::size_t j) const {
    return curve == 0 ? observed[j] : simulated[curve - 1][j];
  }
};

/// Joins curves end to end, recording segment boundaries for plotting.
struct ConcatCurve {
  std::vector<double> values;
  std::vector<CurveSegment> segments;
};

inline ConcatCurve concat_statistics(const std::vector<KCurve>& curves,
                                     const std::vector<std::string>& names = {}) {
  if (curves.empty()) throw std::invalid_argument("concat_statistics: need >= 1 curves");
  ConcatCurve out;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    out.values.insert(out.values.end(), curves[c].values.begin(), curves[c].values.end());
    out.segments.push_back(
        CurveSegment{c < names.size() ? names[c] : "segment" + std::to_string(c + 1),
                     curves[c].values.size()});
  }
  return out;
}

/// Extreme rank of each curve (index 0 = observed): at every grid index the
/// rank counted from below and from above among all curves, ties sharing the
/// minimal rank; the pointwise extremeness is the smaller of the two and the
/// curve's extreme rank is its minimum over the grid. Lower = more extreme.
inline std::vector<int> extreme_ranks(const CurveSet& c) {
  c.validate();
  const std::size_t m = c.observed.size();
  const std::size_t total = c.n_curves();
  std::vector<int> rank(total, std::numeric_limits<int>::max());
  std::vector<double> column(total);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < total; ++i) column[i] = c.value(i, j);
    std::vector<double> sorted(column);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < total; ++i) {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), column[i]) -
                         sorted.begin();  // # strictly smaller
      const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), column[i]);
      const int pointwise = static_cast<int>(std::min<std::ptrdiff_t>(below, above)) + 1;
      rank[i] = std::min(rank[i], pointwise);
    }
  }
  return rank;
}

/// Global rank envelope test output: the p-interval (liberal, conservative)
/// and the envelope band at the requested level.
struct EnvelopeResult {
  double p_minus = 0.0;
  double p_plus = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  int obs_extreme_rank = 0;
  double alpha = 0.05;
  std::size_t n_sims = 0;
  std::vector<double> observed;
  std::vector<CurveSegment> segments;

  bool reject_liberal() const { return p_minus <= alpha; }
  bool reject_conservative() const { return p_plus <= alpha; }
  bool observed_exits_envelope() const {
    for (std::size_t j = 0; j < observed.size(); ++j)
      if (observed[j] < lower[j] || observed[j] > upper[j]) return true;
    return false;
  }
};

/// Monte Carlo global rank envelope: p- = (1 + #{R_i < R_0}) / (s+1),
/// p+ = (1 + #{R_i <= R_0}) / (s+1); the level-alpha envelope is the
/// pointwise min/max over curves whose extreme rank reaches the largest
/// cutoff R* with #{R < R*} <= alpha (s+1).
inline EnvelopeResult global_rank_envelope(const CurveSet& c, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("global_rank_envelope: alpha must be in (0, 1)");
  c.validate();
  const std::size_t s = c.simulated.size();
  if (alpha * (s + 1) < 1.0)
    log_warning("global_rank_envelope: alpha (s+1) = " + std::to_string(alpha * (s + 1)) +
                " < 1; the test cannot reject at this level");

  const auto ranks = extreme_ranks(c);
  const int r0 = ranks[0];
  std::size_t strictly_lower = 0, lower_or_equal = 0;
  for (std::size_t i = 1; i <= s; ++i) {
    if (ranks[i] < r0) ++strictly_lower;
    if (ranks[i] <= r0) ++lower_or_equal;
  }
  EnvelopeResult out;
  out.p_minus = static_cast<double>(1 + strictly_lower) / static_cast<double>(s + 1);
  out.p_plus = static_cast<double>(1 + lower_or_equal) / static_cast<double>(s + 1);
  out.obs_extreme_rank = r0;
  out.alpha = alpha;
  out.n_sims = s;
  out.observed = c.observed;
  out.segments = c.segments;

  // Largest cutoff whose strictly-more-extreme count stays within alpha(s+1).
  std::vector<int> sorted_ranks(ranks);
  std::sort(sorted_ranks.begin(), sorted_ranks.end());
  const double budget = alpha * static_cast<double>(s + 1);
  int cutoff = 1;
  for (int k = 1; k <= sorted_ranks.back(); ++k) {
    const auto more_extreme = std::lower_bound(sorted_ranks.begin(), sorted_ranks.end(), k) -
                              sorted_ranks.begin();
    if (static_cast<double>(more_extreme) <= budget)
      cutoff = k;
    else
      break;
  }

  const std::size_t m = c.observed.size();
  out.lower.assign(m, std::numeric_limits<double>::infinity());
  out.upper.assign(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < cutoff) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = c.value(i, j);
      out.lower[j] = std::min(out.lower[j], v);
      out.upper[j] = std::max(out.upper[j], v);
    }
  }
  return out;
}

}  // namespace sphereproc

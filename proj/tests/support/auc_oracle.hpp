#pragma once

#include <vector>

#include "gazefuse/rng.hpp"

namespace gazefuse::testing {

// O(n^2) pairwise definition of AUC. Counts are integers and halves, so the
// quotient is computed from exactly the same two doubles as the rank form.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 1) pos += 1;
    else neg += 1;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

struct AucInstance {
  std::vector<double> scores;
  std::vector<int> labels;
};

inline AucInstance random_auc_instance(Rng& rng) {
  AucInstance inst;
  const std::size_t n = 2 + rng.below(199);
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse grid so ties are common.
    inst.scores.push_back(static_cast<double>(rng.below(25)) / 24.0);
    inst.labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
  }
  inst.labels[0] = 1;
  inst.labels[1] = 0;
  return inst;
}

}  // namespace gazefuse::testing

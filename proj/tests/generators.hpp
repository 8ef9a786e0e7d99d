// Seeded random instance generators for property tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "reframe/stats.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Short sentences over a tiny vocabulary so n-grams collide often.
inline std::string sentence(Rng& rng, std::size_t min_words = 1, std::size_t max_words = 12) {
  static const char* words[] = {"the", "cat", "a", "dog", "sat", "on", "mat", "I",
                                "think", "you", "are", "right", "Maybe", "not", "it"};
  static const char* marks[] = {"", "", "", ",", ".", "!", "?"};
  const std::size_t n = uniform(rng, min_words, max_words);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += words[uniform(rng, 0, std::size(words) - 1)];
    out += marks[uniform(rng, 0, std::size(marks) - 1)];
  }
  return out;
}

// Units of interval values drawn from a small grid, some with one value.
inline std::vector<std::vector<double>> units(Rng& rng) {
  std::vector<std::vector<double>> out(uniform(rng, 2, 12));
  for (auto& u : out) {
    const std::size_t m = uniform(rng, 1, 5);
    for (std::size_t i = 0; i < m; ++i) {
      u.push_back(static_cast<double>(uniform(rng, 0, 12)) / 4.0 - 1.5);
    }
  }
  // Guarantee two pairable units.
  out[0].resize(std::max<std::size_t>(out[0].size(), 2), 0.25);
  out[1].resize(std::max<std::size_t>(out[1].size(), 2), -0.5);
  return out;
}

struct Synthetic {
  std::vector<reframe::ObservationRow> rows;
  oracle::GroupedData dense;  // cell-means design matching the rows
  std::vector<double> beta;
};

// Random-intercept data: `groups` groups of `per_group` rows cycling through
// strategies (cyclically when balanced, else at random); y = beta[level] + u_g + e.
inline Synthetic random_intercept(Rng& rng, int groups, int per_group, std::vector<double> beta,
                                  double tau2, double sigma2, bool balanced = false) {
  using reframe::kGeneratableKinds;
  Synthetic s;
  s.beta = beta;
  const int levels = static_cast<int>(beta.size());
  std::normal_distribution<double> u(0.0, std::sqrt(tau2));
  std::normal_distribution<double> e(0.0, std::sqrt(sigma2));
  const int n = groups * per_group;
  s.dense.x = Eigen::MatrixXd::Zero(n, levels);
  s.dense.y.resize(n);
  s.dense.groups = groups;
  int row = 0;
  for (int g = 0; g < groups; ++g) {
    const double offset = tau2 > 0.0 ? u(rng) : 0.0;
    for (int k = 0; k < per_group; ++k, ++row) {
      const int level = balanced ? (g + k) % levels
                                 : static_cast<int>(uniform(rng, 0, beta.size() - 1));
      const double y = beta[static_cast<std::size_t>(level)] + offset + e(rng);
      s.rows.push_back({y, kGeneratableKinds[static_cast<std::size_t>(level)],
                        "g" + std::to_string(1000 + g), std::nullopt});
      s.dense.x(row, level) = 1.0;
      s.dense.y(row) = y;
      s.dense.group.push_back(g);
    }
  }
  return s;
}

}  // namespace gen

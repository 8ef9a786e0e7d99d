// Brute-force reference implementations used only by the tests.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// ASCII-only tokenizer: split on spaces, lowercase, strip edge punctuation.
inline std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    std::string t = cur.substr(b, e - b);
    for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!t.empty()) out.push_back(t);
    cur.clear();
  };
  for (const char c : text) {
    if (c == ' ' || c == '\t' || c == '\n') flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

using Gram = std::vector<std::string>;

inline std::vector<Gram> windows(const std::vector<std::string>& t, std::size_t n) {
  std::vector<Gram> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    Gram g(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n));
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  return out;
}

inline bool contains(const std::vector<Gram>& grams, const Gram& g) {
  return std::find(grams.begin(), grams.end(), g) != grams.end();
}

inline double form_dissimilarity(const std::string& candidate, const std::string& reference) {
  const auto c = tokens(candidate);
  const auto r = tokens(reference);
  double sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cg = windows(c, n);
    if (cg.empty()) continue;
    const auto rg = windows(r, n);
    std::size_t missing = 0;
    for (const auto& g : cg) missing += contains(rg, g) ? 0 : 1;
    sum += static_cast<double>(missing) / static_cast<double>(cg.size());
    ++orders;
  }
  return sum / orders;
}

inline std::vector<std::string> added_trigrams(const std::string& original,
                                               const std::string& reframe) {
  const auto o = windows(tokens(original), 3);
  std::vector<std::string> out;
  for (const auto& g : windows(tokens(reframe), 3)) {
    if (contains(o, g)) continue;
    out.push_back(g[0] + " " + g[1] + " " + g[2]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double jaccard(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += std::count(b.begin(), b.end(), x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// Pairwise definition: observed disagreement over within-unit pairs, expected
// disagreement over all pairs of pairable values.
inline double krippendorff_interval(const std::vector<std::vector<double>>& units) {
  std::vector<double> pooled;
  double observed = 0.0;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) s += (u[i] - u[j]) * (u[i] - u[j]);
      }
    }
    observed += s / static_cast<double>(u.size() - 1);
    pooled.insert(pooled.end(), u.begin(), u.end());
  }
  const double n = static_cast<double>(pooled.size());
  double expected = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    for (std::size_t j = 0; j < pooled.size(); ++j) {
      if (i != j) expected += (pooled[i] - pooled[j]) * (pooled[i] - pooled[j]);
    }
  }
  if (expected == 0.0) return 1.0;
  return 1.0 - (observed / n) / (expected / (n * (n - 1.0)));
}

inline double t_pdf(double x, double df) {
  const double logc = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                      0.5 * std::log(df * std::numbers::pi);
  return std::exp(logc - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

struct TTest {
  double mean = 0.0, t = 0.0, p = 1.0, df = 0.0;
};

// Two-sided p by composite Simpson integration of the density over [0, |t|].
inline TTest paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  TTest out;
  out.mean = mean;
  out.df = static_cast<double>(n - 1);
  out.t = mean / std::sqrt(var / static_cast<double>(n));
  const double upper = std::abs(out.t);
  const int steps = 20000;
  const double h = upper / steps;
  double area = t_pdf(0.0, out.df) + t_pdf(upper, out.df);
  for (int i = 1; i < steps; ++i) area += (i % 2 ? 4.0 : 2.0) * t_pdf(i * h, out.df);
  area *= h / 3.0;
  out.p = 1.0 - 2.0 * area;
  return out;
}

// Dense random-intercept ML evaluated with explicit per-group covariance
// matrices (no closed-form inverse).
struct GroupedData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<int> group;  // contiguous group ids
  int groups = 0;
};

struct DenseFit {
  double lambda = 0.0;
  double log_likelihood = -INFINITY;
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
};

inline DenseFit dense_ml(const GroupedData& d, double lambda) {
  const long p = d.x.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  double log_det = 0.0;
  std::vector<std::vector<long>> members(static_cast<std::size_t>(d.groups));
  for (long i = 0; i < d.y.size(); ++i) members[static_cast<std::size_t>(d.group[i])].push_back(i);
  std::vector<Eigen::MatrixXd> vinv(members.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    const long m = static_cast<long>(members[g].size());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(m, m) + lambda * Eigen::MatrixXd::Ones(m, m);
    Eigen::LLT<Eigen::MatrixXd> llt(v);
    vinv[g] = llt.solve(Eigen::MatrixXd::Identity(m, m));
    log_det += 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    Eigen::MatrixXd xg(m, p);
    Eigen::VectorXd yg(m);
    for (long k = 0; k < m; ++k) {
      xg.row(k) = d.x.row(members[g][static_cast<std::size_t>(k)]);
      yg(k) = d.y(members[g][static_cast<std::size_t>(k)]);
    }
    a += xg.transpose() * vinv[g] * xg;
    b += xg.transpose() * vinv[g] * yg;
  }
  DenseFit fit;
  fit.lambda = lambda;
  fit.beta = a.ldlt().solve(b);
  double quad = 0.0;
  for (std::size_t g = 0; g < members.size(); ++g) {
    const long m = static_cast<long>(members[g].size());
    Eigen::VectorXd r(m);
    for (long k = 0; k < m; ++k) {
      const long i = members[g][static_cast<std::size_t>(k)];
      r(k) = d.y(i) - d.x.row(i).dot(fit.beta);
    }
    quad += r.dot(vinv[g] * r);
  }
  const double n = static_cast<double>(d.y.size());
  fit.sigma2 = quad / n;
  fit.log_likelihood = -0.5 * (n * std::log(2.0 * std::numbers::pi * fit.sigma2) + log_det + n);
  return fit;
}

// Uniform grid on [lo, hi] followed by repeated zooming around the best point.
inline DenseFit grid_search(const GroupedData& d, double lo, double hi, int points,
                            int refinements, std::vector<DenseFit>* first_grid = nullptr) {
  DenseFit best;
  for (int round = 0; round <= refinements; ++round) {
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const DenseFit f = dense_ml(d, lo + step * i);
      if (round == 0 && first_grid) first_grid->push_back(f);
      if (f.log_likelihood > best.log_likelihood) best = f;
    }
    lo = std::max(0.0, best.lambda - step);
    hi = best.lambda + step;
    points = 21;
  }
  return best;
}

inline Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.colPivHouseholderQr().solve(y);
}

}  // namespace oracle

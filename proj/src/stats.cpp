#include "reframe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>

namespace reframe {

std::string_view to_string(ToxicityBin bin) {
  switch (bin) {
    case ToxicityBin::low: return "low";
    case ToxicityBin::medium: return "medium";
    case ToxicityBin::high: return "high";
  }
  return "?";
}

ToxicityBin toxicity_bin(double score) {
  if (!(score >= 0.0 && score <= 0.9)) {
    throw DataError("toxicity " + std::to_string(score) + " outside the binned range [0, 0.9]");
  }
  if (score < 0.5) return ToxicityBin::low;
  if (score < 0.7) return ToxicityBin::medium;
  return ToxicityBin::high;
}

namespace {

bool cell_less(const Cell& a, const Cell& b) {
  if (a.strategy != b.strategy) return a.strategy < b.strategy;
  return a.bin < b.bin;
}

std::string cell_name(const Cell& c) {
  std::string name(to_string(c.strategy));
  if (c.bin) name += ":" + std::string(to_string(*c.bin));
  return name;
}

// Sufficient statistics per group; every likelihood evaluation is a pass over
// these instead of the rows.
struct GroupStats {
  double n = 0.0;
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  Eigen::VectorXd sx;
  double sy = 0.0;
  double yty = 0.0;
};

struct Problem {
  std::vector<Cell> cells;
  Eigen::MatrixXd cell_design;
  std::vector<std::string> names;
  std::vector<GroupStats> groups;
  std::size_t n = 0;
  std::size_t p = 0;
  bool reml = false;
};

Problem build_problem(std::span<const ObservationRow> rows, const ModelSpec& spec) {
  Problem prob;
  prob.reml = spec.reml;
  std::vector<Cell> row_cells;
  row_cells.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.strategy == StrategyKind::original) {
      throw DataError("observation rows cannot use the original reply as a level");
    }
    if (!std::isfinite(r.response)) throw DataError("non-finite response in observation rows");
    Cell c{r.strategy, std::nullopt};
    if (spec.toxicity_interaction) {
      if (!r.bin) throw DataError("interaction model needs a toxicity bin on every row");
      c.bin = r.bin;
    }
    row_cells.push_back(c);
    if (std::find(prob.cells.begin(), prob.cells.end(), c) == prob.cells.end()) {
      prob.cells.push_back(c);
    }
  }
  std::sort(prob.cells.begin(), prob.cells.end(), cell_less);

  std::vector<StrategyKind> levels;
  for (const auto& c : prob.cells) {
    if (levels.empty() || levels.back() != c.strategy) levels.push_back(c.strategy);
  }
  if (levels.size() < 2) throw DataError("model needs at least two strategy levels");

  const std::size_t k = prob.cells.size();
  if (spec.coding == Coding::cell_means) {
    prob.p = k;
    prob.cell_design = Eigen::MatrixXd::Identity(k, k);
    for (const auto& c : prob.cells) prob.names.push_back(cell_name(c));
  } else {
    std::size_t ref = 0;
    if (spec.reference) {
      const auto it = std::find_if(prob.cells.begin(), prob.cells.end(),
                                   [&](const Cell& c) { return c.strategy == *spec.reference; });
      if (it == prob.cells.end()) {
        throw DataError("reference level '" + std::string(to_string(*spec.reference)) +
                        "' has no observations");
      }
      ref = static_cast<std::size_t>(it - prob.cells.begin());
    }
    prob.p = k;
    prob.cell_design = Eigen::MatrixXd::Zero(k, k);
    prob.names.push_back("(intercept)");
    std::size_t col = 1;
    std::vector<std::size_t> column_of(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
      if (i == ref) continue;
      column_of[i] = col++;
      prob.names.push_back(cell_name(prob.cells[i]));
    }
    for (std::size_t i = 0; i < k; ++i) {
      prob.cell_design(static_cast<Eigen::Index>(i), 0) = 1.0;
      if (i != ref) {
        prob.cell_design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(column_of[i])) =
            1.0;
      }
    }
  }

  prob.n = rows.size();
  if (prob.n <= prob.p) {
    throw DataError("model has " + std::to_string(prob.p) + " coefficients but only " +
                    std::to_string(prob.n) + " rows");
  }

  std::map<std::string, std::size_t> group_index;
  const auto p = static_cast<Eigen::Index>(prob.p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto [it, inserted] = group_index.emplace(rows[i].group, prob.groups.size());
    if (inserted) {
      GroupStats g;
      g.xtx = Eigen::MatrixXd::Zero(p, p);
      g.xty = Eigen::VectorXd::Zero(p);
      g.sx = Eigen::VectorXd::Zero(p);
      prob.groups.push_back(std::move(g));
    }
    GroupStats& g = prob.groups[it->second];
    const auto cell = static_cast<Eigen::Index>(
        std::lower_bound(prob.cells.begin(), prob.cells.end(), row_cells[i], cell_less) -
        prob.cells.begin());
    const Eigen::VectorXd x = prob.cell_design.row(cell).transpose();
    const double y = rows[i].response;
    g.n += 1.0;
    g.xtx.noalias() += x * x.transpose();
    g.xty += x * y;
    g.sx += x;
    g.sy += y;
    g.yty += y * y;
  }
  if (prob.groups.size() < 2) throw DataError("model needs at least two groups");

  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  for (const auto& g : prob.groups) xtx += g.xtx;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtx);
  if (qr.rank() < p) throw DataError("design matrix is rank deficient");
  return prob;
}

struct Evaluation {
  double log_likelihood = 0.0;
  double sigma2 = 0.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd a;  // X' V^-1 X with V scaled by sigma^2
};

Evaluation evaluate(const Problem& prob, double lambda) {
  const auto p = static_cast<Eigen::Index>(prob.p);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  double yvy = 0.0;
  double log_det_v = 0.0;
  for (const auto& g : prob.groups) {
    const double c = lambda / (1.0 + g.n * lambda);
    a += g.xtx;
    a.noalias() -= c * g.sx * g.sx.transpose();
    b += g.xty - c * g.sy * g.sx;
    yvy += g.yty - c * g.sy * g.sy;
    log_det_v += std::log1p(g.n * lambda);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw DataError("GLS normal equations are singular");
  Evaluation ev;
  ev.beta = llt.solve(b);
  ev.a = std::move(a);
  const double quad = yvy - b.dot(ev.beta);
  const double n = static_cast<double>(prob.n);
  const double df = prob.reml ? n - static_cast<double>(prob.p) : n;
  if (!(quad > 0.0)) throw DataError("residual variance is zero; the model fits exactly");
  ev.sigma2 = quad / df;
  ev.log_likelihood =
      -0.5 * df * (std::log(2.0 * std::numbers::pi * ev.sigma2) + 1.0) - 0.5 * log_det_v;
  if (prob.reml) {
    const Eigen::MatrixXd l = llt.matrixL();
    ev.log_likelihood -= l.diagonal().array().log().sum();
  }
  return ev;
}

ModelFit make_fit(const Problem& prob, double lambda, bool converged) {
  Evaluation ev = evaluate(prob, lambda);
  ModelFit fit;
  fit.names = prob.names;
  fit.coefficients = ev.beta;
  const auto p = static_cast<Eigen::Index>(prob.p);
  Eigen::MatrixXd cov = ev.sigma2 * ev.a.llt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.covariance = 0.5 * (cov + cov.transpose());
  fit.sigma2 = ev.sigma2;
  fit.lambda = lambda;
  fit.tau2 = lambda * ev.sigma2;
  fit.log_likelihood = ev.log_likelihood;
  fit.converged = converged;
  fit.reml = prob.reml;
  fit.observations = prob.n;
  fit.groups = prob.groups.size();
  fit.cells = prob.cells;
  fit.cell_design = prob.cell_design;
  return fit;
}

}  // namespace

double ModelFit::standard_error(std::size_t i) const {
  const auto k = static_cast<Eigen::Index>(i);
  return std::sqrt(std::max(0.0, covariance(k, k)));
}

double profile_log_likelihood(std::span<const ObservationRow> rows, const ModelSpec& spec,
                              double lambda) {
  if (!(lambda >= 0.0)) throw DataError("variance ratio must be non-negative");
  return evaluate(build_problem(rows, spec), lambda).log_likelihood;
}

ModelFit fit_random_intercept(std::span<const ObservationRow> rows, const ModelSpec& spec) {
  const Problem prob = build_problem(rows, spec);
  if (spec.fixed_lambda) {
    if (!(*spec.fixed_lambda >= 0.0)) throw DataError("variance ratio must be non-negative");
    return make_fit(prob, *spec.fixed_lambda, true);
  }

  // Coarse log grid (plus zero) to bracket the optimum, then Brent inside the
  // bracket. long double gives the minimizer enough bits for a 1e-8 relative
  // tolerance.
  std::vector<double> grid{0.0};
  for (int e = -24; e <= 24; ++e) grid.push_back(std::pow(10.0, e / 4.0));
  std::vector<double> values;
  values.reserve(grid.size());
  for (const double lambda : grid) values.push_back(evaluate(prob, lambda).log_likelihood);
  const auto best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());

  if (best + 1 == grid.size()) return make_fit(prob, grid.back(), false);

  const long double lo = best == 0 ? 0.0L : grid[best - 1];
  const long double hi = grid[best + 1];
  const auto negative = [&](long double lambda) -> long double {
    return -static_cast<long double>(evaluate(prob, static_cast<double>(lambda)).log_likelihood);
  };
  constexpr int kBits = 30;  // relative tolerance 2^-29
  std::uintmax_t max_iter = 200;
  const auto [arg, neg] = boost::math::tools::brent_find_minima(negative, lo, hi, kBits, max_iter);
  const bool iterated = max_iter < 200;

  double lambda = static_cast<double>(arg);
  if (values[best] > -static_cast<double>(neg)) lambda = grid[best];
  return make_fit(prob, lambda, iterated);
}

Estimate linear_estimate(const ModelFit& fit, const Eigen::VectorXd& weights) {
  if (weights.size() != fit.coefficients.size()) {
    throw DataError("weight vector does not match the model coefficients");
  }
  Estimate e;
  e.estimate = weights.dot(fit.coefficients);
  e.se = std::sqrt(std::max(0.0, weights.dot(fit.covariance * weights)));
  e.lower = e.estimate - 1.96 * e.se;
  e.upper = e.estimate + 1.96 * e.se;
  return e;
}

Eigen::VectorXd cell_average(const ModelFit& fit, std::span<const StrategyKind> strategies,
                             std::span<const ToxicityBin> bins) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(fit.coefficients.size());
  std::size_t matched = 0;
  for (std::size_t i = 0; i < fit.cells.size(); ++i) {
    const Cell& c = fit.cells[i];
    if (std::find(strategies.begin(), strategies.end(), c.strategy) == strategies.end()) continue;
    if (!bins.empty()) {
      if (!c.bin) throw DataError("model has no toxicity bins");
      if (std::find(bins.begin(), bins.end(), *c.bin) == bins.end()) continue;
    }
    w += fit.cell_design.row(static_cast<Eigen::Index>(i)).transpose();
    ++matched;
  }
  if (matched == 0) throw DataError("no model cell matches the requested level");
  return w / static_cast<double>(matched);
}

std::vector<MarginalMean> estimated_marginal_means(const ModelFit& fit) {
  if (!fit.converged) throw DataError("marginal means need a converged fit");
  std::vector<MarginalMean> out;
  for (const StrategyKind kind : kAllKinds) {
    const bool present = std::any_of(fit.cells.begin(), fit.cells.end(),
                                     [&](const Cell& c) { return c.strategy == kind; });
    if (!present) continue;
    const StrategyKind one[] = {kind};
    out.push_back({kind, std::nullopt, linear_estimate(fit, cell_average(fit, one))});
  }
  return out;
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

Contrast wald_contrast(const ModelFit& fit, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Estimate e = linear_estimate(fit, a - b);
  Contrast c;
  c.difference = e.estimate;
  c.se = e.se;
  if (e.se > 0.0) {
    c.z = e.estimate / e.se;
    c.p = two_sided_normal_p(c.z);
  } else if (e.estimate != 0.0) {
    throw DataError("contrast has zero standard error");
  }
  return c;
}

Contrast wald_contrast(const ModelFit& fit, StrategyKind a, StrategyKind b) {
  const StrategyKind la[] = {a};
  const StrategyKind lb[] = {b};
  return wald_contrast(fit, cell_average(fit, la), cell_average(fit, lb));
}

namespace {

struct Arm {
  std::string name;
  std::vector<StrategyKind> kinds;
};

std::vector<Arm> toxicity_arms(const ModelFit& fit) {
  const bool binned = std::any_of(fit.cells.begin(), fit.cells.end(),
                                  [](const Cell& c) { return c.bin.has_value(); });
  if (!binned) throw DataError("toxicity analysis needs a fit with the toxicity interaction");
  const auto has = [&](StrategyKind k) {
    return std::any_of(fit.cells.begin(), fit.cells.end(),
                       [&](const Cell& c) { return c.strategy == k; });
  };
  std::vector<Arm> arms;
  Arm pooled{"strategies", {}};
  for (const StrategyKind k : kReframingStrategies) {
    if (has(k)) pooled.kinds.push_back(k);
  }
  if (!pooled.kinds.empty()) arms.push_back(pooled);
  for (const StrategyKind k : {StrategyKind::baseline_paraphrase, StrategyKind::baseline_receptive}) {
    if (has(k)) arms.push_back({std::string(to_string(k)), {k}});
  }
  return arms;
}

}  // namespace

std::vector<ToxicityContrast> toxicity_contrasts(const ModelFit& fit) {
  constexpr std::pair<ToxicityBin, ToxicityBin> kPairs[] = {
      {ToxicityBin::high, ToxicityBin::medium},
      {ToxicityBin::high, ToxicityBin::low},
      {ToxicityBin::medium, ToxicityBin::low},
  };
  std::vector<ToxicityContrast> out;
  for (const Arm& arm : toxicity_arms(fit)) {
    for (const auto& [hi, lo] : kPairs) {
      const ToxicityBin bh[] = {hi};
      const ToxicityBin bl[] = {lo};
      out.push_back({arm.name, hi, lo,
                     wald_contrast(fit, cell_average(fit, arm.kinds, bh),
                                   cell_average(fit, arm.kinds, bl))});
    }
  }
  return out;
}

std::vector<MarginalMeanByBin> toxicity_marginal_means(const ModelFit& fit) {
  std::vector<MarginalMeanByBin> out;
  for (const Arm& arm : toxicity_arms(fit)) {
    for (const ToxicityBin bin : kToxicityBins) {
      const ToxicityBin b[] = {bin};
      out.push_back({arm.name, bin, linear_estimate(fit, cell_average(fit, arm.kinds, b))});
    }
  }
  return out;
}

ZeroVarianceError::ZeroVarianceError(double mean_diff)
    : DataError("paired differences have zero variance (mean difference " +
                std::to_string(mean_diff) + "); t is undefined"),
      mean_diff_(mean_diff) {}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("paired samples differ in length");
  if (a.size() < 2) throw DataError("paired t-test needs at least two pairs");
  const double n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  double mean = 0.0;
  for (const double x : d) mean += x;
  mean /= n;
  double ss = 0.0;
  for (const double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  // Differences that agree up to rounding of the inputs count as constant.
  if (sd <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale)) {
    throw ZeroVarianceError(mean);
  }
  PairedTTest out;
  out.mean_diff = mean;
  out.df = n - 1.0;
  out.t = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(out.df);
  out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

FactorTable factor_breakdown(std::span<const ReceptivenessRecord> records) {
  FactorTable table;
  for (const auto& r : records) {
    const auto it = std::find(kReframingStrategies.begin(), kReframingStrategies.end(), r.variant);
    if (it == kReframingStrategies.end()) continue;
    const auto row = static_cast<std::size_t>(it - kReframingStrategies.begin());
    const ReceptivenessScore score = receptiveness_score(r);
    for (std::size_t f = 0; f < kFactorCount; ++f) table.cells[row][f] += score.factors[f];
    ++table.counts[row];
  }
  for (std::size_t s = 0; s < kReframingStrategies.size(); ++s) {
    if (table.counts[s] == 0) {
      throw DataError("no receptiveness records for strategy '" +
                      std::string(to_string(kReframingStrategies[s])) + "'");
    }
    double row_sum = 0.0;
    for (std::size_t f = 0; f < kFactorCount; ++f) {
      table.cells[s][f] /= static_cast<double>(table.counts[s]);
      row_sum += table.cells[s][f];
    }
    table.row_average[s] = row_sum / static_cast<double>(kFactorCount);
  }
  double total = 0.0;
  for (std::size_t f = 0; f < kFactorCount; ++f) {
    double col = 0.0;
    for (std::size_t s = 0; s < kReframingStrategies.size(); ++s) col += table.cells[s][f];
    table.column_average[f] = col / static_cast<double>(kReframingStrategies.size());
    total += col;
  }
  table.overall = total / static_cast<double>(kReframingStrategies.size() * kFactorCount);
  return table;
}

}  // namespace reframe

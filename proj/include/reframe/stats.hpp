#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reframe/annotation.hpp"
#include "reframe/error.hpp"
#include "reframe/strategies.hpp"

namespace reframe {

enum class ToxicityBin { low, medium, high };

inline constexpr std::array<ToxicityBin, 3> kToxicityBins = {
    ToxicityBin::low, ToxicityBin::medium, ToxicityBin::high};

std::string_view to_string(ToxicityBin bin);

// low [0, 0.5), medium [0.5, 0.7), high [0.7, 0.9]. DataError outside [0, 0.9].
ToxicityBin toxicity_bin(double score);

struct ObservationRow {
  double response = 0.0;
  StrategyKind strategy = StrategyKind::hedging;
  std::string group;
  std::optional<ToxicityBin> bin;
};

enum class Coding {
  cell_means,  // one column per cell, no intercept
  treatment,   // intercept = reference cell, one column per other cell
};

struct ModelSpec {
  Coding coding = Coding::cell_means;
  // Treatment coding reference; defaults to the first strategy present.
  std::optional<StrategyKind> reference;
  bool toxicity_interaction = false;  // cells become strategy x bin
  bool reml = false;
  // Pins the variance ratio tau^2 / sigma^2 instead of estimating it.
  std::optional<double> fixed_lambda;
};

struct Cell {
  StrategyKind strategy;
  std::optional<ToxicityBin> bin;
  bool operator==(const Cell&) const = default;
};

struct ModelFit {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  double sigma2 = 0.0;
  double tau2 = 0.0;
  double lambda = 0.0;
  double log_likelihood = 0.0;  // ML or REML criterion per ModelSpec::reml
  bool converged = false;
  bool reml = false;
  std::size_t observations = 0;
  std::size_t groups = 0;

  // Observed cells and the design row every observation in a cell shares.
  std::vector<Cell> cells;
  Eigen::MatrixXd cell_design;

  double standard_error(std::size_t i) const;
};

// Gaussian random-intercept model y = X b + u_group + e with the variance ratio
// profiled out: generalized least squares in closed form for each ratio and a
// one-dimensional search over the ratio.
ModelFit fit_random_intercept(std::span<const ObservationRow> rows, const ModelSpec& spec);

// Profile log-likelihood at a given variance ratio (the same criterion the fit
// maximizes). Exposed for oracle checks.
double profile_log_likelihood(std::span<const ObservationRow> rows, const ModelSpec& spec,
                              double lambda);

struct Estimate {
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Linear combination of coefficients with a Wald 95% interval.
Estimate linear_estimate(const ModelFit& fit, const Eigen::VectorXd& weights);

// Coefficient weights for the equally weighted mean over the matching cells.
// An empty bin list means all bins.
Eigen::VectorXd cell_average(const ModelFit& fit, std::span<const StrategyKind> strategies,
                             std::span<const ToxicityBin> bins = {});

struct MarginalMean {
  StrategyKind strategy;
  std::optional<ToxicityBin> bin;
  Estimate value;
};

// One row per strategy, averaged over bins for interaction fits. Throws
// DataError on an unconverged fit.
std::vector<MarginalMean> estimated_marginal_means(const ModelFit& fit);

struct Contrast {
  double difference = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
};

Contrast wald_contrast(const ModelFit& fit, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b);
Contrast wald_contrast(const ModelFit& fit, StrategyKind a, StrategyKind b);

struct ToxicityContrast {
  std::string arm;  // "strategies", "baseline_paraphrase" or "baseline_receptive"
  ToxicityBin higher;
  ToxicityBin lower;
  Contrast contrast;
};

// high-med, high-low, med-low for the averaged strategies and each baseline.
std::vector<ToxicityContrast> toxicity_contrasts(const ModelFit& fit);

struct MarginalMeanByBin {
  std::string arm;
  ToxicityBin bin;
  Estimate value;
};

std::vector<MarginalMeanByBin> toxicity_marginal_means(const ModelFit& fit);

struct PairedTTest {
  double mean_diff = 0.0;
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Thrown by paired_t_test when the differences have zero variance.
class ZeroVarianceError : public DataError {
 public:
  explicit ZeroVarianceError(double mean_diff);
  double mean_diff() const { return mean_diff_; }

 private:
  double mean_diff_;
};

// a - b, df = n - 1, two-sided p from the t distribution.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

double two_sided_normal_p(double z);

struct FactorTable {
  // rows follow kReframingStrategies; columns are F1..F4
  std::array<std::array<double, kFactorCount>, 6> cells{};
  std::array<double, 6> row_average{};
  std::array<double, kFactorCount> column_average{};
  double overall = 0.0;
  std::array<std::size_t, 6> counts{};
};

// Mean coded factor scores per strategy over receptiveness records; baseline
// records are ignored. Throws DataError if a strategy has no records.
FactorTable factor_breakdown(std::span<const ReceptivenessRecord> records);

}  // namespace reframe

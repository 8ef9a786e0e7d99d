#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reframe/annotation.hpp"
#include "reframe/corpus.hpp"
#include "reframe/reframer.hpp"
#include "reframe/stats.hpp"
#include "reframe/textmetrics.hpp"

namespace reframe {

// Empty cells render as "NA" / null.
using ReportValue = std::variant<std::monostate, std::string, long long, double>;

struct ReportTable {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<ReportValue>> rows;

  void add_row(std::vector<ReportValue> row);
};

enum class ReportFormat { tabular, structured };

// Tabular: tab-separated with a header line, reals fixed to 4 decimals,
// newline-terminated. Structured: JSON with the same columns and the same
// rounded values.
std::string render(const ReportTable& table, ReportFormat format);

// Writes <dir>/<name>.tsv or <dir>/<name>.json and returns the path. Throws
// ConfigError when the destination cannot be written.
std::filesystem::path emit_report(const ReportTable& table, const std::filesystem::path& dir,
                                  ReportFormat format);

// Both formats; returns the two paths.
std::vector<std::filesystem::path> emit_report(const ReportTable& table,
                                               const std::filesystem::path& dir);

ReportTable exclusion_table(const ExclusionReport& report);
ReportTable generation_table(const GenerationReport& report);
ReportTable failure_table(const GenerationReport& report);
ReportTable validation_table(std::span<const ValidationRow> rows);
ReportTable trigram_table(const TrigramStats& stats, std::size_t per_strategy_limit);
ReportTable overlap_table(const TrigramStats& stats);
ReportTable score_table(std::span<const ReceptivenessRecord> records);
ReportTable factor_table(const FactorTable& table);
ReportTable agreement_table(std::span<const std::pair<AlphaUnit, double>> alphas);
ReportTable reasonability_table(std::span<const ReasonabilitySummary> rows);
ReportTable model_table(const ModelFit& fit);
ReportTable coefficient_table(const ModelFit& fit);
ReportTable emm_table(std::span<const MarginalMean> means);
ReportTable strategy_contrast_table(const ModelFit& fit, StrategyKind reference);
ReportTable toxicity_emm_table(std::span<const MarginalMeanByBin> means);
ReportTable toxicity_contrast_table(std::span<const ToxicityContrast> contrasts);

}  // namespace reframe

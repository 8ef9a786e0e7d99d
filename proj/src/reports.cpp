#include "reframe/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "reframe/error.hpp"

namespace reframe {

namespace {

double round4(double x) {
  const double r = std::round(x * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string format_real(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", round4(x));
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string tsv_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    if (c == '\t') out += "\\t";
    else if (c == '\n') out += "\\n";
    else if (c == '\r') out += "\\r";
    else if (c == '\\') out += "\\\\";
    else out.push_back(c);
  }
  return out;
}

std::string render_cell(const ReportValue& v) {
  if (std::holds_alternative<std::monostate>(v)) return "NA";
  if (const auto* s = std::get_if<std::string>(&v)) return tsv_escape(*s);
  if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
  return format_real(std::get<double>(v));
}

nlohmann::ordered_json json_cell(const ReportValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* i = std::get_if<long long>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) {
    if (!std::isfinite(*d)) return nullptr;
    return round4(*d);
  }
  return nullptr;
}

ReportValue count(std::size_t n) { return static_cast<long long>(n); }
ReportValue name(StrategyKind k) { return std::string(to_string(k)); }
ReportValue opt(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

}  // namespace

void ReportTable::add_row(std::vector<ReportValue> row) {
  if (row.size() != columns.size()) {
    throw DataError("report '" + name + "' row has " + std::to_string(row.size()) +
                    " cells for " + std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::string render(const ReportTable& table, ReportFormat format) {
  if (format == ReportFormat::tabular) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (i) out += '\t';
      out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += '\t';
        out += render_cell(row[i]);
      }
      out += '\n';
    }
    return out;
  }
  nlohmann::ordered_json j;
  j["name"] = table.name;
  j["columns"] = table.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = json_cell(row[i]);
    j["rows"].push_back(std::move(obj));
  }
  return j.dump(2) + "\n";
}

std::filesystem::path emit_report(const ReportTable& table, const std::filesystem::path& dir,
                                  ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create report directory " + dir.string() + ": " + ec.message());
  const auto path =
      dir / (table.name + (format == ReportFormat::tabular ? ".tsv" : ".json"));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write report " + path.string());
  out << render(table, format);
  out.close();
  if (!out) throw ConfigError("failed writing report " + path.string());
  return path;
}

std::vector<std::filesystem::path> emit_report(const ReportTable& table,
                                               const std::filesystem::path& dir) {
  return {emit_report(table, dir, ReportFormat::tabular),
          emit_report(table, dir, ReportFormat::structured)};
}

ReportTable exclusion_table(const ExclusionReport& r) {
  ReportTable t{"exclusions", {"rule", "count"}, {}};
  t.add_row({std::string("input"), count(r.input)});
  t.add_row({std::string("label"), count(r.label)});
  t.add_row({std::string("length"), count(r.length)});
  t.add_row({std::string("subreddit"), count(r.subreddit)});
  t.add_row({std::string("toxicity"), count(r.toxicity)});
  t.add_row({std::string("kept"), count(r.kept)});
  return t;
}

ReportTable generation_table(const GenerationReport& report) {
  ReportTable t{"generation", {"strategy", "completed", "resumed", "over_length", "failed"}, {}};
  for (const auto& k : report.per_kind) {
    t.add_row({name(k.strategy), count(k.completed), count(k.resumed), count(k.over_length),
               count(k.failed)});
  }
  return t;
}

ReportTable failure_table(const GenerationReport& report) {
  ReportTable t{"generation_failures", {"pair_id", "strategy", "message"}, {}};
  for (const auto& f : report.failures) t.add_row({f.pair_id, name(f.strategy), f.message});
  return t;
}

ReportTable validation_table(std::span<const ValidationRow> rows) {
  ReportTable t{"validation",
                {"strategy", "n", "distinct_ngrams_context", "distinct_ngrams_reply",
                 "similarity_context", "similarity_reply", "contradiction_rate"},
                {}};
  for (const auto& r : rows) {
    t.add_row({name(r.strategy), count(r.n), r.distinct_ngrams_context, r.distinct_ngrams_reply,
               r.similarity_context, r.similarity_reply, r.contradiction_rate});
  }
  return t;
}

ReportTable trigram_table(const TrigramStats& stats, std::size_t per_strategy_limit) {
  ReportTable t{"trigrams",
                {"strategy", "rank", "trigram", "count", "p_trigram_given_strategy",
                 "p_strategy_given_trigram"},
                {}};
  for (const StrategyKind s : stats.strategies()) {
    std::size_t rank = 0;
    for (const auto& e : stats.top(s, per_strategy_limit)) {
      t.add_row({name(s), count(++rank), e.trigram, count(e.count), e.p_t_given_s,
                 e.p_s_given_t});
    }
  }
  return t;
}

ReportTable overlap_table(const TrigramStats& stats) {
  ReportTable t{"trigram_overlap", {"strategy_a", "strategy_b", "jaccard"}, {}};
  const auto kinds = stats.strategies();
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < kinds.size(); ++j) {
      t.add_row({name(kinds[i]), name(kinds[j]), strategy_overlap(kinds[i], kinds[j], stats)});
    }
  }
  return t;
}

ReportTable score_table(std::span<const ReceptivenessRecord> records) {
  ReportTable t{"receptiveness_scores",
                {"pair_id", "variant", "annotator_id", "index", "emotion", "curiosity", "bias",
                 "openness"},
                {}};
  for (const auto& r : records) {
    const ReceptivenessScore s = receptiveness_score(r);
    t.add_row({r.pair_id, name(r.variant), r.annotator_id, s.index, s.factors[0], s.factors[1],
               s.factors[2], s.factors[3]});
  }
  return t;
}

ReportTable factor_table(const FactorTable& table) {
  ReportTable t{"receptiveness_factors",
                {"strategy", "emotion", "curiosity", "bias", "openness", "average"},
                {}};
  for (std::size_t s = 0; s < kReframingStrategies.size(); ++s) {
    const auto& c = table.cells[s];
    t.add_row({name(kReframingStrategies[s]), c[0], c[1], c[2], c[3], table.row_average[s]});
  }
  const auto& a = table.column_average;
  t.add_row({std::string("average"), a[0], a[1], a[2], a[3], table.overall});
  return t;
}

ReportTable agreement_table(std::span<const std::pair<AlphaUnit, double>> alphas) {
  ReportTable t{"agreement", {"unit", "krippendorff_alpha"}, {}};
  for (const auto& [unit, alpha] : alphas) t.add_row({std::string(to_string(unit)), alpha});
  return t;
}

ReportTable reasonability_table(std::span<const ReasonabilitySummary> rows) {
  ReportTable t{"reasonability",
                {"variant", "items", "mean", "ci_lower", "ci_upper", "paired_items", "mean_diff",
                 "t", "df", "p"},
                {}};
  for (const auto& r : rows) {
    t.add_row({name(r.variant), count(r.items), r.mean, r.ci_lower, r.ci_upper,
               count(r.paired_items), opt(r.mean_diff), opt(r.t), opt(r.df), opt(r.p)});
  }
  return t;
}

ReportTable model_table(const ModelFit& fit) {
  ReportTable t{"model", {"quantity", "value"}, {}};
  t.add_row({std::string("criterion"), std::string(fit.reml ? "reml" : "ml")});
  t.add_row({std::string("observations"), count(fit.observations)});
  t.add_row({std::string("groups"), count(fit.groups)});
  t.add_row({std::string("sigma2"), fit.sigma2});
  t.add_row({std::string("tau2"), fit.tau2});
  t.add_row({std::string("lambda"), fit.lambda});
  t.add_row({std::string("log_likelihood"), fit.log_likelihood});
  t.add_row({std::string("converged"), std::string(fit.converged ? "true" : "false")});
  return t;
}

ReportTable coefficient_table(const ModelFit& fit) {
  ReportTable t{"coefficients", {"term", "estimate", "se", "z", "p"}, {}};
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const double b = fit.coefficients(static_cast<Eigen::Index>(i));
    const double se = fit.standard_error(i);
    const double z = se > 0.0 ? b / se : std::nan("");
    t.add_row({fit.names[i], b, se, z, se > 0.0 ? two_sided_normal_p(z) : std::nan("")});
  }
  return t;
}

ReportTable emm_table(std::span<const MarginalMean> means) {
  ReportTable t{"emm", {"strategy", "emm", "se", "lower", "upper"}, {}};
  for (const auto& m : means) {
    t.add_row({name(m.strategy), m.value.estimate, m.value.se, m.value.lower, m.value.upper});
  }
  return t;
}

ReportTable strategy_contrast_table(const ModelFit& fit, StrategyKind reference) {
  ReportTable t{"strategy_contrasts", {"strategy", "reference", "mean_diff", "se", "z", "p"}, {}};
  for (const StrategyKind k : kAllKinds) {
    if (k == reference) continue;
    const bool present = std::any_of(fit.cells.begin(), fit.cells.end(),
                                     [&](const Cell& c) { return c.strategy == k; });
    if (!present) continue;
    const Contrast c = wald_contrast(fit, k, reference);
    t.add_row({name(k), name(reference), c.difference, c.se, c.z, c.p});
  }
  return t;
}

ReportTable toxicity_emm_table(std::span<const MarginalMeanByBin> means) {
  ReportTable t{"toxicity_emm", {"arm", "bin", "emm", "se", "lower", "upper"}, {}};
  for (const auto& m : means) {
    t.add_row({m.arm, std::string(to_string(m.bin)), m.value.estimate, m.value.se, m.value.lower,
               m.value.upper});
  }
  return t;
}

ReportTable toxicity_contrast_table(std::span<const ToxicityContrast> contrasts) {
  ReportTable t{"toxicity_contrasts", {"arm", "higher", "lower", "mean_diff", "se", "z", "p"}, {}};
  for (const auto& c : contrasts) {
    t.add_row({c.arm, std::string(to_string(c.higher)), std::string(to_string(c.lower)),
               c.contrast.difference, c.contrast.se, c.contrast.z, c.contrast.p});
  }
  return t;
}

}  // namespace reframe

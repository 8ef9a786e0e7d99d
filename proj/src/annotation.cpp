#include "reframe/annotation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "reframe/error.hpp"
#include "reframe/stats.hpp"
#include "reframe/text.hpp"

namespace reframe {

namespace {

// Minimal RFC 4180 field splitter for one physical line.
std::vector<std::string> split_row(const std::string& line, char delimiter, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote", line_no);
  fields.push_back(std::move(field));
  return fields;
}

struct Table {
  std::map<std::string, std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line, fields)
};

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  char delimiter = ',';
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (header) {
      delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
      const auto names = split_row(line, delimiter, line_no);
      for (std::size_t i = 0; i < names.size(); ++i) {
        table.columns[text::lowercase(text::trim(names[i]))] = i;
      }
      header = false;
      continue;
    }
    table.rows.emplace_back(line_no, split_row(line, delimiter, line_no));
  }
  if (header) throw DataError("annotation table has no header row");
  return table;
}

std::size_t require_column(const Table& table, const std::string& name) {
  const auto it = table.columns.find(name);
  if (it == table.columns.end()) throw DataError("annotation table lacks column '" + name + "'");
  return it->second;
}

std::string cell(const std::vector<std::string>& fields, std::size_t column, std::size_t line,
                 const std::string& name) {
  if (column >= fields.size() || text::trim(fields[column]).empty()) {
    throw DataError("line " + std::to_string(line) + ": missing value for '" + name + "'", line);
  }
  return std::string(text::trim(fields[column]));
}

int parse_int(const std::string& raw, std::size_t line, const std::string& name) {
  std::string_view s = raw;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // Integral values written as reals, e.g. "2.0".
    double real = 0.0;
    const auto [rptr, rec] = std::from_chars(s.data(), s.data() + s.size(), real);
    if (rec == std::errc() && rptr == s.data() + s.size() && real == std::floor(real)) {
      return static_cast<int>(real);
    }
    throw DataError("line " + std::to_string(line) + ": '" + name + "' is not an integer: " + raw,
                    line);
  }
  return value;
}

template <typename F>
auto with_line(std::size_t line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DataError& e) {
    if (e.line() != 0) throw;
    throw DataError("line " + std::to_string(line) + ": " + e.what(), line);
  }
}

}  // namespace

CodedAnswers code_answers(const ReceptivenessRecord& record) {
  validate(record);
  CodedAnswers coded{};
  for (std::size_t q = 0; q < kQuestionCount; ++q) {
    const double raw = record.answers[q];
    coded[q] = kQuestionPolarity[q] == Polarity::negative ? -raw : raw;
  }
  return coded;
}

ReceptivenessScore receptiveness_score(const ReceptivenessRecord& record) {
  const CodedAnswers coded = code_answers(record);
  ReceptivenessScore score;
  for (std::size_t f = 0; f < kFactorCount; ++f) {
    score.factors[f] = (coded[2 * f] + coded[2 * f + 1]) / 2.0;
  }
  double sum = 0.0;
  for (const double v : coded) sum += v;
  score.index = sum / static_cast<double>(kQuestionCount);
  return score;
}

void validate(const ReceptivenessRecord& record) {
  if (record.variant == StrategyKind::original) {
    throw DataError("receptiveness record compares the original with itself");
  }
  for (std::size_t q = 0; q < kQuestionCount; ++q) {
    const int a = record.answers[q];
    if (a < kLikertMin || a > kLikertMax) {
      throw DataError("answer q" + std::to_string(q + 1) + " = " + std::to_string(a) +
                      " outside [-3, 3]");
    }
  }
}

void validate(const ReasonabilityRecord& record) {
  if (record.score < 0 || record.score > 4) {
    throw DataError("reasonability score " + std::to_string(record.score) + " outside [0, 4]");
  }
}

double krippendorff_alpha_interval(std::span<const std::vector<double>> units) {
  // Coincidence matrix over the distinct values of pairable units.
  std::vector<double> values;
  std::size_t pairable = 0;
  for (const auto& unit : units) {
    if (unit.size() < 2) continue;
    ++pairable;
    values.insert(values.end(), unit.begin(), unit.end());
  }
  if (pairable < 2) {
    throw DataError("Krippendorff's alpha needs at least two units with two or more values");
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t v = values.size();
  const auto index_of = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), x) -
                                    values.begin());
  };

  std::vector<double> coincidence(v * v, 0.0);
  std::vector<double> unit_counts(v, 0.0);
  for (const auto& unit : units) {
    if (unit.size() < 2) continue;
    std::fill(unit_counts.begin(), unit_counts.end(), 0.0);
    std::vector<std::size_t> present;
    for (const double x : unit) {
      const std::size_t i = index_of(x);
      if (unit_counts[i] == 0.0) present.push_back(i);
      unit_counts[i] += 1.0;
    }
    const double weight = 1.0 / static_cast<double>(unit.size() - 1);
    for (const std::size_t c : present) {
      for (const std::size_t k : present) {
        const double pairs = unit_counts[c] * (unit_counts[k] - (c == k ? 1.0 : 0.0));
        coincidence[c * v + k] += pairs * weight;
      }
    }
  }

  std::vector<double> marginal(v, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) marginal[c] += coincidence[c * v + k];
    n += marginal[c];
  }
  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = c + 1; k < v; ++k) {
      const double delta = (values[c] - values[k]) * (values[c] - values[k]);
      observed += 2.0 * coincidence[c * v + k] * delta;
      expected += 2.0 * marginal[c] * marginal[k] * delta;
    }
  }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

std::string_view to_string(AlphaUnit unit) {
  return unit == AlphaUnit::record_index ? "record_index" : "question";
}

double receptiveness_alpha(std::span<const ReceptivenessRecord> records, AlphaUnit unit) {
  // Keyed and value-sorted so annotator order cannot affect the result.
  std::map<std::tuple<std::string, StrategyKind, std::size_t>, std::vector<double>> grouped;
  for (const auto& r : records) {
    if (unit == AlphaUnit::record_index) {
      grouped[{r.pair_id, r.variant, 0}].push_back(receptiveness_score(r).index);
    } else {
      const CodedAnswers coded = code_answers(r);
      for (std::size_t q = 0; q < kQuestionCount; ++q) {
        grouped[{r.pair_id, r.variant, q}].push_back(coded[q]);
      }
    }
  }
  std::vector<std::vector<double>> units;
  units.reserve(grouped.size());
  for (auto& [key, values] : grouped) {
    std::sort(values.begin(), values.end());
    units.push_back(std::move(values));
  }
  return krippendorff_alpha_interval(units);
}

std::vector<ReasonabilitySummary> reasonability_summary(
    std::span<const ReasonabilityRecord> records) {
  std::map<StrategyKind, std::map<std::string, std::pair<double, std::size_t>>> sums;
  for (const auto& r : records) {
    validate(r);
    auto& slot = sums[r.variant][r.pair_id];
    slot.first += r.score;
    ++slot.second;
  }
  std::map<StrategyKind, std::map<std::string, double>> item_means;
  for (const auto& [variant, items] : sums) {
    for (const auto& [pair_id, s] : items) {
      item_means[variant][pair_id] = s.first / static_cast<double>(s.second);
    }
  }

  const auto original = item_means.find(StrategyKind::original);
  std::vector<ReasonabilitySummary> out;
  for (const auto& [variant, items] : item_means) {
    ReasonabilitySummary row;
    row.variant = variant;
    row.items = items.size();
    double sum = 0.0;
    for (const auto& [id, m] : items) sum += m;
    row.mean = sum / static_cast<double>(items.size());
    if (items.size() >= 2) {
      double ss = 0.0;
      for (const auto& [id, m] : items) ss += (m - row.mean) * (m - row.mean);
      const double n = static_cast<double>(items.size());
      const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      const boost::math::students_t dist(n - 1.0);
      const double crit = boost::math::quantile(boost::math::complement(dist, 0.025));
      row.ci_lower = row.mean - crit * se;
      row.ci_upper = row.mean + crit * se;
    } else {
      row.ci_lower = row.ci_upper = std::nan("");
    }

    if (variant != StrategyKind::original) {
      std::vector<double> a, b;
      if (original != item_means.end()) {
        for (const auto& [id, m] : items) {
          if (const auto it = original->second.find(id); it != original->second.end()) {
            a.push_back(m);
            b.push_back(it->second);
          }
        }
      }
      if (a.empty()) {
        throw DataError("variant '" + std::string(to_string(variant)) +
                        "' shares no items with the original");
      }
      row.paired_items = a.size();
      try {
        const PairedTTest t = paired_t_test(a, b);
        row.mean_diff = t.mean_diff;
        row.t = t.t;
        row.df = t.df;
        row.p = t.p;
      } catch (const ZeroVarianceError& e) {
        row.mean_diff = e.mean_diff();
      } catch (const DataError&) {
        // A single shared item: a difference but no test.
        double diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] - b[i];
        row.mean_diff = diff / static_cast<double>(a.size());
      }
    }
    out.push_back(row);
  }
  return out;
}

std::vector<ReceptivenessRecord> parse_receptiveness(std::istream& in) {
  const Table table = read_table(in);
  const std::size_t pair_col = require_column(table, "pair_id");
  const std::size_t variant_col = require_column(table, "variant");
  const std::size_t annotator_col = require_column(table, "annotator_id");
  std::array<std::size_t, kQuestionCount> q_cols{};
  for (std::size_t q = 0; q < kQuestionCount; ++q) {
    q_cols[q] = require_column(table, "q" + std::to_string(q + 1));
  }
  std::vector<ReceptivenessRecord> out;
  for (const auto& [line, fields] : table.rows) {
    with_line(line, [&, &line = line, &fields = fields] {
      ReceptivenessRecord r;
      r.pair_id = cell(fields, pair_col, line, "pair_id");
      r.variant = parse_strategy(cell(fields, variant_col, line, "variant"));
      r.annotator_id = cell(fields, annotator_col, line, "annotator_id");
      for (std::size_t q = 0; q < kQuestionCount; ++q) {
        const std::string name = "q" + std::to_string(q + 1);
        r.answers[q] = parse_int(cell(fields, q_cols[q], line, name), line, name);
      }
      validate(r);
      out.push_back(std::move(r));
    });
  }
  return out;
}

std::vector<ReasonabilityRecord> parse_reasonability(std::istream& in) {
  const Table table = read_table(in);
  const std::size_t pair_col = require_column(table, "pair_id");
  const std::size_t variant_col = require_column(table, "variant");
  const std::size_t annotator_col = require_column(table, "annotator_id");
  const std::size_t score_col = require_column(table, "score");
  std::vector<ReasonabilityRecord> out;
  for (const auto& [line, fields] : table.rows) {
    with_line(line, [&, &line = line, &fields = fields] {
      ReasonabilityRecord r;
      r.pair_id = cell(fields, pair_col, line, "pair_id");
      r.variant = parse_strategy(cell(fields, variant_col, line, "variant"));
      r.annotator_id = cell(fields, annotator_col, line, "annotator_id");
      r.score = parse_int(cell(fields, score_col, line, "score"), line, "score");
      validate(r);
      out.push_back(std::move(r));
    });
  }
  return out;
}

std::vector<ReceptivenessRecord> load_receptiveness(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("annotation file not found: " + path.string());
  try {
    return parse_receptiveness(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what(), e.line());
  }
}

std::vector<ReasonabilityRecord> load_reasonability(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("annotation file not found: " + path.string());
  try {
    return parse_reasonability(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace reframe

#include "reframe/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <system_error>

#include "reframe/annotation.hpp"
#include "reframe/error.hpp"
#include "reframe/hash.hpp"
#include "reframe/reframer.hpp"
#include "reframe/reports.hpp"
#include "reframe/stats.hpp"
#include "reframe/textmetrics.hpp"

#ifndef REFRAME_LAB_VERSION
#define REFRAME_LAB_VERSION "0.0.0"
#endif

namespace reframe {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view tool_version() { return REFRAME_LAB_VERSION; }

namespace {

constexpr std::array<Capability, 4> kCapabilities = {Capability::chat, Capability::embedding,
                                                     Capability::nli, Capability::toxicity};

Capability parse_capability(const std::string& key) {
  for (const Capability c : kCapabilities) {
    if (to_string(c) == key) return c;
  }
  throw ConfigError("unknown provider capability '" + key + "'");
}

fs::path resolve(const fs::path& base, const std::string& raw) {
  if (raw.empty()) return {};
  fs::path p(raw);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

const fs::path& require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string("paths.") + key + " is not configured");
  return p;
}

const fs::path& require_input(const fs::path& p, const char* key) {
  require_path(p, key);
  if (!fs::exists(p)) {
    throw DataError(std::string("missing input for paths.") + key + ": " + p.string());
  }
  return p;
}

void append(std::vector<fs::path>& out, const std::vector<fs::path>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

ReportTable renamed(ReportTable table, std::string name) {
  table.name = std::move(name);
  return table;
}

std::map<std::string, CommentReplyPair> index_pairs(const std::vector<CommentReplyPair>& pairs) {
  std::map<std::string, CommentReplyPair> out;
  for (const auto& p : pairs) out.emplace(p.id, p);
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"paths", "providers", "filter", "strategies", "seed", "parallelism",
                 "trigram_top", "reml"},
             "config");
  RunConfig c;
  try {
    if (j.contains("paths")) {
      const json& p = j["paths"];
      check_keys(p, {"raw_corpus", "corpus", "reframes", "receptiveness", "reasonability",
                     "cache", "output"},
                 "paths");
      const auto get = [&](const char* key, fs::path& dst) {
        if (p.contains(key)) dst = resolve(base_dir, p[key].get<std::string>());
      };
      get("raw_corpus", c.paths.raw_corpus);
      get("corpus", c.paths.corpus);
      get("reframes", c.paths.reframes);
      get("receptiveness", c.paths.receptiveness);
      get("reasonability", c.paths.reasonability);
      get("cache", c.paths.cache);
      if (p.contains("output")) c.paths.output = resolve(base_dir, p["output"].get<std::string>());
      else c.paths.output = resolve(base_dir, "out");
    } else {
      c.paths.output = resolve(base_dir, "out");
    }
    if (j.contains("providers")) {
      const json& providers = j["providers"];
      if (!providers.is_object()) throw ConfigError("providers must be an object");
      for (const auto& [key, value] : providers.items()) {
        ProviderConfig pc = ProviderConfig::from_json(value);
        if (!pc.cache_dir.empty()) pc.cache_dir = resolve(base_dir, pc.cache_dir.string());
        c.providers[parse_capability(key)] = std::move(pc);
      }
    }
    if (j.contains("filter")) {
      const json& f = j["filter"];
      check_keys(f, {"max_words", "toxicity_cutoff", "excluded_subreddits", "apply_toxicity"},
                 "filter");
      c.filter.max_words = f.value("max_words", c.filter.max_words);
      c.filter.toxicity_cutoff = f.value("toxicity_cutoff", c.filter.toxicity_cutoff);
      c.filter.apply_toxicity = f.value("apply_toxicity", c.filter.apply_toxicity);
      if (f.contains("excluded_subreddits")) {
        c.filter.excluded_subreddits = f["excluded_subreddits"].get<std::set<std::string>>();
      }
    }
    if (j.contains("strategies")) {
      const json& s = j["strategies"];
      if (s.is_string()) {
        c.strategies = parse_strategy_list(s.get<std::string>());
      } else if (s.is_array()) {
        std::string joined;
        for (const auto& item : s) {
          if (!joined.empty()) joined += ',';
          joined += item.get<std::string>();
        }
        c.strategies = parse_strategy_list(joined);
      } else {
        throw ConfigError("strategies must be \"all\" or a list");
      }
    }
    c.seed = j.value("seed", c.seed);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.trigram_top = j.value("trigram_top", c.trigram_top);
    c.reml = j.value("reml", c.reml);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (c.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  c.filter.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  ordered_json p;
  p["raw_corpus"] = paths.raw_corpus.generic_string();
  p["corpus"] = paths.corpus.generic_string();
  p["reframes"] = paths.reframes.generic_string();
  p["receptiveness"] = paths.receptiveness.generic_string();
  p["reasonability"] = paths.reasonability.generic_string();
  p["cache"] = paths.cache.generic_string();
  p["output"] = paths.output.generic_string();
  j["paths"] = p;
  ordered_json providers = ordered_json::object();
  for (const auto& [cap, pc] : this->providers) providers[std::string(to_string(cap))] = pc.to_json();
  j["providers"] = providers;
  ordered_json f;
  f["max_words"] = filter.max_words;
  f["toxicity_cutoff"] = filter.toxicity_cutoff;
  f["excluded_subreddits"] = filter.excluded_subreddits;
  f["apply_toxicity"] = filter.apply_toxicity;
  j["filter"] = f;
  ordered_json kinds = ordered_json::array();
  for (const StrategyKind k : strategies) kinds.push_back(std::string(to_string(k)));
  j["strategies"] = kinds;
  j["seed"] = seed;
  j["parallelism"] = parallelism;
  j["trigram_top"] = trigram_top;
  j["reml"] = reml;
  return j;
}

ProviderConfig RunConfig::provider(Capability capability) const {
  const auto it = providers.find(capability);
  if (it == providers.end()) {
    throw ConfigError("no provider configured for capability '" +
                      std::string(to_string(capability)) + "'");
  }
  ProviderConfig pc = it->second;
  if (pc.cache_dir.empty() && !paths.cache.empty()) {
    pc.cache_dir = paths.cache / std::string(to_string(capability));
  }
  if (pc.mock && pc.mock_seed == 0) pc.mock_seed = seed;
  return pc;
}

RunConfig RunConfig::offline_defaults() {
  RunConfig c;
  for (const Capability cap : kCapabilities) {
    ProviderConfig pc;
    pc.mock = true;
    pc.model = "mock";
    c.providers[cap] = pc;
  }
  return c;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::generate: return "generate";
    case Stage::validate: return "validate";
    case Stage::trigrams: return "trigrams";
    case Stage::score: return "score";
    case Stage::analyze: return "analyze";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (const Stage s : kAllStages) {
    if (to_string(s) == text) return s;
  }
  if (text == "score-annotations") return Stage::score;
  throw ConfigError("unknown stage '" + std::string(text) + "'");
}

StageOutcome run_ingest(const RunConfig& config) {
  StageOutcome outcome{Stage::ingest, {}, {}, {}};
  const fs::path& raw = require_input(config.paths.raw_corpus, "raw_corpus");
  const fs::path& dst = require_path(config.paths.corpus, "corpus");
  outcome.inputs.push_back(raw);
  config.filter.validate();

  const std::vector<CommentReplyPair> pairs = load_corpus(raw);
  FilterResult result;
  if (config.filter.apply_toxicity) {
    // Score only what survives the cheap rules, then apply the cutoff.
    FilterConfig structural = config.filter;
    structural.apply_toxicity = false;
    FilterResult first = filter_pairs(pairs, structural);
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < first.pairs.size(); ++i) {
      if (!first.pairs[i].reply_toxicity) missing.push_back(i);
    }
    if (!missing.empty()) {
      ToxicityClient client(make_executor(config.provider(Capability::toxicity)));
      run_bounded(missing.size(), config.parallelism, [&](std::size_t k) {
        auto& pair = first.pairs[missing[k]];
        pair.reply_toxicity = client.toxicity(pair.reply);
      });
      outcome.notes.push_back("scored toxicity for " + std::to_string(missing.size()) + " replies");
    }
    FilterResult second = filter_pairs(first.pairs, config.filter);
    result.pairs = std::move(second.pairs);
    result.report = chain(first.report, second.report);
  } else {
    result = filter_pairs(pairs, config.filter);
  }

  if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
  write_corpus(dst, result.pairs);
  outcome.outputs.push_back(dst);
  append(outcome.outputs, emit_report(exclusion_table(result.report), config.paths.output));
  outcome.notes.push_back("kept " + std::to_string(result.report.kept) + " of " +
                          std::to_string(result.report.input) + " pairs");
  return outcome;
}

StageOutcome run_generate(const RunConfig& config) {
  StageOutcome outcome{Stage::generate, {}, {}, {}};
  const fs::path& corpus_path = require_input(config.paths.corpus, "corpus");
  const fs::path& dst = require_path(config.paths.reframes, "reframes");
  outcome.inputs.push_back(corpus_path);
  const auto pairs = load_corpus(corpus_path);

  GenerationOptions options;
  options.parallelism = config.parallelism;
  if (fs::exists(dst)) {
    options.existing = load_reframes(dst);
    outcome.notes.push_back("resuming from " + std::to_string(options.existing.size()) +
                            " existing reframes");
  }
  ChatClient client(make_executor(config.provider(Capability::chat)));
  const GenerationReport report = generate_all(pairs, config.strategies, client, options);

  // Keep earlier reframes of kinds outside this run's selection.
  std::vector<Reframe> merged = report.reframes;
  std::set<std::pair<std::string, StrategyKind>> seen;
  for (const auto& r : merged) seen.emplace(r.pair_id, r.strategy);
  for (const auto& r : options.existing) {
    if (!seen.contains({r.pair_id, r.strategy})) merged.push_back(r);
  }

  if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
  write_reframes(dst, merged);
  outcome.outputs.push_back(dst);
  append(outcome.outputs, emit_report(generation_table(report), config.paths.output));
  append(outcome.outputs, emit_report(failure_table(report), config.paths.output));
  if (!report.failures.empty()) {
    throw ProviderError(ProviderErrorKind::retry_exhausted,
                        std::to_string(report.failures.size()) +
                            " generations failed; completed reframes were saved; first: " +
                            report.failures.front().message);
  }
  return outcome;
}

StageOutcome run_validate(const RunConfig& config) {
  StageOutcome outcome{Stage::validate, {}, {}, {}};
  const fs::path& corpus_path = require_input(config.paths.corpus, "corpus");
  const fs::path& reframes_path = require_input(config.paths.reframes, "reframes");
  outcome.inputs = {corpus_path, reframes_path};
  const auto pairs = load_corpus(corpus_path);
  const auto reframes = load_reframes(reframes_path);

  std::map<std::string, PairText> texts;
  for (const auto& p : pairs) texts.emplace(p.id, PairText{p.comment, p.reply});
  EmbeddingClient embedder(make_executor(config.provider(Capability::embedding)));
  NliClient nli(make_executor(config.provider(Capability::nli)));

  std::vector<ValidationRow> rows;
  for (const StrategyKind kind : kGeneratableKinds) {
    const bool present = std::any_of(reframes.begin(), reframes.end(),
                                     [&](const Reframe& r) { return r.strategy == kind; });
    if (!present) continue;
    rows.push_back(validate_strategy(kind, reframes, texts, embedder, nli, config.parallelism));
  }
  append(outcome.outputs, emit_report(validation_table(rows), config.paths.output));
  return outcome;
}

StageOutcome run_trigrams(const RunConfig& config) {
  StageOutcome outcome{Stage::trigrams, {}, {}, {}};
  const fs::path& corpus_path = require_input(config.paths.corpus, "corpus");
  const fs::path& reframes_path = require_input(config.paths.reframes, "reframes");
  outcome.inputs = {corpus_path, reframes_path};
  std::map<std::string, std::string> originals;
  for (const auto& p : load_corpus(corpus_path)) originals.emplace(p.id, p.reply);
  const TrigramStats stats = strategy_trigram_stats(load_reframes(reframes_path), originals);
  append(outcome.outputs, emit_report(trigram_table(stats, config.trigram_top), config.paths.output));
  append(outcome.outputs, emit_report(overlap_table(stats), config.paths.output));
  return outcome;
}

StageOutcome run_score(const RunConfig& config, std::optional<AnnotationKind> kind) {
  StageOutcome outcome{Stage::score, {}, {}, {}};
  if (!kind || *kind == AnnotationKind::receptiveness) {
    const fs::path& src = require_input(config.paths.receptiveness, "receptiveness");
    outcome.inputs.push_back(src);
    const auto records = load_receptiveness(src);
    append(outcome.outputs, emit_report(score_table(records), config.paths.output));
    append(outcome.outputs, emit_report(factor_table(factor_breakdown(records)), config.paths.output));
    std::vector<std::pair<AlphaUnit, double>> alphas;
    for (const AlphaUnit unit : {AlphaUnit::record_index, AlphaUnit::question}) {
      alphas.emplace_back(unit, receptiveness_alpha(records, unit));
    }
    append(outcome.outputs, emit_report(agreement_table(alphas), config.paths.output));
  }
  if (!kind || *kind == AnnotationKind::reasonability) {
    const fs::path& src = require_input(config.paths.reasonability, "reasonability");
    outcome.inputs.push_back(src);
    const auto records = load_reasonability(src);
    append(outcome.outputs,
           emit_report(reasonability_table(reasonability_summary(records)), config.paths.output));
  }
  return outcome;
}

StageOutcome run_analyze(const RunConfig& config, std::optional<AnalysisModel> model) {
  StageOutcome outcome{Stage::analyze, {}, {}, {}};
  const fs::path& src = require_input(config.paths.receptiveness, "receptiveness");
  outcome.inputs.push_back(src);
  const auto records = load_receptiveness(src);
  const fs::path& out = config.paths.output;

  if (!model || *model == AnalysisModel::receptiveness) {
    std::vector<ObservationRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
      rows.push_back({receptiveness_score(r).index, r.variant, r.pair_id, std::nullopt});
    }
    ModelSpec spec;
    spec.coding = Coding::cell_means;
    spec.reml = config.reml;
    const ModelFit fit = fit_random_intercept(rows, spec);
    if (!fit.converged) outcome.notes.push_back("receptiveness model did not converge");
    append(outcome.outputs, emit_report(renamed(model_table(fit), "receptiveness_model"), out));
    append(outcome.outputs,
           emit_report(renamed(coefficient_table(fit), "receptiveness_coefficients"), out));
    append(outcome.outputs, emit_report(emm_table(estimated_marginal_means(fit)), out));
    const bool has_paraphrase =
        std::any_of(fit.cells.begin(), fit.cells.end(), [](const Cell& c) {
          return c.strategy == StrategyKind::baseline_paraphrase;
        });
    if (has_paraphrase) {
      append(outcome.outputs,
             emit_report(strategy_contrast_table(fit, StrategyKind::baseline_paraphrase), out));
    } else {
      outcome.notes.push_back("no paraphrase baseline records; strategy contrasts skipped");
    }
  }

  if (!model || *model == AnalysisModel::toxicity_interaction) {
    const fs::path& corpus_path = require_input(config.paths.corpus, "corpus");
    outcome.inputs.push_back(corpus_path);
    const auto pairs = index_pairs(load_corpus(corpus_path));
    std::vector<ObservationRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
      const auto it = pairs.find(r.pair_id);
      if (it == pairs.end()) {
        throw DataError("annotation pair_id '" + r.pair_id + "' is not in the corpus");
      }
      if (!it->second.reply_toxicity) {
        throw DataError("pair '" + r.pair_id + "' has no toxicity score");
      }
      rows.push_back({receptiveness_score(r).index, r.variant, r.pair_id,
                      toxicity_bin(*it->second.reply_toxicity)});
    }
    ModelSpec spec;
    spec.coding = Coding::cell_means;
    spec.toxicity_interaction = true;
    spec.reml = config.reml;
    const ModelFit fit = fit_random_intercept(rows, spec);
    if (!fit.converged) outcome.notes.push_back("toxicity model did not converge");
    append(outcome.outputs, emit_report(renamed(model_table(fit), "toxicity_model"), out));
    append(outcome.outputs,
           emit_report(toxicity_emm_table(toxicity_marginal_means(fit)), out));
    append(outcome.outputs,
           emit_report(toxicity_contrast_table(toxicity_contrasts(fit)), out));
  }
  return outcome;
}

fs::path write_manifest(const RunConfig& config, std::span<const StageOutcome> stages) {
  const auto digest = [](const fs::path& p) {
    ordered_json f;
    f["path"] = p.generic_string();
    f["sha256"] = fs::exists(p) ? json(sha256_file(p)) : json(nullptr);
    return f;
  };
  ordered_json m;
  m["tool"] = "reframe-lab";
  m["version"] = std::string(tool_version());
  m["config"] = config.to_json();
  m["stages"] = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json entry;
    entry["stage"] = std::string(to_string(s.stage));
    entry["inputs"] = ordered_json::array();
    for (const auto& p : s.inputs) entry["inputs"].push_back(digest(p));
    entry["outputs"] = ordered_json::array();
    for (const auto& p : s.outputs) entry["outputs"].push_back(digest(p));
    entry["notes"] = s.notes;
    m["stages"].push_back(std::move(entry));
  }
  std::error_code ec;
  fs::create_directories(config.paths.output, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.paths.output.string());
  const fs::path path = config.paths.output / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << m.dump(2) << '\n';
  return path;
}

ReportBundle run_pipeline(const RunConfig& config, std::span<const Stage> stages) {
  ReportBundle bundle;
  std::vector<Stage> ordered(stages.begin(), stages.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
  for (const Stage stage : ordered) {
    try {
      switch (stage) {
        case Stage::ingest: bundle.stages.push_back(run_ingest(config)); break;
        case Stage::generate: bundle.stages.push_back(run_generate(config)); break;
        case Stage::validate: bundle.stages.push_back(run_validate(config)); break;
        case Stage::trigrams: bundle.stages.push_back(run_trigrams(config)); break;
        case Stage::score: bundle.stages.push_back(run_score(config)); break;
        case Stage::analyze: bundle.stages.push_back(run_analyze(config)); break;
      }
    } catch (...) {
      // Completed stages stay on disk and in the manifest.
      bundle.manifest = write_manifest(config, bundle.stages);
      throw;
    }
  }
  bundle.manifest = write_manifest(config, bundle.stages);
  return bundle;
}

}  // namespace reframe

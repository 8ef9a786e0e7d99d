// reframe-lab: command-line entry point for the reframing pipeline.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reframe/error.hpp"
#include "reframe/pipeline.hpp"
#include "reframe/strategies.hpp"
#include "reframe/text.hpp"

namespace {

using namespace reframe;

struct Common {
  std::string config;
  std::string output;
  bool offline = false;
  int parallelism = 0;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "JSON run configuration");
  cmd->add_option("--output-dir", common.output, "Directory for reports and the manifest");
  cmd->add_flag("--offline", common.offline, "Use deterministic mock providers");
  cmd->add_option("--parallelism", common.parallelism, "Concurrent provider requests")
      ->check(CLI::PositiveNumber);
}

RunConfig base_config(const Common& common) {
  RunConfig config = common.config.empty() ? RunConfig{} : RunConfig::load(common.config);
  if (common.offline) {
    const RunConfig mocks = RunConfig::offline_defaults();
    for (const auto& [cap, pc] : mocks.providers) config.providers[cap] = pc;
  }
  if (!common.output.empty()) config.paths.output = common.output;
  if (common.parallelism > 0) config.parallelism = common.parallelism;
  return config;
}

void set_path(std::filesystem::path& dst, const std::string& value) {
  if (!value.empty()) dst = value;
}

void finish(const RunConfig& config, const StageOutcome& outcome) {
  const StageOutcome stages[] = {outcome};
  write_manifest(config, stages);
  for (const auto& note : outcome.notes) std::cerr << to_string(outcome.stage) << ": " << note << '\n';
  for (const auto& p : outcome.outputs) std::cout << p.generic_string() << '\n';
}

int fail(int code, const std::string& message) {
  std::cerr << "reframe-lab: " << message << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receptiveness reframing pipeline: ingest, generate, validate, analyze."};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Common common;

  auto* ingest = app.add_subcommand("ingest", "Filter a raw comment-reply corpus");
  add_common(ingest, common);
  std::string ingest_in, ingest_out;
  std::optional<std::size_t> max_words;
  std::optional<double> cutoff;
  std::vector<std::string> excluded, kept_subreddits;
  bool no_toxicity = false;
  ingest->add_option("--input", ingest_in, "Raw corpus (JSONL)");
  ingest->add_option("--output", ingest_out, "Filtered corpus (JSONL)");
  ingest->add_option("--max-words", max_words, "Maximum words in comment and reply");
  ingest->add_option("--toxicity-cutoff", cutoff, "Drop replies scoring above this");
  ingest->add_option("--exclude-subreddit", excluded, "Subreddit to drop (repeatable)");
  ingest->add_option("--keep-subreddit", kept_subreddits,
                     "Subreddit to keep even if excluded by default (repeatable)");
  ingest->add_flag("--no-toxicity", no_toxicity, "Skip the toxicity rule");

  auto* generate = app.add_subcommand("generate", "Generate reframes for the corpus");
  add_common(generate, common);
  std::string gen_corpus, gen_out, gen_kinds;
  generate->add_option("--corpus", gen_corpus, "Filtered corpus (JSONL)");
  generate->add_option("--out", gen_out, "Reframes file (JSONL); resumed when present");
  generate->add_option("--strategies", gen_kinds, "\"all\" or a comma-separated list");

  auto* validate = app.add_subcommand("validate", "Automatic meaning-preservation metrics");
  add_common(validate, common);
  std::string val_corpus, val_reframes;
  validate->add_option("--corpus", val_corpus, "Filtered corpus (JSONL)");
  validate->add_option("--reframes", val_reframes, "Reframes file (JSONL)");

  auto* trigrams = app.add_subcommand("trigrams", "Strategy-distinctive added trigrams");
  add_common(trigrams, common);
  std::string tri_corpus, tri_reframes;
  std::optional<std::size_t> top;
  trigrams->add_option("--corpus", tri_corpus, "Filtered corpus (JSONL)");
  trigrams->add_option("--reframes", tri_reframes, "Reframes file (JSONL)");
  trigrams->add_option("--top", top, "Trigrams listed per strategy (0 = all)");

  auto* score = app.add_subcommand("score-annotations", "Score annotation tables");
  add_common(score, common);
  std::string score_kind, score_in;
  score->add_option("--kind", score_kind, "receptiveness or reasonability")
      ->check(CLI::IsMember({"receptiveness", "reasonability"}));
  score->add_option("--input", score_in, "Annotation table (CSV or TSV)");

  auto* analyze = app.add_subcommand("analyze", "Fit the random-intercept models");
  add_common(analyze, common);
  std::string model_name, an_input, an_corpus;
  bool reml = false;
  analyze->add_option("--model", model_name, "receptiveness or toxicity-interaction")
      ->check(CLI::IsMember({"receptiveness", "toxicity-interaction"}));
  analyze->add_option("--annotations", an_input, "Receptiveness annotation table");
  analyze->add_option("--corpus", an_corpus, "Corpus with toxicity scores");
  analyze->add_flag("--reml", reml, "Restricted maximum likelihood");

  auto* report = app.add_subcommand("report", "Run pipeline stages and write all reports");
  add_common(report, common);
  std::vector<std::string> stage_names;
  report->add_option("--stages", stage_names, "Stages to run (default: all)")->delimiter(',');

  auto* strategies = app.add_subcommand("strategies", "Inspect the strategy registry");
  bool dump = false;
  strategies->add_flag("--dump", dump, "Print instructions and exemplars as JSON");
  strategies->add_option("--config", common.config, "Accepted for uniformity; unused");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (strategies->parsed()) {
      if (!dump) return fail(kExitConfig, "strategies: nothing to do (use --dump)");
      std::cout << registry_dump().dump(2) << '\n';
      return kExitOk;
    }

    RunConfig config = base_config(common);
    if (ingest->parsed()) {
      set_path(config.paths.raw_corpus, ingest_in);
      set_path(config.paths.corpus, ingest_out);
      if (max_words) config.filter.max_words = *max_words;
      if (cutoff) config.filter.toxicity_cutoff = *cutoff;
      if (!excluded.empty()) config.filter.excluded_subreddits = {excluded.begin(), excluded.end()};
      for (const auto& s : kept_subreddits) {
        std::erase_if(config.filter.excluded_subreddits, [&](const std::string& x) {
          return text::lowercase(x) == text::lowercase(s);
        });
      }
      if (no_toxicity) config.filter.apply_toxicity = false;
      finish(config, run_ingest(config));
    } else if (generate->parsed()) {
      set_path(config.paths.corpus, gen_corpus);
      set_path(config.paths.reframes, gen_out);
      if (!gen_kinds.empty()) config.strategies = parse_strategy_list(gen_kinds);
      finish(config, run_generate(config));
    } else if (validate->parsed()) {
      set_path(config.paths.corpus, val_corpus);
      set_path(config.paths.reframes, val_reframes);
      finish(config, run_validate(config));
    } else if (trigrams->parsed()) {
      set_path(config.paths.corpus, tri_corpus);
      set_path(config.paths.reframes, tri_reframes);
      if (top) config.trigram_top = *top;
      finish(config, run_trigrams(config));
    } else if (score->parsed()) {
      std::optional<AnnotationKind> kind;
      if (score_kind == "receptiveness") kind = AnnotationKind::receptiveness;
      if (score_kind == "reasonability") kind = AnnotationKind::reasonability;
      if (!score_in.empty()) {
        if (!kind) return fail(kExitConfig, "score-annotations: --input needs --kind");
        set_path(*kind == AnnotationKind::receptiveness ? config.paths.receptiveness
                                                        : config.paths.reasonability,
                 score_in);
      }
      finish(config, run_score(config, kind));
    } else if (analyze->parsed()) {
      std::optional<AnalysisModel> model;
      if (model_name == "receptiveness") model = AnalysisModel::receptiveness;
      if (model_name == "toxicity-interaction") model = AnalysisModel::toxicity_interaction;
      set_path(config.paths.receptiveness, an_input);
      set_path(config.paths.corpus, an_corpus);
      if (reml) config.reml = true;
      finish(config, run_analyze(config, model));
    } else if (report->parsed()) {
      std::vector<Stage> stages;
      if (stage_names.empty()) {
        stages.assign(kAllStages.begin(), kAllStages.end());
      } else {
        for (const auto& s : stage_names) stages.push_back(parse_stage(s));
      }
      const ReportBundle bundle = run_pipeline(config, stages);
      for (const auto& outcome : bundle.stages) {
        for (const auto& note : outcome.notes) {
          std::cerr << to_string(outcome.stage) << ": " << note << '\n';
        }
      }
      std::cout << bundle.manifest.generic_string() << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail(kExitConfig, std::string("config error: ") + e.what());
  } catch (const ProviderError& e) {
    return fail(kExitProvider, std::string("provider error (") + std::string(to_string(e.kind())) +
                                   "): " + e.what());
  } catch (const DataError& e) {
    return fail(kExitData, std::string("data error: ") + e.what());
  } catch (const std::exception& e) {
    return fail(1, std::string("error: ") + e.what());
  }
}

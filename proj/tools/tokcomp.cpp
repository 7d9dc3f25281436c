// tokcomp: command-line front end for generation, compression, evaluation,
// training and report rendering.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tokcomp/commands.hpp"

namespace {

template <typename T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& target,
                     const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tokcomp::cli;

  CLI::App app{"Graph-based token compression with contextual reinforcement"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic JSONL corpus");
  optional_option(gen_cmd, "--config,--spec", gen.spec_path, "Generator spec JSON");
  gen_cmd->add_option("--output,-o", gen.output, "Corpus output path")->required();
  optional_option(gen_cmd, "--seed", gen.seed, "Generator seed");
  optional_option(gen_cmd, "--docs", gen.n_docs, "Number of documents");
  optional_option(gen_cmd, "--multimodal", gen.multimodal, "Attach visual tokens (true/false)");
  gen_cmd->add_option("--threads", gen.threads, "Worker threads")->check(CLI::PositiveNumber);

  CompressArgs comp;
  auto* comp_cmd = app.add_subcommand("compress", "Compress every document of a corpus");
  comp_cmd->add_option("--input,-i", comp.input, "Input corpus (JSONL)")->required();
  optional_option(comp_cmd, "--config", comp.config_path, "Pipeline config JSON");
  comp_cmd->add_option("--output,-o", comp.output, "Result output path (JSONL)")->required();
  optional_option(comp_cmd, "--seed", comp.seed, "Run seed");
  optional_option(comp_cmd, "--budget", comp.budget, "Fixed keep ratio (rho); disables the controller");
  comp_cmd->add_flag("--fixed-budget", comp.fixed_budget, "Use the config's rho as a fixed budget");
  optional_option(comp_cmd, "--target-retention", comp.target_retention, "Controller retention target");
  comp_cmd->add_flag("--no-propagation", comp.no_propagation, "Ablation: base attention scores only");
  comp_cmd->add_flag("--no-coverage", comp.no_coverage, "Ablation: skip coverage repair");
  comp_cmd->add_flag("--no-alignment-constraint", comp.no_alignment_constraint,
                     "Ablation: disable the multimodal alignment floor");
  comp_cmd->add_flag("--scores", comp.with_scores, "Include per-token scores in the output");
  comp_cmd->add_option("--threads", comp.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Build a corpus report from compression results");
  eval_cmd->add_option("--input,-i", eval.input, "Input corpus (JSONL)")->required();
  eval_cmd->add_option("--compressed,-c", eval.compressed, "Compression results (JSONL)")->required();
  eval_cmd->add_option("--output,-o", eval.output, "Report JSON path")->required();
  optional_option(eval_cmd, "--config", eval.config_path, "Pipeline config JSON");
  optional_option(eval_cmd, "--csv", eval.csv_path, "Also write the report as CSV");
  optional_option(eval_cmd, "--markdown", eval.markdown_path, "Also write markdown tables");
  optional_option(eval_cmd, "--timings", eval.timings_manifest,
                  "Compress manifest to take stage timings from");
  eval_cmd->add_option("--bucket-width", eval.bucket_width, "Retention curve bucket width")
      ->check(CLI::PositiveNumber);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Curriculum hill-climb over pipeline tunables");
  train_cmd->add_option("--input,-i", tr.input, "Training corpus (JSONL)")->required();
  optional_option(train_cmd, "--config", tr.config_path, "Initial pipeline config JSON");
  train_cmd->add_option("--output,-o", tr.output, "Best config output (JSON)")->required();
  optional_option(train_cmd, "--history", tr.history_path, "Checkpoint history output (JSON)");
  optional_option(train_cmd, "--seed", tr.seed, "Proposal seed");
  train_cmd->add_option("--steps", tr.steps_per_bucket, "Steps per curriculum bucket")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--buckets", tr.buckets, "Curriculum buckets")->check(CLI::PositiveNumber);
  train_cmd->add_option("--threads", tr.threads, "Worker threads")->check(CLI::PositiveNumber);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Render a report JSON as tables");
  rep_cmd->add_option("--input,-i", rep.input, "Report JSON from evaluate")->required();
  rep_cmd->add_option("--output,-o", rep.output, "Rendered output path")->required();
  rep_cmd->add_option("--format", rep.format, "md or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*comp_cmd) return run_compress(comp);
    if (*eval_cmd) return run_evaluate(eval);
    if (*train_cmd) return run_train(tr);
    if (*rep_cmd) return run_report(rep);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const tokcomp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const tokcomp::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

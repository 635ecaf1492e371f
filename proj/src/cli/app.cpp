#include "aloe/cli/app.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <map>
#include <optional>
#include <ostream>

#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "aloe/builder/dataset_builder.hpp"
#include "aloe/cli/config.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/text.hpp"
#include "aloe/dialogue/tree.hpp"
#include "aloe/eval/evaluation.hpp"
#include "aloe/metrics/metrics.hpp"
#include "aloe/persona/persona.hpp"
#include "aloe/training/export.hpp"

namespace aloe::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string backend;
  bool verbose = false;

  // gen-personas
  std::optional<std::size_t> count;
  std::optional<int> max_iterations;
  // build-dataset
  std::optional<std::size_t> persona_limit;
  std::optional<int> max_turns;
  std::optional<int> parallelism;
  bool fresh = false;
  // export-sft
  std::string agent_mix;
  // evaluate
  std::string cases;
  std::string run_id = "eval";
  std::string model_label;
  // report
  std::string run_dir;
  std::string format = "table";
  // kappa
  std::string file_a;
  std::string file_b;
};

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void setup_logging(bool verbose) {
  auto logger = spdlog::get("aloe");
  if (!logger) logger = spdlog::stderr_color_mt("aloe");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

AppConfig resolve_config(const Options& o) {
  AppConfig cfg = o.config_path.empty() ? AppConfig::defaults() : load_config(o.config_path);
  if (o.seed) cfg.global_seed = *o.seed;
  if (!o.backend.empty()) cfg.set_backend(gateway::parse_backend_kind(o.backend));
  return cfg;
}

gateway::EndpointFactory make_factory(const AppConfig& cfg) {
  return gateway::EndpointFactory(cfg.seed_for("mock"), std::make_shared<gateway::SystemClock>());
}

int cmd_gen_personas(const Options& o, std::ostream& out) {
  AppConfig cfg = resolve_config(o);
  if (o.count) cfg.persona_count = *o.count;
  auto factory = make_factory(cfg);
  const auto gw = factory.gateway(cfg.providers, cfg.embedding);

  std::map<persona::PoolKind, persona::Pool> pools;
  for (auto kind : {persona::PoolKind::Profile, persona::PoolKind::Personality}) {
    const auto& settings = kind == persona::PoolKind::Profile ? cfg.profile_pool : cfg.personality_pool;
    const std::string name(persona::to_string(kind));
    persona::PoolConfig pc = settings.config;
    pc.seed_entries = persona::read_seed_file(settings.seed_file);
    pc.rng_seed = cfg.seed_for("pool/" + name);
    if (o.max_iterations) pc.max_iterations = *o.max_iterations;
    try {
      pc.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, "pool." + name + ": " + e.what());
    }
    const fs::path pool_path = cfg.paths.pools / (name + ".jsonl");
    fs::create_directories(cfg.paths.pools);
    spdlog::info("building {} pool from {} seeds", name, pc.seed_entries.size());
    auto result = persona::build_pool(gw, kind, pc, pool_path, [&](const persona::IterationStats& s) {
      out << fmt::format("{} iteration {}: generated {}, accepted {} ({:.1f}%), pool {}\n", name, s.iteration,
                         s.generated, s.accepted, 100.0 * s.accept_rate(), s.pool_size);
    });
    persona::write_pool(pool_path, result.pool);
    out << fmt::format("{} pool: {} entries -> {}\n", name, result.pool.size(), pool_path.string());
    pools.emplace(kind, std::move(result.pool));
  }

  const auto& profiles = pools.at(persona::PoolKind::Profile).entries();
  const auto& traits = pools.at(persona::PoolKind::Personality).entries();
  auto personas = persona::assemble_personas(profiles, traits, cfg.persona_count, cfg.seed_for("personas"));
  ensure_parent(cfg.paths.personas);
  persona::write_personas(cfg.paths.personas, personas);
  out << fmt::format("personas: {} -> {}\n", personas.size(), cfg.paths.personas.string());
  return kExitOk;
}

int cmd_build_dataset(const Options& o, std::ostream& out) {
  AppConfig cfg = resolve_config(o);
  builder::BuildJob job;
  job.personas = persona::read_personas(cfg.paths.personas);
  const std::size_t limit = o.persona_limit.value_or(cfg.build.persona_limit);
  if (limit > 0 && limit < job.personas.size()) job.personas.resize(limit);
  job.max_turns = o.max_turns.value_or(cfg.build.max_turns);
  job.parallelism = o.parallelism.value_or(cfg.build.parallelism);
  job.global_seed = cfg.seed_for("build");
  job.checkpoint_path = cfg.paths.dataset.string() + ".checkpoint";
  try {
    job.validate();
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::Data) throw Error(ErrorCode::ConfigError, e.what());
    throw;
  }
  ensure_parent(cfg.paths.dataset);
  if (o.fresh) fs::remove(job.checkpoint_path);

  auto factory = make_factory(cfg);
  const auto gw = factory.gateway(cfg.providers, cfg.embedding);
  builder::DatasetBuilder b(gw);
  spdlog::info("building {} conversations of {} turns with parallelism {}", job.personas.size(), job.max_turns,
               job.parallelism);
  const auto stats = b.run_batch(job, cfg.paths.dataset);
  out << fmt::format("conversations: {} completed, {} resumed, {} failed; {} turns -> {}\n", stats.completed,
                     stats.resumed, stats.failed, stats.turns_total, cfg.paths.dataset.string());
  if (stats.failed > 0) {
    throw Error(ErrorCode::ProviderExhausted,
                fmt::format("{} conversations failed ({}); rerun to resume from {}", stats.failed,
                            join(stats.failed_persona_ids, ", "), job.checkpoint_path.string()));
  }
  fs::remove(job.checkpoint_path);
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out, bool sft) {
  const AppConfig cfg = resolve_config(o);
  const auto trees = dialogue::read_dataset(cfg.paths.dataset);
  fs::create_directories(cfg.paths.exports);
  if (sft) {
    std::vector<training::SftRecord> mix;
    const fs::path mix_path = o.agent_mix.empty() ? cfg.agent_mix : fs::path(o.agent_mix);
    if (!mix_path.empty()) mix = training::read_agent_mix(mix_path);
    const auto records = training::export_sft(trees, mix, cfg.seed_for("export/agent-mix"));
    const fs::path path = cfg.paths.exports / "sft.jsonl";
    training::write_sft(path, records);
    out << fmt::format("sft records: {} ({} from {} trees, {} agent-mix) -> {}\n", records.size(),
                       records.size() - mix.size(), trees.size(), mix.size(), path.string());
  } else {
    const auto records = training::export_dpo(trees);
    const fs::path path = cfg.paths.exports / "dpo.jsonl";
    training::write_dpo(path, records);
    out << fmt::format("dpo records: {} from {} trees -> {}\n", records.size(), trees.size(), path.string());
  }
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const AppConfig cfg = resolve_config(o);
  const auto cases = eval::read_cases(o.cases.empty() ? cfg.eval.cases : fs::path(o.cases));
  auto factory = make_factory(cfg);
  const auto gw = factory.gateway(cfg.providers, cfg.embedding);
  const auto evaluated = factory.chat(cfg.evaluated);

  eval::EvalOptions opts;
  opts.max_turns = o.max_turns.value_or(cfg.eval.max_turns);
  opts.parallelism = o.parallelism.value_or(cfg.eval.parallelism);
  opts.seed = cfg.seed_for("eval");
  opts.run_id = o.run_id;
  opts.model_label = o.model_label.empty() ? cfg.eval.model_label : o.model_label;
  opts.evaluated_sampling = cfg.eval.sampling;
  // Wall-clock stamps would break byte-identical mock reruns.
  opts.record_timestamps = cfg.evaluated.backend == gateway::BackendKind::Http;
  if (opts.max_turns < 2) throw Error(ErrorCode::ConfigError, "evaluation needs at least two turns");

  const fs::path dir = cfg.paths.runs / o.run_id;
  fs::create_directories(dir);
  opts.ledger_path = dir / "ratings.ledger.jsonl";
  fs::remove(opts.ledger_path);

  eval::Evaluator evaluator(gw, evaluated);
  spdlog::info("evaluating {} cases, {} turns each", cases.size(), opts.max_turns);
  const auto run = evaluator.run(cases, opts);
  eval::write_run(dir, run);
  fs::remove(opts.ledger_path);
  out << fmt::format("run {}: {} completed, {} failed -> {}\n", run.run_id, run.completed(), run.failed(),
                     dir.string());
  out << eval::render(eval::build_report(run), eval::RenderFormat::Table);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto format = eval::parse_render_format(o.format);
  const auto run = eval::read_run(o.run_dir);
  out << eval::render(eval::build_report(run), format);
  return kExitOk;
}

int cmd_kappa(const Options& o, std::ostream& out) {
  const auto a = read_rating_vector(o.file_a);
  const auto b = read_rating_vector(o.file_b);
  out << fmt::format("{:.3f}\n", metrics::cohen_kappa(a, b));
  return kExitOk;
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Provider: return kExitProvider;
    case ErrorCategory::Data: return kExitData;
  }
  return kExitData;
}

std::vector<int> read_rating_vector(const fs::path& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<int> out;
  if (first != std::string::npos && text[first] == '{') {
    for (const auto& [lineno, line] : read_nonblank_lines(path)) {
      try {
        const json j = json::parse(line);
        if (j.value("status", std::string("completed")) != "completed") continue;
        for (int v : j.at("ratings").get<std::vector<int>>()) out.push_back(v);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == ',' || std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
    const std::size_t end = static_cast<std::size_t>(ptr - text.data());
    const bool delimited = end == text.size() || text[end] == ',' || std::isspace(static_cast<unsigned char>(text[end]));
    if (ec != std::errc() || !delimited)
      throw Error(ErrorCode::SchemaViolation, path.string() + ": expected integer ratings near offset " + std::to_string(i));
    out.push_back(v);
    i = end;
  }
  return out;
}

int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Persona-aligned preference data pipeline and benchmark", "aloe"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Override global_seed");
  app.add_option("--backend", o.backend, "Force every provider onto one backend")->check(CLI::IsMember({"http", "mock"}));
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");

  auto* gen = app.add_subcommand("gen-personas", "Grow both persona pools and assemble personas");
  gen->add_option("--count", o.count, "Number of personas to assemble");
  gen->add_option("--max-iterations", o.max_iterations, "Cap on generation iterations per pool");

  auto* build = app.add_subcommand("build-dataset", "Simulate conversations and write the tree dataset");
  build->add_option("--personas", o.persona_limit, "Use only the first N personas");
  build->add_option("--max-turns", o.max_turns, "Turns per conversation");
  build->add_option("--parallelism", o.parallelism, "Concurrent conversations");
  build->add_flag("--fresh", o.fresh, "Ignore and discard an existing checkpoint");

  auto* sft = app.add_subcommand("export-sft", "Write SFT records from the dataset");
  sft->add_option("--agent-mix", o.agent_mix, "Messages-format JSONL to mix in")->check(CLI::ExistingFile);

  auto* dpo = app.add_subcommand("export-dpo", "Write DPO pairs from the dataset");

  auto* evaluate = app.add_subcommand("evaluate", "Run the benchmark against the evaluated endpoint");
  evaluate->add_option("--cases", o.cases, "Cases JSONL")->check(CLI::ExistingFile);
  evaluate->add_option("--run-id", o.run_id, "Run directory name under paths.runs");
  evaluate->add_option("--label", o.model_label, "Model label for the report");
  evaluate->add_option("--max-turns", o.max_turns, "Turns per case");
  evaluate->add_option("--parallelism", o.parallelism, "Concurrent cases");

  auto* report = app.add_subcommand("report", "Render the report of a finished run");
  report->add_option("run_dir", o.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", o.format, "table, csv or plotdata")->check(CLI::IsMember({"table", "csv", "plotdata"}));

  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two rating files");
  kappa->add_option("file_a", o.file_a, "First rater")->required()->check(CLI::ExistingFile);
  kappa->add_option("file_b", o.file_b, "Second rater")->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitConfig;
  }

  setup_logging(o.verbose);
  try {
    if (*gen) return cmd_gen_personas(o, out);
    if (*build) return cmd_build_dataset(o, out);
    if (*sft) return cmd_export(o, out, true);
    if (*dpo) return cmd_export(o, out, false);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*report) return cmd_report(o, out);
    if (*kappa) return cmd_kappa(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace aloe::cli

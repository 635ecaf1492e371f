#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aloe/gateway/gateway.hpp"
#include "aloe/metrics/metrics.hpp"
#include "aloe/persona/persona.hpp"

namespace aloe::eval {

struct EvalCase {
  std::string case_id;
  persona::Persona persona;
  bool verified = false;
};

// Line-delimited {case_id, profile_text, personality_text, verified}.
// Throws SchemaViolation on bad lines, empty texts or duplicate ids.
std::vector<EvalCase> read_cases(const std::filesystem::path& path);

enum class CaseStatus { Completed, Failed };

std::string_view to_string(CaseStatus s);

struct CaseResult {
  std::string case_id;
  CaseStatus status = CaseStatus::Completed;
  // The conversation as the evaluated model saw it.
  gateway::History transcript;
  std::vector<int> ratings;
  std::string error;
};

struct EvalRun {
  std::string run_id;
  std::string model_label;
  int max_turns = 10;
  std::uint64_t seed = 0;
  std::vector<CaseResult> results;  // case-file order
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;

  std::size_t completed() const;
  std::size_t failed() const;
};

struct EvalOptions {
  int max_turns = 10;
  int parallelism = 1;
  std::uint64_t seed = 0;
  std::string run_id = "run";
  std::string model_label = "model";
  gateway::Sampling evaluated_sampling{0.7, 512};
  bool record_timestamps = true;
  // When set, each finished case is appended here as a ratings line.
  std::filesystem::path ledger_path;
};

// Strict pass: the whole reply is one digit 1..5. Lenient pass: the first
// integer in the text that lies in 1..5.
std::optional<int> parse_rating(std::string_view completion);

class Evaluator {
 public:
  // `judge_side` supplies the role-play and judge roles; `evaluated` is the
  // model under test and only ever sees the conversation itself.
  Evaluator(const gateway::Gateway& judge_side, std::shared_ptr<const gateway::ChatEndpoint> evaluated);

  // One re-ask on an unparseable reply, then RatingParseFailure.
  int judge_rate(const persona::Persona& persona, const std::string& user_message, const std::string& response,
                 std::uint64_t salt = 0) const;

  // Throws on the first failure; EndpointFailure for the evaluated model.
  CaseResult run_case(const EvalCase& c, int max_turns, std::uint64_t seed,
                      const gateway::Sampling& evaluated_sampling = {0.7, 512}) const;

  // Failed cases are recorded and the run continues.
  EvalRun run(const std::vector<EvalCase>& cases, const EvalOptions& options) const;

 private:
  const gateway::Gateway& gw_;
  std::shared_ptr<const gateway::ChatEndpoint> evaluated_;
};

nlohmann::json to_json(const CaseResult& r, bool with_transcript);

// transcripts.jsonl, ratings.jsonl and run.json under `dir`.
void write_run(const std::filesystem::path& dir, const EvalRun& run);
EvalRun read_run(const std::filesystem::path& dir);

struct Report {
  std::string model_label;
  metrics::AlignmentCurve al_by_turn;
  double average_al = 0.0;
  metrics::RegressionFit ir;
  metrics::RegressionFit n_ir;
  std::vector<double> n_al;
  std::vector<std::string> failed_case_ids;
};

// Completed cases only. Throws NoCompletedCases, and SchemaViolation when a
// completed case does not carry exactly max_turns ratings.
Report build_report(const EvalRun& run);
Report build_report(const std::vector<metrics::CaseScores>& completed, int max_turns,
                    std::vector<std::string> failed_case_ids = {}, std::string model_label = "model");

enum class RenderFormat { Table, Csv, PlotData };

RenderFormat parse_render_format(std::string_view s);

std::string render(const Report& report, RenderFormat format);

}  // namespace aloe::eval

#include "aloe/eval/evaluation.hpp"

#include <cctype>
#include <chrono>
#include <ctime>
#include <map>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "aloe/builder/dataset_builder.hpp"
#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"
#include "aloe/common/text.hpp"

namespace aloe::eval {

namespace {

using gateway::ChatMessage;
using gateway::History;
using gateway::RoleId;
namespace b = gateway::binding;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<int> strict_rating(std::string_view text) {
  std::string t = trim(text);
  if (!t.empty() && t.back() == '.') t.pop_back();
  if (t.size() == 1 && t[0] >= '0' + metrics::kMinRating && t[0] <= '0' + metrics::kMaxRating) return t[0] - '0';
  return std::nullopt;
}

std::optional<int> first_in_range(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    // "4.5" is not a bare integer; skip the whole number.
    const bool fractional = j + 1 < text.size() && text[j] == '.' &&
                            std::isdigit(static_cast<unsigned char>(text[j + 1]));
    if (!fractional && j - i <= 2) {
      const int v = std::stoi(std::string(text.substr(i, j - i)));
      if (v >= metrics::kMinRating && v <= metrics::kMaxRating) return v;
    }
    while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
    i = j;
  }
  return std::nullopt;
}

// Display width of a UTF-8 string, one column per code point.
std::size_t columns(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad_left(std::string_view s, std::size_t width) {
  const std::size_t w = columns(s);
  return std::string(w < width ? width - w : 0, ' ') + std::string(s);
}

std::string pad_right(std::string_view s, std::size_t width) {
  const std::size_t w = columns(s);
  return std::string(s) + std::string(w < width ? width - w : 0, ' ');
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

std::vector<EvalCase> read_cases(const std::filesystem::path& path) {
  std::vector<EvalCase> out;
  std::set<std::string> seen;
  for (const auto& [lineno, line] : read_nonblank_lines(path)) {
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    json doc = json::parse(line, nullptr, false);
    if (!doc.is_object()) throw Error(ErrorCode::SchemaViolation, where + "expected a JSON object");
    EvalCase c;
    try {
      c.case_id = doc.at("case_id").get<std::string>();
      c.persona.profile_text = doc.at("profile_text").get<std::string>();
      c.persona.personality_text = doc.at("personality_text").get<std::string>();
      c.verified = doc.value("verified", false);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, where + e.what());
    }
    if (c.case_id.empty() || trim(c.persona.profile_text).empty() || trim(c.persona.personality_text).empty())
      throw Error(ErrorCode::SchemaViolation, where + "case_id, profile_text and personality_text must be non-empty");
    if (!seen.insert(c.case_id).second) throw Error(ErrorCode::SchemaViolation, where + "duplicate case_id " + c.case_id);
    c.persona.persona_id = c.case_id;
    c.persona.profile_id = c.case_id + "/profile";
    c.persona.personality_id = c.case_id + "/personality";
    out.push_back(std::move(c));
  }
  return out;
}

std::string_view to_string(CaseStatus s) { return s == CaseStatus::Completed ? "completed" : "failed"; }

std::size_t EvalRun::completed() const {
  std::size_t n = 0;
  for (const auto& r : results) n += r.status == CaseStatus::Completed;
  return n;
}

std::size_t EvalRun::failed() const { return results.size() - completed(); }

std::optional<int> parse_rating(std::string_view completion) {
  if (auto v = strict_rating(completion)) return v;
  return first_in_range(completion);
}

Evaluator::Evaluator(const gateway::Gateway& judge_side, std::shared_ptr<const gateway::ChatEndpoint> evaluated)
    : gw_(judge_side), evaluated_(std::move(evaluated)) {
  if (!evaluated_) throw Error(ErrorCode::ConfigError, "evaluator needs an evaluated endpoint");
}

int Evaluator::judge_rate(const persona::Persona& persona, const std::string& user_message,
                          const std::string& response, std::uint64_t salt) const {
  if (trim(user_message).empty() || trim(response).empty())
    throw Error(ErrorCode::InvalidArgument, "judge needs a non-empty message and response");
  gateway::Bindings bindings = builder::persona_bindings(persona);
  bindings[std::string(b::kUserMessage)] = user_message;
  bindings[std::string(b::kModelResponse)] = response;
  const std::string first = gw_.complete(RoleId::Judge, bindings, {}, salt);
  if (auto v = parse_rating(first)) return *v;
  spdlog::debug("judge reply \"{}\" unparseable, re-asking", first);
  const std::string second = gw_.complete_reask(RoleId::Judge, bindings, {}, first, gateway::kJudgeReask, salt);
  if (auto v = parse_rating(second)) return *v;
  throw Error(ErrorCode::RatingParseFailure, "judge replies \"" + first + "\" and \"" + second + "\" carry no 1-5 score");
}

CaseResult Evaluator::run_case(const EvalCase& c, int max_turns, std::uint64_t seed,
                               const gateway::Sampling& evaluated_sampling) const {
  if (max_turns < 1) throw Error(ErrorCode::InvalidArgument, "max_turns must be >= 1");
  CaseResult result;
  result.case_id = c.case_id;
  const std::uint64_t case_seed = derive_seed(seed, c.case_id);
  const auto persona_in = builder::persona_bindings(c.persona);
  for (int k = 1; k <= max_turns; ++k) {
    const std::uint64_t salt = derive_seed(case_seed, "turn/" + std::to_string(k));
    const std::string message = strip_trailing_newlines(
        gw_.complete(RoleId::RolePlay, persona_in, builder::as_role_player(result.transcript), salt));
    result.transcript.push_back(ChatMessage::user(message));

    gateway::ChatRequest request;
    request.messages = result.transcript;
    request.model = evaluated_->config().model_name;
    request.sampling = evaluated_sampling;
    request.salt = salt;
    std::string response;
    try {
      response = strip_trailing_newlines(evaluated_->complete(request));
    } catch (const Error& e) {
      throw Error(ErrorCode::EndpointFailure, "case " + c.case_id + " turn " + std::to_string(k) + ": " + e.what());
    }
    result.transcript.push_back(ChatMessage::assistant(response));
    result.ratings.push_back(judge_rate(c.persona, message, response, salt));
  }
  return result;
}

EvalRun Evaluator::run(const std::vector<EvalCase>& cases, const EvalOptions& options) const {
  if (options.parallelism < 1) throw Error(ErrorCode::ConfigError, "parallelism must be >= 1");
  EvalRun run;
  run.run_id = options.run_id;
  run.model_label = options.model_label;
  run.max_turns = options.max_turns;
  run.seed = options.seed;
  if (options.record_timestamps) run.started_at = utc_now();
  run.results.resize(cases.size());

  std::unique_ptr<LineAppender> ledger;
  if (!options.ledger_path.empty()) ledger = std::make_unique<LineAppender>(options.ledger_path);

  const auto n = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for schedule(dynamic) num_threads(options.parallelism)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& c = cases[static_cast<std::size_t>(i)];
    CaseResult r;
    try {
      r = run_case(c, options.max_turns, options.seed, options.evaluated_sampling);
    } catch (const std::exception& e) {
      r = CaseResult{};
      r.case_id = c.case_id;
      r.status = CaseStatus::Failed;
      r.error = e.what();
      spdlog::warn("case {} failed: {}", c.case_id, e.what());
    }
    if (ledger) ledger->append(to_json(r, false).dump());
    run.results[static_cast<std::size_t>(i)] = std::move(r);
  }

  if (options.record_timestamps) run.finished_at = utc_now();
  return run;
}

json to_json(const CaseResult& r, bool with_transcript) {
  json j{{"case_id", r.case_id}, {"status", to_string(r.status)}, {"ratings", r.ratings}};
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  if (with_transcript) {
    json messages = json::array();
    for (const auto& m : r.transcript)
      messages.push_back({{"role", gateway::to_string(m.role())}, {"content", m.content()}});
    j["messages"] = std::move(messages);
  }
  return j;
}

void write_run(const std::filesystem::path& dir, const EvalRun& run) {
  std::filesystem::create_directories(dir);
  std::vector<json> transcripts;
  std::vector<json> ratings;
  for (const auto& r : run.results) {
    json t{{"case_id", r.case_id}, {"messages", to_json(r, true)["messages"]}};
    transcripts.push_back(std::move(t));
    ratings.push_back(to_json(r, false));
  }
  write_file_atomic(dir / "transcripts.jsonl", to_jsonl(transcripts));
  write_file_atomic(dir / "ratings.jsonl", to_jsonl(ratings));
  json meta{{"v", 1},
            {"run_id", run.run_id},
            {"model_label", run.model_label},
            {"max_turns", run.max_turns},
            {"seed", run.seed},
            {"cases", run.results.size()},
            {"completed", run.completed()},
            {"failed", run.failed()},
            {"started_at", optional_string(run.started_at)},
            {"finished_at", optional_string(run.finished_at)}};
  write_file_atomic(dir / "run.json", meta.dump(2) + "\n");
}

EvalRun read_run(const std::filesystem::path& dir) {
  EvalRun run;
  try {
    const json meta = json::parse(read_file(dir / "run.json"));
    run.run_id = meta.at("run_id").get<std::string>();
    run.model_label = meta.at("model_label").get<std::string>();
    run.max_turns = meta.at("max_turns").get<int>();
    run.seed = meta.value("seed", std::uint64_t{0});
    if (meta.contains("started_at") && meta["started_at"].is_string()) run.started_at = meta["started_at"];
    if (meta.contains("finished_at") && meta["finished_at"].is_string()) run.finished_at = meta["finished_at"];
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, (dir / "run.json").string() + ": " + e.what());
  }

  const auto ratings_path = dir / "ratings.jsonl";
  for (const auto& [lineno, line] : read_nonblank_lines(ratings_path)) {
    const std::string where = ratings_path.string() + ":" + std::to_string(lineno) + ": ";
    CaseResult r;
    try {
      const json j = json::parse(line);
      r.case_id = j.at("case_id").get<std::string>();
      const auto status = j.at("status").get<std::string>();
      if (status == "completed") r.status = CaseStatus::Completed;
      else if (status == "failed") r.status = CaseStatus::Failed;
      else throw Error(ErrorCode::SchemaViolation, where + "unknown status " + status);
      r.ratings = j.at("ratings").get<std::vector<int>>();
      if (j.contains("error") && j["error"].is_string()) r.error = j["error"];
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, where + e.what());
    }
    run.results.push_back(std::move(r));
  }

  const auto transcripts_path = dir / "transcripts.jsonl";
  if (std::filesystem::exists(transcripts_path)) {
    std::map<std::string, History> by_case;
    for (const auto& [lineno, line] : read_nonblank_lines(transcripts_path)) {
      try {
        const json j = json::parse(line);
        History h;
        for (const auto& m : j.at("messages"))
          h.emplace_back(gateway::parse_message_role(m.at("role").get<std::string>()), m.at("content").get<std::string>());
        by_case[j.at("case_id").get<std::string>()] = std::move(h);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, transcripts_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    for (auto& r : run.results) {
      if (auto it = by_case.find(r.case_id); it != by_case.end()) r.transcript = std::move(it->second);
    }
  }
  return run;
}

Report build_report(const EvalRun& run) {
  std::vector<metrics::CaseScores> completed;
  std::vector<std::string> failed;
  for (const auto& r : run.results) {
    if (r.status == CaseStatus::Completed) completed.push_back({r.case_id, r.ratings});
    else failed.push_back(r.case_id);
  }
  return build_report(completed, run.max_turns, std::move(failed), run.model_label);
}

Report build_report(const std::vector<metrics::CaseScores>& completed, int max_turns,
                    std::vector<std::string> failed_case_ids, std::string model_label) {
  if (completed.empty()) throw Error(ErrorCode::NoCompletedCases, "no completed cases to report on");
  if (max_turns < 2) throw Error(ErrorCode::InvalidArgument, "a report needs at least two turns");
  for (const auto& c : completed) {
    if (c.ratings.size() != static_cast<std::size_t>(max_turns))
      throw Error(ErrorCode::SchemaViolation, "case " + c.case_id + " has " + std::to_string(c.ratings.size()) +
                                                  " ratings, expected " + std::to_string(max_turns));
  }
  Report report;
  report.model_label = std::move(model_label);
  report.al_by_turn = metrics::alignment_curve(completed, max_turns);
  report.average_al = metrics::mean(report.al_by_turn.values);
  report.ir = metrics::fit_ir(report.al_by_turn);
  report.n_al = metrics::normalize_al(report.al_by_turn.values);
  report.n_ir = metrics::fit_ir(report.n_al);
  report.failed_case_ids = std::move(failed_case_ids);
  return report;
}

RenderFormat parse_render_format(std::string_view s) {
  if (s == "table") return RenderFormat::Table;
  if (s == "csv") return RenderFormat::Csv;
  if (s == "plotdata") return RenderFormat::PlotData;
  throw Error(ErrorCode::ConfigError, "unknown report format \"" + std::string(s) + "\" (table, csv, plotdata)");
}

std::string render(const Report& report, RenderFormat format) {
  const auto& al = report.al_by_turn.values;
  std::string out;
  switch (format) {
    case RenderFormat::Table: {
      const std::size_t name_w = std::max<std::size_t>(5, columns(report.model_label));
      std::vector<std::string> header{pad_right("Model", name_w)};
      std::vector<std::string> row{pad_right(report.model_label, name_w)};
      for (std::size_t k = 1; k <= al.size(); ++k) {
        header.push_back(pad_left(std::to_string(k), 5));
        row.push_back(pad_left(fmt::format("{:.2f}", al[k - 1]), 5));
      }
      const std::pair<const char*, double> tail[] = {{"Average", report.average_al},
                                                     {"IR", report.ir.slope},
                                                     {"N-IR", report.n_ir.slope},
                                                     {"R²", report.ir.r_squared},
                                                     {"N-R²", report.n_ir.r_squared}};
      for (const auto& [name, value] : tail) {
        header.push_back(pad_left(name, 7));
        row.push_back(pad_left(fmt::format("{:.3f}", value), 7));
      }
      out = join(header, " ") + "\n" + join(row, " ") + "\n";
      out += fmt::format("cases: {} completed, {} failed", report.al_by_turn.case_count, report.failed_case_ids.size());
      if (!report.failed_case_ids.empty()) out += " (" + join(report.failed_case_ids, ", ") + ")";
      out += "\n";
      break;
    }
    case RenderFormat::Csv: {
      out = "row,al,n_al,slope,intercept,r_squared\n";
      for (std::size_t k = 1; k <= al.size(); ++k)
        out += fmt::format("{},{:.6f},{:.6f},,,\n", k, al[k - 1], report.n_al[k - 1]);
      out += fmt::format("fit,{:.6f},,{:.6f},{:.6f},{:.6f}\n", report.average_al, report.ir.slope,
                         report.ir.intercept, report.ir.r_squared);
      out += fmt::format("n_fit,,{:.6f},{:.6f},{:.6f},{:.6f}\n", metrics::mean(report.n_al), report.n_ir.slope,
                         report.n_ir.intercept, report.n_ir.r_squared);
      break;
    }
    case RenderFormat::PlotData: {
      out = "# k al fitted\n";
      for (std::size_t k = 1; k <= al.size(); ++k)
        out += fmt::format("{} {:.6f} {:.6f}\n", k, al[k - 1], report.ir.predict(static_cast<double>(k)));
      break;
    }
  }
  return out;
}

}  // namespace aloe::eval

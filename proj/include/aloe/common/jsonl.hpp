#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aloe {

using json = nlohmann::json;

// Non-blank lines of a file as (1-based line number, raw text) pairs.
std::vector<std::pair<std::size_t, std::string>> read_nonblank_lines(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Serializes one record per line, "\n"-terminated.
std::string to_jsonl(const std::vector<json>& rows);

// Append-only line writer; each append lands as one complete line and is
// flushed before returning. Safe for concurrent appenders.
class LineAppender {
 public:
  explicit LineAppender(const std::filesystem::path& path);

  void append(const std::string& line);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace aloe

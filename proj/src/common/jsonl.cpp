#include "aloe/common/jsonl.hpp"

#include <sstream>

#include "aloe/common/error.hpp"
#include "aloe/common/text.hpp"

namespace aloe {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::size_t, std::string>> read_nonblank_lines(const fs::path& path) {
  const std::string contents = read_file(path);
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t lineno = 0;
  for (auto& line : split_lines(contents)) {
    ++lineno;
    if (trim(line).empty()) continue;
    out.emplace_back(lineno, std::move(line));
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

LineAppender::LineAppender(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for append");
}

void LineAppender::append(const std::string& line) {
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "append failed");
}

}  // namespace aloe

#pragma once

// JobSet file formats.
//
// Line-oriented text ("msmr-jobset 1"):
//
//   msmr-jobset 1
//   stages 3
//   pool 0 0 1        # stage 0 offers resources 0 and 1
//   pool 1 0
//   pool 2 0 1
//   job 0 0 35 proc 10 1 10 map 0 0 0
//     (job <id> <arrival> <deadline> proc <P_0..P_N-1> map <R_0..R_N-1>)
//
// '#' starts a comment; blank lines are ignored. The writer emits exactly the
// layout above with single spaces, so write(read(write(x))) is byte-identical.
//
// JSON:
//
//   {"format": "msmr-jobset", "version": 1,
//    "pipeline": {"stages": [[0, 1], [0], [0, 1]]},
//    "jobs": [{"id": 0, "arrival": 0, "deadline": 35,
//              "proc": [10, 1, 10], "mapping": [0, 0, 0]}]}

#include <cctype>
#include <charconv>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "msmr/model.hpp"

namespace msmr::io {

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

inline constexpr std::string_view kTextMagic = "msmr-jobset";
inline constexpr int kFormatVersion = 1;

inline void write_text(std::ostream& os, const JobSet& js) {
  os << kTextMagic << ' ' << kFormatVersion << '\n';
  os << "stages " << js.num_stages() << '\n';
  for (std::size_t j = 0; j < js.num_stages(); ++j) {
    os << "pool " << j;
    for (ResourceId r : js.pipeline().pools[j]) os << ' ' << r;
    os << '\n';
  }
  for (const Job& job : js.jobs()) {
    os << "job " << job.id << ' ' << job.arrival << ' ' << job.deadline << " proc";
    for (Time p : job.proc) os << ' ' << p;
    os << " map";
    for (ResourceId r : job.mapping) os << ' ' << r;
    os << '\n';
  }
}

inline std::string to_text(const JobSet& js) {
  std::ostringstream os;
  write_text(os, js);
  return os.str();
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

template <typename T>
T number(const Token& tok, std::size_t line) {
  T value{};
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(line, tok.column,
                     "expected a non-negative integer, got '" + std::string(tok.text) + "'");
  return value;
}

}  // namespace detail

inline JobSet read_text(std::istream& is) {
  using detail::number;
  std::string raw;
  std::size_t line_no = 0;
  bool have_magic = false;
  std::size_t n_stages = 0;
  Pipeline pipeline;
  std::vector<bool> pool_seen;
  std::vector<Job> jobs;

  while (std::getline(is, raw)) {
    ++line_no;
    const auto toks = detail::tokenize(raw);
    if (toks.empty()) continue;
    const std::string_view head = toks[0].text;
    auto expect_count = [&](std::size_t n) {
      if (toks.size() < n)
        throw ParseError(line_no, raw.size() + 1, "unexpected end of line");
      if (toks.size() > n)
        throw ParseError(line_no, toks[n].column, "unexpected token '" +
                                                      std::string(toks[n].text) + "'");
    };

    if (!have_magic) {
      if (head != kTextMagic)
        throw ParseError(line_no, toks[0].column, "expected '" + std::string(kTextMagic) + "'");
      expect_count(2);
      if (number<int>(toks[1], line_no) != kFormatVersion)
        throw ParseError(line_no, toks[1].column, "unsupported format version");
      have_magic = true;
    } else if (head == "stages") {
      expect_count(2);
      if (n_stages != 0) throw ParseError(line_no, toks[0].column, "duplicate 'stages' line");
      n_stages = number<std::size_t>(toks[1], line_no);
      if (n_stages == 0) throw ParseError(line_no, toks[1].column, "need at least one stage");
      pipeline.pools.assign(n_stages, {});
      pool_seen.assign(n_stages, false);
    } else if (head == "pool") {
      if (n_stages == 0) throw ParseError(line_no, toks[0].column, "'pool' before 'stages'");
      if (toks.size() < 3) throw ParseError(line_no, raw.size() + 1, "pool needs resources");
      const auto j = number<std::size_t>(toks[1], line_no);
      if (j >= n_stages) throw ParseError(line_no, toks[1].column, "stage out of range");
      if (pool_seen[j]) throw ParseError(line_no, toks[1].column, "duplicate pool for stage");
      pool_seen[j] = true;
      for (std::size_t t = 2; t < toks.size(); ++t)
        pipeline.pools[j].push_back(number<ResourceId>(toks[t], line_no));
    } else if (head == "job") {
      if (n_stages == 0) throw ParseError(line_no, toks[0].column, "'job' before 'stages'");
      expect_count(4 + 2 * (n_stages + 1));
      Job job;
      job.id = number<JobId>(toks[1], line_no);
      if (job.id != jobs.size())
        throw ParseError(line_no, toks[1].column,
                         "expected job id " + std::to_string(jobs.size()));
      job.arrival = number<Time>(toks[2], line_no);
      job.deadline = number<Time>(toks[3], line_no);
      if (toks[4].text != "proc") throw ParseError(line_no, toks[4].column, "expected 'proc'");
      for (std::size_t j = 0; j < n_stages; ++j)
        job.proc.push_back(number<Time>(toks[5 + j], line_no));
      const std::size_t map_at = 5 + n_stages;
      if (toks[map_at].text != "map")
        throw ParseError(line_no, toks[map_at].column, "expected 'map'");
      for (std::size_t j = 0; j < n_stages; ++j)
        job.mapping.push_back(number<ResourceId>(toks[map_at + 1 + j], line_no));
      jobs.push_back(std::move(job));
    } else {
      throw ParseError(line_no, toks[0].column, "unknown record '" + std::string(head) + "'");
    }
  }
  if (!have_magic) throw ParseError(line_no + 1, 1, "empty input");
  if (n_stages == 0) throw ParseError(line_no + 1, 1, "missing 'stages' line");
  for (std::size_t j = 0; j < n_stages; ++j)
    if (!pool_seen[j]) throw ParseError(line_no + 1, 1, "missing pool for stage " + std::to_string(j));
  try {
    return JobSet(std::move(pipeline), std::move(jobs));
  } catch (const ModelError& e) {
    throw ParseError(line_no + 1, 1, e.what());
  }
}

inline JobSet from_text(const std::string& text) {
  std::istringstream is(text);
  return read_text(is);
}

inline nlohmann::json to_json(const JobSet& js) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& pool : js.pipeline().pools) stages.push_back(pool);
  nlohmann::json jobs = nlohmann::json::array();
  for (const Job& job : js.jobs())
    jobs.push_back({{"id", job.id},
                    {"arrival", job.arrival},
                    {"deadline", job.deadline},
                    {"proc", job.proc},
                    {"mapping", job.mapping}});
  return {{"format", kTextMagic},
          {"version", kFormatVersion},
          {"pipeline", {{"stages", stages}}},
          {"jobs", jobs}};
}

/// JSON text with two-space indentation and a trailing newline.
inline std::string to_json_text(const JobSet& js) { return to_json(js).dump(2) + "\n"; }

inline JobSet from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kTextMagic)
      throw ParseError(1, 1, "not an msmr-jobset document");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw ParseError(1, 1, "unsupported format version");
    Pipeline pipeline;
    for (const auto& pool : doc.at("pipeline").at("stages"))
      pipeline.pools.push_back(pool.get<std::vector<ResourceId>>());
    std::vector<Job> jobs;
    for (const auto& rec : doc.at("jobs")) {
      Job job;
      job.id = rec.at("id").get<JobId>();
      job.arrival = rec.at("arrival").get<Time>();
      job.deadline = rec.at("deadline").get<Time>();
      job.proc = rec.at("proc").get<std::vector<Time>>();
      job.mapping = rec.at("mapping").get<std::vector<ResourceId>>();
      jobs.push_back(std::move(job));
    }
    return JobSet(std::move(pipeline), std::move(jobs));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, 1, e.what());
  } catch (const ModelError& e) {
    throw ParseError(1, 1, e.what());
  }
}

/// Parses JSON text; syntax errors report the line and column of the failure.
inline JobSet from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t p = 0; p + 1 < e.byte && p < text.size(); ++p) {
      if (text[p] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, e.what());
  }
  return from_json(doc);
}

/// Reads either format, deciding by the first non-blank character.
inline JobSet parse_any(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return from_json_text(text);
  return from_text(text);
}

}  // namespace msmr::io

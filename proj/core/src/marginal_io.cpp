#include "vmot/marginal_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vmot/error.hpp"

namespace vmot {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kInvalidMarginal,
                "csv line " + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

DiscreteMarginal parse_marginal_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidMarginal, std::string("marginal json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("points") || !j.contains("weights")) {
    throw Error(ErrorKind::kInvalidMarginal,
                "marginal json needs \"points\" and \"weights\" arrays");
  }
  try {
    return DiscreteMarginal(j.at("points").get<std::vector<double>>(),
                            j.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidMarginal, std::string("marginal json: ") + e.what());
  }
}

DiscreteMarginal parse_marginal_csv(std::string_view text) {
  std::vector<double> points;
  std::vector<double> weights;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorKind::kInvalidMarginal,
                  "csv line " + std::to_string(line_no) + ": expected point,weight");
    }
    points.push_back(parse_number(line.substr(0, comma), line_no));
    weights.push_back(parse_number(line.substr(comma + 1), line_no));
  }
  if (!header_seen) throw Error(ErrorKind::kInvalidMarginal, "csv marginal is empty");
  return DiscreteMarginal(std::move(points), std::move(weights));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "read failed: " + path.string());
  return os.str();
}

DiscreteMarginal load_marginal(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    if (path.extension() == ".csv") return parse_marginal_csv(text);
    return parse_marginal_json(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string marginal_to_json(const DiscreteMarginal& mu) {
  nlohmann::json j;
  j["points"] = std::vector<double>(mu.points().begin(), mu.points().end());
  j["weights"] = std::vector<double>(mu.weights().begin(), mu.weights().end());
  return j.dump();
}

}  // namespace vmot

#include "reachcert/report.hpp"

#include <sstream>
#include <stdexcept>

#include "reachcert/certificate_io.hpp"

namespace reachcert {

namespace {
constexpr std::string_view kMagic = "reachcert-report v1";
}

void Report::add_double(std::string key, double value) {
  add(std::move(key), format_double(value));
}
void Report::add_int(std::string key, std::int64_t value) {
  add(std::move(key), std::to_string(value));
}
void Report::add_uint(std::string key, std::uint64_t value) {
  add(std::move(key), std::to_string(value));
}

std::string emit_report(const Report& report) {
  std::ostringstream out;
  out << kMagic << '\n';
  for (const auto& [key, value] : report.entries) {
    if (key.empty() || key.find_first_of(" \t\n") != std::string::npos) {
      throw std::runtime_error("report key must be nonempty without spaces");
    }
    if (value.find('\n') != std::string::npos) {
      throw std::runtime_error("report value must be single-line");
    }
    out << key << ' ' << value << '\n';
  }
  out << "end\n";
  return out.str();
}

Report parse_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != kMagic) {
    throw std::runtime_error("missing report header");
  }
  Report report;
  bool saw_end = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end") {
      saw_end = true;
      break;
    }
    std::size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0) {
      throw std::runtime_error("malformed report line " +
                               std::to_string(line_no));
    }
    report.add(line.substr(0, sp), line.substr(sp + 1));
  }
  if (!saw_end) throw std::runtime_error("truncated report: missing 'end'");
  return report;
}

}  // namespace reachcert

#include "reachcert/certificate_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace reachcert {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) throw CertificateFormatError("refusing to serialize NaN");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw CertificateFormatError("malformed number: '" + std::string(text) +
                                 "'");
  }
  return v;
}

namespace {

constexpr std::string_view kMagic = "reachcert-certificate v1";

const char* mode_name(CertificateMode m) {
  return m == CertificateMode::SingleFunction ? "single" : "system";
}
const char* bound_mode_name(BoundMode m) {
  return m == BoundMode::Global ? "global" : "per_box";
}
const char* split_name(SplitStrategy s) {
  return s == SplitStrategy::FullGrid ? "full_grid" : "bisect_longest";
}

void write_boxes(std::ostringstream& out, const char* tag,
                 const std::vector<BoxRegion>& boxes) {
  for (const BoxRegion& b : boxes) {
    out << tag << ' ' << b.depth;
    for (double v : b.domain.lower) out << ' ' << format_double(v);
    for (double v : b.domain.upper) out << ' ' << format_double(v);
    out << '\n';
  }
}

struct LineReader {
  std::istringstream in;
  int line_no = 0;
  explicit LineReader(const std::string& text) : in(text) {}
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

}  // namespace

std::string write_certificate(const SubdivisionCertificate& cert) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "mode " << mode_name(cert.mode) << '\n';
  out << "ambient_dim " << cert.ambient_dim << '\n';
  out << "function_count " << cert.function_count << '\n';
  out << "half_width " << format_double(cert.half_width) << '\n';
  out << "m2 " << format_double(cert.m2) << '\n';
  out << "m3 " << format_double(cert.m3) << '\n';
  out << "bound_mode " << bound_mode_name(cert.bound_mode) << '\n';
  out << "split " << split_name(cert.split) << '\n';
  out << "epsilon_min " << format_double(cert.epsilon_min) << '\n';
  out << "grad_l1_lower " << format_double(cert.grad_l1_lower) << '\n';
  out << "grad_l1_lower_case_two "
      << format_double(cert.grad_l1_lower_case_two) << '\n';
  out << "off_zero_lower " << format_double(cert.off_zero_lower) << '\n';
  out << "det_g_lower " << format_double(cert.det_g_lower) << '\n';
  out << "det_g_lower_case_two " << format_double(cert.det_g_lower_case_two)
      << '\n';
  out << "empty_manifold " << (cert.empty_manifold ? 1 : 0) << '\n';
  out << "steps " << cert.stats.steps << '\n';
  out << "max_depth " << cert.stats.max_depth << '\n';
  for (const std::string& f : cert.formulas) {
    out << "formula " << f << '\n';
  }
  out << "case_one_count " << cert.case_one.size() << '\n';
  out << "case_two_count " << cert.case_two.size() << '\n';
  write_boxes(out, "case_one", cert.case_one);
  write_boxes(out, "case_two", cert.case_two);
  out << "end\n";
  return out.str();
}

SubdivisionCertificate read_certificate(const std::string& text) {
  LineReader reader(text);
  std::string line;
  if (!reader.next(line) || line != kMagic) {
    throw CertificateFormatError("missing certificate header", reader.line_no);
  }
  SubdivisionCertificate cert;
  std::size_t expect_one = 0;
  std::size_t expect_two = 0;
  bool saw_end = false;

  // parse_double has no line context; re-throw its failures with one.
  auto num_field = [&](std::string_view f) {
    try {
      return parse_double(f);
    } catch (const CertificateFormatError& e) {
      throw CertificateFormatError(e.what(), reader.line_no);
    }
  };

  auto parse_box = [&](const std::vector<std::string_view>& fields,
                       Classification cls) {
    const int n = cert.ambient_dim;
    if (n <= 0) {
      throw CertificateFormatError("box before ambient_dim", reader.line_no);
    }
    if (fields.size() != 2 + 2 * static_cast<std::size_t>(n)) {
      throw CertificateFormatError("box has wrong field count",
                                   reader.line_no);
    }
    BoxRegion box;
    box.cls = cls;
    int depth = 0;
    auto res = std::from_chars(fields[1].data(),
                               fields[1].data() + fields[1].size(), depth);
    if (res.ec != std::errc{}) {
      throw CertificateFormatError("malformed box depth", reader.line_no);
    }
    box.depth = depth;
    box.domain.lower.resize(static_cast<std::size_t>(n));
    box.domain.upper.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      box.domain.lower[a] = num_field(fields[2 + a]);
      box.domain.upper[a] = num_field(fields[2 + n + a]);
    }
    if (cls == Classification::CaseOne) {
      cert.case_one.push_back(std::move(box));
    } else {
      cert.case_two.push_back(std::move(box));
    }
  };

  while (reader.next(line)) {
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::string_view key = fields[0];
    auto want = [&](std::size_t count) {
      if (fields.size() != count) {
        throw CertificateFormatError("wrong field count for '" +
                                         std::string(key) + "'",
                                     reader.line_no);
      }
    };
    auto int_field = [&](std::string_view f) {
      long v = 0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
        throw CertificateFormatError("malformed integer", reader.line_no);
      }
      return v;
    };
    if (key == "mode") {
      want(2);
      if (fields[1] == "single") {
        cert.mode = CertificateMode::SingleFunction;
      } else if (fields[1] == "system") {
        cert.mode = CertificateMode::System;
      } else {
        throw CertificateFormatError("unknown mode", reader.line_no);
      }
    } else if (key == "ambient_dim") {
      want(2);
      cert.ambient_dim = static_cast<int>(int_field(fields[1]));
    } else if (key == "function_count") {
      want(2);
      cert.function_count = static_cast<int>(int_field(fields[1]));
    } else if (key == "half_width") {
      want(2);
      cert.half_width = num_field(fields[1]);
    } else if (key == "m2") {
      want(2);
      cert.m2 = num_field(fields[1]);
    } else if (key == "m3") {
      want(2);
      cert.m3 = num_field(fields[1]);
    } else if (key == "bound_mode") {
      want(2);
      if (fields[1] == "global") {
        cert.bound_mode = BoundMode::Global;
      } else if (fields[1] == "per_box") {
        cert.bound_mode = BoundMode::PerBox;
      } else {
        throw CertificateFormatError("unknown bound_mode", reader.line_no);
      }
    } else if (key == "split") {
      want(2);
      if (fields[1] == "full_grid") {
        cert.split = SplitStrategy::FullGrid;
      } else if (fields[1] == "bisect_longest") {
        cert.split = SplitStrategy::BisectLongest;
      } else {
        throw CertificateFormatError("unknown split strategy", reader.line_no);
      }
    } else if (key == "epsilon_min") {
      want(2);
      cert.epsilon_min = num_field(fields[1]);
    } else if (key == "grad_l1_lower") {
      want(2);
      cert.grad_l1_lower = num_field(fields[1]);
    } else if (key == "grad_l1_lower_case_two") {
      want(2);
      cert.grad_l1_lower_case_two = num_field(fields[1]);
    } else if (key == "off_zero_lower") {
      want(2);
      cert.off_zero_lower = num_field(fields[1]);
    } else if (key == "det_g_lower") {
      want(2);
      cert.det_g_lower = num_field(fields[1]);
    } else if (key == "det_g_lower_case_two") {
      want(2);
      cert.det_g_lower_case_two = num_field(fields[1]);
    } else if (key == "empty_manifold") {
      want(2);
      cert.empty_manifold = int_field(fields[1]) != 0;
    } else if (key == "steps") {
      want(2);
      cert.stats.steps = static_cast<std::uint64_t>(int_field(fields[1]));
    } else if (key == "max_depth") {
      want(2);
      cert.stats.max_depth = static_cast<int>(int_field(fields[1]));
    } else if (key == "formula") {
      // Formula text contains spaces, so keep the raw remainder of the line
      // instead of the split fields.
      if (fields.size() < 2) {
        throw CertificateFormatError("formula line missing text",
                                     reader.line_no);
      }
      std::string f(line.substr(std::string_view("formula ").size()));
      cert.formulas.push_back(std::move(f));
    } else if (key == "case_one_count") {
      want(2);
      expect_one = static_cast<std::size_t>(int_field(fields[1]));
    } else if (key == "case_two_count") {
      want(2);
      expect_two = static_cast<std::size_t>(int_field(fields[1]));
    } else if (key == "case_one") {
      parse_box(fields, Classification::CaseOne);
    } else if (key == "case_two") {
      parse_box(fields, Classification::CaseTwo);
    } else if (key == "end") {
      saw_end = true;
      break;
    } else {
      throw CertificateFormatError("unknown key '" + std::string(key) + "'",
                                   reader.line_no);
    }
  }
  if (!saw_end) {
    throw CertificateFormatError("truncated certificate: missing 'end'");
  }
  if (cert.case_one.size() != expect_one ||
      cert.case_two.size() != expect_two) {
    throw CertificateFormatError("box count mismatch");
  }
  if (cert.formulas.size() != static_cast<std::size_t>(cert.function_count)) {
    throw CertificateFormatError("formula count mismatch");
  }
  return cert;
}

void save_certificate(const std::string& path,
                      const SubdivisionCertificate& cert) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CertificateFormatError("cannot open '" + path + "' for writing");
  }
  out << write_certificate(cert);
  if (!out) {
    throw CertificateFormatError("failed writing '" + path + "'");
  }
}

SubdivisionCertificate load_certificate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CertificateFormatError("cannot open '" + path + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_certificate(buf.str());
}

}  // namespace reachcert

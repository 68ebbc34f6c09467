// Versioned plain-text serialization for subdivision certificates.
//
// The format is line-oriented and deterministic: floating-point values are
// printed with the shortest decimal representation that round-trips to the
// exact same double, boxes appear in canonical order, and wall-clock timing
// is deliberately excluded so that byte-identical inputs produce
// byte-identical certificates.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "reachcert/subdivide.hpp"

namespace reachcert {

struct CertificateFormatError : std::runtime_error {
  explicit CertificateFormatError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) +
                                          ")"
                                    : what),
        line(line) {}
  int line = 0;
};

// Shortest decimal text that parses back to exactly the same double.
// Infinities render as "inf"/"-inf".
std::string format_double(double v);

// Inverse of format_double; accepts any strtod-style decimal plus the
// "inf"/"-inf" sentinels. Throws CertificateFormatError on garbage.
double parse_double(std::string_view text);

std::string write_certificate(const SubdivisionCertificate& cert);
SubdivisionCertificate read_certificate(const std::string& text);

void save_certificate(const std::string& path,
                      const SubdivisionCertificate& cert);
SubdivisionCertificate load_certificate(const std::string& path);

}  // namespace reachcert

#include "reachcert/svg.hpp"

#include <sstream>

#include "reachcert/certificate_io.hpp"

namespace reachcert {

namespace {

void emit_box(std::ostringstream& out, const BoxRegion& box,
              const char* stroke, const char* fill, double stroke_width) {
  double x = box.domain.lower[0];
  double y = -box.domain.upper[1];  // grid y up, svg y down
  double w = box.domain.upper[0] - box.domain.lower[0];
  double h = box.domain.upper[1] - box.domain.lower[1];
  out << "<rect x=\"" << format_double(x) << "\" y=\"" << format_double(y)
      << "\" width=\"" << format_double(w) << "\" height=\""
      << format_double(h) << "\" fill=\"" << fill << "\" fill-opacity=\"0.25\""
      << " stroke=\"" << stroke << "\" stroke-width=\""
      << format_double(stroke_width) << "\"/>\n";
}

}  // namespace

std::string certificate_to_svg(const SubdivisionCertificate& cert) {
  if (cert.ambient_dim != 2) {
    throw std::invalid_argument("only planar certificates can be rendered");
  }
  const double l = cert.half_width;
  const double view = 2.0 * l;
  const double stroke = view / 1000.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
      << format_double(-l) << ' ' << format_double(-l) << ' '
      << format_double(view) << ' ' << format_double(view)
      << "\" width=\"800\" height=\"800\">\n";
  out << "<rect x=\"" << format_double(-l) << "\" y=\"" << format_double(-l)
      << "\" width=\"" << format_double(view) << "\" height=\""
      << format_double(view) << "\" fill=\"white\"/>\n";
  for (const BoxRegion& box : cert.case_one) {
    emit_box(out, box, "#2a2", "#cec", stroke);
  }
  for (const BoxRegion& box : cert.case_two) {
    emit_box(out, box, "#c22", "#ecc", stroke);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace reachcert

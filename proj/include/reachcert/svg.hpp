// Deterministic SVG rendering of 2D subdivision certificates: one rectangle
// per terminal box, green for boxes certified away from the zero set, red for
// boxes certified to carry a regular piece of it.
#pragma once

#include <string>

#include "reachcert/subdivide.hpp"

namespace reachcert {

// Byte-identical output for equal certificates. Throws std::invalid_argument
// when the certificate is not planar (ambient dimension != 2).
std::string certificate_to_svg(const SubdivisionCertificate& cert);

}  // namespace reachcert

// Flat key-value problem configuration for the CLI.
//
// Format: one "key value" pair per line; '#' starts a comment; blank lines
// ignored. "function" may repeat (one defining function per line, in order).
// See README for the full key list.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachcert/subdivide.hpp"

namespace reachcert {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) +
                                          ")"
                                    : what),
        line(line) {}
  int line = 0;
};

struct PipelineSelection {
  bool grad_bound = false;
  bool reach = false;
  bool homology = false;
  bool eigenvalue = false;
  bool deform = false;
};

struct ProblemConfig {
  std::vector<std::string> functions;
  int dimension = 0;
  double half_width = 0.0;  // bounding box [-half_width, half_width]^N
  std::optional<double> m2;  // gradient 2-norm upper bound override
  std::optional<double> m3;  // hessian 2-norm upper bound override
  SplitStrategy strategy = SplitStrategy::FullGrid;
  BoundMode bound_mode = BoundMode::Global;
  int depth_cap = 40;
  int workers = 1;
  PipelineSelection pipeline;
  std::optional<double> homology_half_width;  // default: half_width
  std::optional<double> homology_delta;       // absent: auto = tau/2.37
  bool homology_conservative = false;
  std::optional<double> eigenvalue_radius;    // K
  std::optional<int> eigenvalue_dim;          // manifold dimension n
};

// Parses and validates: all required keys present, numerics finite/positive,
// pipeline dependencies satisfied (reach needs grad-bound; homology,
// eigenvalue, deform need reach/grad-bound), homology only for one function
// in the plane. Throws ConfigError with a line number where possible.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

}  // namespace reachcert

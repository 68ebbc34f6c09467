// Orchestration of the certification chain:
//   subdivision (derivative bounds) → reach → homology / eigenvalue /
//   deformation margins,
// assembling a structured report plus the artifacts each stage produces.
#pragma once

#include <functional>
#include <optional>

#include "reachcert/config.hpp"
#include "reachcert/homology.hpp"
#include "reachcert/reach.hpp"
#include "reachcert/report.hpp"
#include "reachcert/subdivide.hpp"

namespace reachcert {

struct PipelineResult {
  Report report;
  std::optional<SubdivisionCertificate> certificate;
  std::optional<ReachCertificate> reach;
  std::optional<SelectionGrid> grid;
};

// Runs the stages selected in the config. Exceptions propagate
// (DepthCapExceeded, UncertainSignError, std::invalid_argument, ParseError);
// the CLI maps them to exit codes.
PipelineResult run_pipeline(
    const ProblemConfig& config,
    const std::function<void(std::uint64_t, std::size_t)>& heartbeat = {});

}  // namespace reachcert

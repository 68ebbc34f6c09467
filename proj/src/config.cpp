#include "reachcert/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reachcert/certificate_io.hpp"

namespace reachcert {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double positive_number(const std::string& value, const char* key, int line) {
  double v;
  try {
    v = parse_double(value);
  } catch (const CertificateFormatError&) {
    throw ConfigError(std::string("malformed number for '") + key + "'", line);
  }
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + " must be positive and finite", line);
  }
  return v;
}

int positive_int(const std::string& value, const char* key, int line) {
  int v = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size() ||
      v <= 0) {
    throw ConfigError(std::string(key) + " must be a positive integer", line);
  }
  return v;
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  ProblemConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool saw_pipeline = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::size_t sp = line.find(' ');
    if (sp == std::string::npos) {
      throw ConfigError("expected 'key value'", line_no);
    }
    std::string key = line.substr(0, sp);
    std::string value = trim(line.substr(sp + 1));
    if (value.empty()) {
      throw ConfigError("missing value for '" + key + "'", line_no);
    }
    if (key == "function") {
      cfg.functions.push_back(value);
    } else if (key == "dimension") {
      cfg.dimension = positive_int(value, "dimension", line_no);
    } else if (key == "half_width") {
      cfg.half_width = positive_number(value, "half_width", line_no);
    } else if (key == "m2") {
      cfg.m2 = positive_number(value, "m2", line_no);
    } else if (key == "m3") {
      cfg.m3 = positive_number(value, "m3", line_no);
    } else if (key == "strategy") {
      if (value == "full-split") {
        cfg.strategy = SplitStrategy::FullGrid;
      } else if (value == "bisect-longest") {
        cfg.strategy = SplitStrategy::BisectLongest;
      } else {
        throw ConfigError(
            "strategy must be 'full-split' or 'bisect-longest'", line_no);
      }
    } else if (key == "bound_mode") {
      if (value == "global") {
        cfg.bound_mode = BoundMode::Global;
      } else if (value == "per-box") {
        cfg.bound_mode = BoundMode::PerBox;
      } else {
        throw ConfigError("bound_mode must be 'global' or 'per-box'", line_no);
      }
    } else if (key == "depth_cap") {
      cfg.depth_cap = positive_int(value, "depth_cap", line_no);
    } else if (key == "workers") {
      cfg.workers = positive_int(value, "workers", line_no);
    } else if (key == "pipeline") {
      saw_pipeline = true;
      std::size_t start = 0;
      while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        std::string stage = trim(value.substr(
            start, comma == std::string::npos ? std::string::npos
                                              : comma - start));
        if (stage == "grad-bound") {
          cfg.pipeline.grad_bound = true;
        } else if (stage == "reach") {
          cfg.pipeline.reach = true;
        } else if (stage == "homology") {
          cfg.pipeline.homology = true;
        } else if (stage == "eigenvalue") {
          cfg.pipeline.eigenvalue = true;
        } else if (stage == "deform") {
          cfg.pipeline.deform = true;
        } else if (stage == "all") {
          cfg.pipeline = {true, true, true, true, true};
        } else if (!stage.empty()) {
          throw ConfigError("unknown pipeline stage '" + stage + "'",
                            line_no);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else if (key == "homology_half_width") {
      cfg.homology_half_width =
          positive_number(value, "homology_half_width", line_no);
    } else if (key == "homology_delta") {
      if (value == "auto") {
        cfg.homology_delta.reset();
      } else {
        cfg.homology_delta = positive_number(value, "homology_delta", line_no);
      }
    } else if (key == "homology_conservative") {
      cfg.homology_conservative = (value == "1" || value == "true");
    } else if (key == "eigenvalue_radius") {
      cfg.eigenvalue_radius =
          positive_number(value, "eigenvalue_radius", line_no);
    } else if (key == "eigenvalue_dim") {
      cfg.eigenvalue_dim = positive_int(value, "eigenvalue_dim", line_no);
    } else {
      throw ConfigError("unknown key '" + key + "'", line_no);
    }
  }

  if (cfg.functions.empty()) {
    throw ConfigError("at least one 'function' line is required");
  }
  if (cfg.dimension < 1) throw ConfigError("'dimension' is required");
  if (!(cfg.half_width > 0.0)) throw ConfigError("'half_width' is required");
  if (cfg.functions.size() > static_cast<std::size_t>(cfg.dimension)) {
    throw ConfigError("more functions than ambient dimensions");
  }
  if (!saw_pipeline) cfg.pipeline.grad_bound = true;
  if (!cfg.pipeline.grad_bound &&
      (cfg.pipeline.reach || cfg.pipeline.homology || cfg.pipeline.eigenvalue ||
       cfg.pipeline.deform)) {
    throw ConfigError("every pipeline stage depends on grad-bound");
  }
  if ((cfg.pipeline.homology || cfg.pipeline.eigenvalue) &&
      !cfg.pipeline.reach) {
    throw ConfigError("homology and eigenvalue stages require reach");
  }
  if (cfg.pipeline.homology &&
      (cfg.dimension != 2 || cfg.functions.size() != 1)) {
    throw ConfigError(
        "homology applies to a single function in the plane (dimension 2)");
  }
  if (cfg.pipeline.eigenvalue) {
    if (!cfg.eigenvalue_radius) {
      throw ConfigError("eigenvalue stage requires 'eigenvalue_radius'");
    }
    if (!cfg.eigenvalue_dim) {
      throw ConfigError("eigenvalue stage requires 'eigenvalue_dim'");
    }
    if (*cfg.eigenvalue_dim < 2) {
      throw ConfigError("'eigenvalue_dim' must be at least 2");
    }
  }
  if (cfg.pipeline.deform && cfg.functions.size() != 1) {
    throw ConfigError("deform stage applies to a single function");
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace reachcert

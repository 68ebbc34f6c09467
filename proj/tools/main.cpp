// Command-line front end: run certification pipelines from a config file,
// render certificates to SVG, and re-verify certificate invariants.
//
// Exit codes: 0 success; 1 configuration/usage/verification error;
// 2 subdivision hit the depth cap; 3 uncertifiable vertex sign in homology.
#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "reachcert/certificate_io.hpp"
#include "reachcert/config.hpp"
#include "reachcert/homology.hpp"
#include "reachcert/pipeline.hpp"
#include "reachcert/svg.hpp"

namespace {

using namespace reachcert;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDepthCap = 2;
constexpr int kExitUncertainSign = 3;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

int env_workers() {
  const char* env = std::getenv("REACHCERT_WORKERS");
  if (!env) return 0;
  int v = std::atoi(env);
  return v > 0 ? v : 0;
}

int cmd_run(const std::string& config_path, int workers_flag,
            int depth_cap_flag, const std::string& format,
            const std::string& out_dir) {
  ProblemConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kExitConfig;
  }
  if (workers_flag > 0) {
    config.workers = workers_flag;
  } else if (int we = env_workers(); we > 0) {
    config.workers = we;
  }
  if (depth_cap_flag > 0) config.depth_cap = depth_cap_flag;

  auto heartbeat = [](std::uint64_t steps, std::size_t frontier) {
    std::cerr << "[progress] boxes=" << steps << " frontier=" << frontier
              << '\n';
  };

  PipelineResult result;
  try {
    result = run_pipeline(config, heartbeat);
  } catch (const ParseError& e) {
    std::cerr << "error: config: formula: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DepthCapExceeded& e) {
    std::cerr << "error: depth-cap: " << e.what() << '\n';
    for (std::size_t i = 0; i < e.unresolved().size() && i < 8; ++i) {
      const BoxRegion& b = e.unresolved()[i];
      std::cerr << "  unresolved depth=" << b.depth << " [";
      for (std::size_t a = 0; a < b.domain.lower.size(); ++a) {
        if (a) std::cerr << ", ";
        std::cerr << format_double(b.domain.lower[a]) << ".."
                  << format_double(b.domain.upper[a]);
      }
      std::cerr << "]\n";
    }
    return kExitDepthCap;
  } catch (const UncertainSignError& e) {
    std::cerr << "error: uncertain-sign: " << e.what() << '\n';
    for (const auto& [x, y] : e.vertices) {
      std::cerr << "  vertex (" << format_double(x) << ", "
                << format_double(y) << ")\n";
    }
    return kExitUncertainSign;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return kExitConfig;
  }

  std::filesystem::path stem =
      std::filesystem::path(config_path).stem();
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  if (result.certificate) {
    std::string cert_path = (dir / stem).string() + ".cert.txt";
    save_certificate(cert_path, *result.certificate);
    result.report.add("artifact.certificate", cert_path);
    if (result.certificate->ambient_dim == 2) {
      std::string svg_path = (dir / stem).string() + ".svg";
      write_text_file(svg_path, certificate_to_svg(*result.certificate));
      result.report.add("artifact.boxes_svg", svg_path);
    }
  }
  if (result.grid) {
    std::string grid_path = (dir / stem).string() + ".grid.txt";
    write_text_file(grid_path, export_grid(*result.grid));
    result.report.add("artifact.grid", grid_path);
    std::string gsvg_path = (dir / stem).string() + ".grid.svg";
    Expr f = parse_formula(config.functions[0], config.dimension);
    write_text_file(gsvg_path, grid_to_svg(*result.grid, f));
    result.report.add("artifact.grid_svg", gsvg_path);
  }
  std::string report_path = (dir / stem).string() + ".report.txt";
  write_text_file(report_path, emit_report(result.report));

  if (format == "structured") {
    std::cout << emit_report(result.report);
  } else {
    for (const auto& [key, value] : result.report.entries) {
      std::cout << key << " = " << value << '\n';
    }
  }
  return kExitOk;
}

int cmd_render(const std::string& cert_path, const std::string& svg_path) {
  try {
    SubdivisionCertificate cert = load_certificate(cert_path);
    write_text_file(svg_path, certificate_to_svg(cert));
  } catch (const std::exception& e) {
    std::cerr << "error: render: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

// Re-verifies the structural invariants a stored certificate promises.
int cmd_check(const std::string& cert_path) {
  SubdivisionCertificate cert;
  try {
    cert = load_certificate(cert_path);
  } catch (const std::exception& e) {
    std::cerr << "error: check: " << e.what() << '\n';
    return kExitConfig;
  }
  auto fail = [&](const std::string& what) {
    std::cerr << "error: check: " << what << '\n';
    return kExitConfig;
  };
  const int n = cert.ambient_dim;
  if (n < 1) return fail("ambient dimension must be positive");
  if (cert.function_count < 1 || cert.function_count > n) {
    return fail("function count out of range");
  }
  bool single = cert.mode == CertificateMode::SingleFunction;
  if (single != (cert.function_count == 1)) {
    return fail("mode inconsistent with function count");
  }
  for (const std::string& f : cert.formulas) {
    try {
      parse_formula(f, n);
    } catch (const ParseError& e) {
      return fail("stored formula does not parse: " + std::string(e.what()));
    }
  }
  if (cert.empty_manifold != cert.case_two.empty()) {
    return fail("empty-manifold flag inconsistent with box lists");
  }

  auto check_boxes = [&](const std::vector<BoxRegion>& boxes,
                         const char* name) -> std::string {
    const BoxRegion* prev = nullptr;
    for (const BoxRegion& b : boxes) {
      if (static_cast<int>(b.domain.lower.size()) != n ||
          static_cast<int>(b.domain.upper.size()) != n) {
        return std::string(name) + ": box dimension mismatch";
      }
      for (int a = 0; a < n; ++a) {
        if (!(b.domain.lower[a] < b.domain.upper[a])) {
          return std::string(name) + ": degenerate box";
        }
        if (b.domain.lower[a] < -cert.half_width ||
            b.domain.upper[a] > cert.half_width) {
          return std::string(name) + ": box outside the root box";
        }
      }
      if (prev && !box_before(prev->domain, b.domain)) {
        return std::string(name) + ": boxes not in canonical order";
      }
      prev = &b;
    }
    return "";
  };
  if (std::string err = check_boxes(cert.case_one, "case_one"); !err.empty()) {
    return fail(err);
  }
  if (std::string err = check_boxes(cert.case_two, "case_two"); !err.empty()) {
    return fail(err);
  }

  // Tiling: terminal boxes partition the root box, so volumes must add up.
  long double total = 0.0L;
  double eps_min = std::numeric_limits<double>::infinity();
  auto accumulate = [&](const std::vector<BoxRegion>& boxes) {
    for (const BoxRegion& b : boxes) {
      long double vol = 1.0L;
      for (int a = 0; a < n; ++a) {
        double side = b.domain.upper[a] - b.domain.lower[a];
        vol *= static_cast<long double>(side);
        eps_min = std::min(eps_min, side);
      }
      total += vol;
    }
  };
  accumulate(cert.case_one);
  accumulate(cert.case_two);
  long double root_vol =
      powl(2.0L * static_cast<long double>(cert.half_width), n);
  if (fabsl(total - root_vol) > 1e-9L * root_vol) {
    return fail("terminal boxes do not tile the root box");
  }
  if (!cert.case_one.empty() || !cert.case_two.empty()) {
    // Stored epsilon_min uses outward-rounded side lengths; it can be at
    // most a few ulps below the plain subtraction.
    if (!(cert.epsilon_min <= eps_min) ||
        cert.epsilon_min < eps_min * (1.0 - 1e-12)) {
      return fail("epsilon_min inconsistent with terminal box sides");
    }
  }

  std::cout << "certificate OK: " << cert.case_one.size()
            << " off-zero boxes, " << cert.case_two.size()
            << " regular-zero boxes, epsilon_min "
            << format_double(cert.epsilon_min) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "reachcert: certified reach lower bounds for implicit manifolds, with "
      "downstream homology, diameter, eigenvalue and deformation bounds"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 0;
  int depth_cap = 0;
  std::string format = "text";
  std::string out_dir = ".";
  CLI::App* run = app.add_subcommand("run", "run a certification pipeline");
  run->add_option("config", config_path, "problem configuration file")
      ->required();
  run->add_option("--workers", workers, "worker threads (overrides config)");
  run->add_option("--depth-cap", depth_cap,
                  "subdivision depth cap (overrides config)");
  run->add_option("--format", format, "report format: text or structured")
      ->check(CLI::IsMember({"text", "structured"}));
  run->add_option("--out-dir", out_dir, "directory for artifacts");

  std::string cert_path;
  std::string svg_path;
  CLI::App* render =
      app.add_subcommand("render", "render a certificate to SVG");
  render->add_option("certificate", cert_path, "certificate file")->required();
  render->add_option("svg", svg_path, "output SVG path")->required();

  std::string check_path;
  CLI::App* check =
      app.add_subcommand("check", "re-verify certificate invariants");
  check->add_option("certificate", check_path, "certificate file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    return cmd_run(config_path, workers, depth_cap, format, out_dir);
  }
  if (render->parsed()) return cmd_render(cert_path, svg_path);
  if (check->parsed()) return cmd_check(check_path);
  return kExitConfig;
}

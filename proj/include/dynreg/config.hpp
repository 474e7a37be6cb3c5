#pragma once

#include "dynreg/coeff.hpp"
#include "dynreg/criteria.hpp"
#include "dynreg/gilbarg_serrin.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dynreg {

/// family: identity | constant | gilbarg_serrin | radial | perturbed_radial | cesari
struct FieldSpec {
  std::string family = "identity";
  int n = 2;
  std::string g;                // gilbarg_serrin, and the perturbation profile
  std::string profile;          // radial parts
  std::vector<std::vector<double>> matrix;  // constant
  std::vector<std::vector<double>> shape;   // radial parts
  std::string perturbation = "gs";          // gs | e11
  double perturbation_eps = 1.0;
  CesariParams cesari;
};

struct MomentsOptions {
  std::vector<double> radii{0.5, 0.25, 0.125, 0.0625};
};

struct IntegrateSection {
  double t0 = 0.0;
  double t1 = 100.0;
  double tol = 1e-9;
  int samples = 101;  // CSV rows
};

struct GsOptions {
  std::string example = "mode";  // mode | cesari-convergent | cesari-minus-infinity
  std::vector<double> r_grid{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  double t_start = 200.0;
  double tol = 1e-10;
  double horizon = 1e4;
};

struct VerifyOptions {
  int N = 256;
  std::string boundary = "x1";
  std::vector<double> radii{0.25, 0.125, 0.0625, 0.03125};
  double tol = 1e-14;
  int circle_resolution = 256;
  bool classify = true;
};

struct RunConfig {
  FieldSpec field;
  Budget budget;
  MomentsOptions moments;
  IntegrateSection integrate;
  GsOptions gs;
  VerifyOptions verify;
  std::string output_dir = "dynreg_out";
  std::string canonical;  // normalized JSON of the input, the hash source
};

/// Parses and validates; ConfigError names the offending field (and line for syntax errors).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

CoefficientField build_field(const FieldSpec& spec);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace dynreg

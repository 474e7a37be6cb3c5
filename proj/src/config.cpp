#include "dynreg/config.hpp"
#include "dynreg/pde.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dynreg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError("config field '" + field + "': " + msg);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
  }
}

double get_number(const json& j, const std::string& key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

int get_int(const json& j, const std::string& key, const std::string& path, int def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path, const std::string& def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path, bool def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::vector<double> get_list(const json& j, const std::string& key, const std::string& path,
                             const std::vector<double>& def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(path, "expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> get_matrix(const json& j, const std::string& key, const std::string& path, int n) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != n) fail(path, "expected an n x n array");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) {
    if (!row.is_array() || static_cast<int>(row.size()) != n) fail(path, "expected an n x n array");
    std::vector<double> r;
    for (const auto& e : row) {
      if (!e.is_number()) fail(path, "entries must be numbers");
      r.push_back(e.get<double>());
    }
    out.push_back(r);
  }
  return out;
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0)) fail(path, "must be positive");
}

Mat to_mat(const std::vector<std::vector<double>>& m) {
  const int n = static_cast<int>(m.size());
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) out(i, k) = m[i][k];
  return out;
}

RadialProfile parse_profile(const std::string& text, const std::string& path) {
  try {
    return RadialProfile::parse(text);
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    int line = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i)
      if (text[i] == '\n') ++line;
    std::ostringstream os;
    os << "config syntax error at line " << line << ": " << e.what();
    throw ConfigError(os.str());
  }
  check_keys(root, "", {"field", "budget", "moments", "integrate", "gs", "verify", "output_dir"});
  RunConfig cfg;
  cfg.canonical = root.dump();

  if (root.contains("field")) {
    const json& f = root.at("field");
    check_keys(f, "field", {"family", "n", "g", "profile", "matrix", "shape", "perturbation", "perturbation_eps", "cesari"});
    FieldSpec& s = cfg.field;
    s.family = get_string(f, "family", "field.family", s.family);
    static const std::set<std::string> families{"identity", "constant", "gilbarg_serrin", "radial", "perturbed_radial",
                                                "cesari"};
    if (!families.count(s.family))
      fail("field.family", "unknown family '" + s.family +
                               "' (identity, constant, gilbarg_serrin, radial, perturbed_radial, cesari)");
    s.n = get_int(f, "n", "field.n", s.n);
    if (s.n < 2 || s.n > 3) fail("field.n", "dimension must be 2 or 3");
    s.g = get_string(f, "g", "field.g", s.g);
    s.profile = get_string(f, "profile", "field.profile", s.profile);
    s.matrix = get_matrix(f, "matrix", "field.matrix", s.n);
    s.shape = get_matrix(f, "shape", "field.shape", s.n);
    s.perturbation = get_string(f, "perturbation", "field.perturbation", s.perturbation);
    if (s.perturbation != "gs" && s.perturbation != "e11") fail("field.perturbation", "expected 'gs' or 'e11'");
    s.perturbation_eps = get_number(f, "perturbation_eps", "field.perturbation_eps", s.perturbation_eps);
    if (f.contains("cesari")) {
      const json& c = f.at("cesari");
      check_keys(c, "field.cesari", {"kind", "decay_exponent", "horizon", "C", "fill"});
      const std::string kind = get_string(c, "kind", "field.cesari.kind", "convergent");
      if (kind == "convergent") s.cesari.kind = CesariKind::ConvergentImproper;
      else if (kind == "minus-infinity") s.cesari.kind = CesariKind::MinusInfinity;
      else fail("field.cesari.kind", "expected 'convergent' or 'minus-infinity'");
      s.cesari.decay_exponent = get_number(c, "decay_exponent", "field.cesari.decay_exponent", s.cesari.decay_exponent);
      s.cesari.horizon = get_number(c, "horizon", "field.cesari.horizon", s.cesari.horizon);
      s.cesari.C = get_number(c, "C", "field.cesari.C", s.cesari.C);
      s.cesari.fill = get_number(c, "fill", "field.cesari.fill", s.cesari.fill);
      if (s.cesari.horizon > 1e6) fail("field.cesari.horizon", "must be <= 1e6");
      positive(s.cesari.C, "field.cesari.C");
    }
    if (s.family == "constant" && s.matrix.empty()) fail("field.matrix", "required for family 'constant'");
    if (s.family == "gilbarg_serrin" && s.g.empty()) fail("field.g", "required for family 'gilbarg_serrin'");
    if ((s.family == "radial" || s.family == "perturbed_radial") && (s.profile.empty() || s.shape.empty()))
      fail(s.profile.empty() ? "field.profile" : "field.shape", "required for family '" + s.family + "'");
    if (s.family == "perturbed_radial" && s.g.empty()) fail("field.g", "required for family 'perturbed_radial'");
    if (!s.g.empty()) parse_profile(s.g, "field.g");
    if (!s.profile.empty()) parse_profile(s.profile, "field.profile");
  }

  if (root.contains("budget")) {
    const json& b = root.at("budget");
    check_keys(b, "budget", {"eps", "k_max", "tol", "grid_resolution", "t_ext", "t0", "t_horizon", "dyn_tol", "asym_tol",
                             "window_fraction", "K_max"});
    Budget& B = cfg.budget;
    B.eps = get_number(b, "eps", "budget.eps", B.eps);
    B.k_max = get_int(b, "k_max", "budget.k_max", B.k_max);
    B.tol = get_number(b, "tol", "budget.tol", B.tol);
    B.grid_resolution = get_int(b, "grid_resolution", "budget.grid_resolution", B.grid_resolution);
    B.t_ext = get_number(b, "t_ext", "budget.t_ext", B.t_ext);
    B.t0 = get_number(b, "t0", "budget.t0", B.t0);
    B.t_horizon = get_number(b, "t_horizon", "budget.t_horizon", B.t_horizon);
    B.dyn_tol = get_number(b, "dyn_tol", "budget.dyn_tol", B.dyn_tol);
    B.asym_tol = get_number(b, "asym_tol", "budget.asym_tol", B.asym_tol);
    B.window_fraction = get_number(b, "window_fraction", "budget.window_fraction", B.window_fraction);
    B.K_max = get_number(b, "K_max", "budget.K_max", B.K_max);
    if (!(B.eps > 0.0 && B.eps < 1.0)) fail("budget.eps", "must lie in (0, 1)");
    if (B.k_max < 1 || B.k_max > 40) fail("budget.k_max", "must lie in [1, 40]");
    positive(B.tol, "budget.tol");
    positive(B.dyn_tol, "budget.dyn_tol");
    positive(B.asym_tol, "budget.asym_tol");
    positive(B.K_max, "budget.K_max");
    if (B.grid_resolution < 0) fail("budget.grid_resolution", "must be >= 0");
    if (!(B.t0 >= 0.0)) fail("budget.t0", "must be >= 0");
    if (!(B.t_horizon > B.t0)) fail("budget.t_horizon", "must exceed budget.t0");
    if (B.t_horizon > 1e6) fail("budget.t_horizon", "must be <= 1e6");
    if (!(B.window_fraction > 0.0 && B.window_fraction < 0.5)) fail("budget.window_fraction", "must lie in (0, 0.5)");
    if (!(B.t_ext > 100.0)) fail("budget.t_ext", "must exceed 100");
  }

  if (root.contains("moments")) {
    const json& m = root.at("moments");
    check_keys(m, "moments", {"radii"});
    cfg.moments.radii = get_list(m, "radii", "moments.radii", cfg.moments.radii);
    for (double r : cfg.moments.radii)
      if (!(r > 0.0 && r <= 1.0)) fail("moments.radii", "radii must lie in (0, 1]");
  }

  if (root.contains("integrate")) {
    const json& m = root.at("integrate");
    check_keys(m, "integrate", {"t0", "t1", "tol", "samples"});
    auto& I = cfg.integrate;
    I.t0 = get_number(m, "t0", "integrate.t0", I.t0);
    I.t1 = get_number(m, "t1", "integrate.t1", I.t1);
    I.tol = get_number(m, "tol", "integrate.tol", I.tol);
    I.samples = get_int(m, "samples", "integrate.samples", I.samples);
    positive(I.tol, "integrate.tol");
    if (!(I.t0 >= 0.0)) fail("integrate.t0", "must be >= 0");
    if (!(I.t1 > I.t0)) fail("integrate.t1", "must exceed integrate.t0");
    if (I.t1 > 1e6) fail("integrate.t1", "must be <= 1e6");
    if (I.samples < 2 || I.samples > 100000) fail("integrate.samples", "must lie in [2, 100000]");
  }

  if (root.contains("gs")) {
    const json& m = root.at("gs");
    check_keys(m, "gs", {"example", "r_grid", "t_start", "tol", "horizon"});
    auto& G = cfg.gs;
    G.example = get_string(m, "example", "gs.example", G.example);
    if (G.example != "mode" && G.example != "cesari-convergent" && G.example != "cesari-minus-infinity")
      fail("gs.example", "expected 'mode', 'cesari-convergent' or 'cesari-minus-infinity'");
    G.r_grid = get_list(m, "r_grid", "gs.r_grid", G.r_grid);
    G.t_start = get_number(m, "t_start", "gs.t_start", G.t_start);
    G.tol = get_number(m, "tol", "gs.tol", G.tol);
    G.horizon = get_number(m, "horizon", "gs.horizon", G.horizon);
    positive(G.tol, "gs.tol");
    positive(G.t_start, "gs.t_start");
    if (!(G.horizon >= 100.0 && G.horizon <= 1e6)) fail("gs.horizon", "must lie in [100, 1e6]");
    for (double r : G.r_grid)
      if (!(r > 0.0 && r <= 1.0)) fail("gs.r_grid", "radii must lie in (0, 1]");
  }

  if (root.contains("verify")) {
    const json& m = root.at("verify");
    check_keys(m, "verify", {"N", "boundary", "radii", "tol", "circle_resolution", "classify"});
    auto& V = cfg.verify;
    V.N = get_int(m, "N", "verify.N", V.N);
    V.boundary = get_string(m, "boundary", "verify.boundary", V.boundary);
    V.radii = get_list(m, "radii", "verify.radii", V.radii);
    V.tol = get_number(m, "tol", "verify.tol", V.tol);
    V.circle_resolution = get_int(m, "circle_resolution", "verify.circle_resolution", V.circle_resolution);
    V.classify = get_bool(m, "classify", "verify.classify", V.classify);
    if (V.N < 64 || V.N > 1024 || V.N % 2) fail("verify.N", "must be even and in [64, 1024]");
    positive(V.tol, "verify.tol");
    if (V.circle_resolution < 8) fail("verify.circle_resolution", "must be >= 8");
    try {
      boundary_by_name(V.boundary);
    } catch (const DomainError& e) {
      fail("verify.boundary", e.what());
    }
  }

  cfg.output_dir = get_string(root, "output_dir", "output_dir", cfg.output_dir);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CoefficientField build_field(const FieldSpec& s) {
  const int n = s.n;
  if (s.family == "identity") return make_constant(n, Mat::Identity(n, n));
  if (s.family == "constant") return make_constant(n, to_mat(s.matrix));
  if (s.family == "gilbarg_serrin") return make_gilbarg_serrin(n, RadialProfile::parse(s.g));
  if (s.family == "cesari") {
    const CesariGenerator c = build_cesari_counterexample(s.cesari);
    return make_gilbarg_serrin(n, *c.gen.profile);
  }
  const RadialMatrix a0{RadialProfile::parse(s.profile), to_mat(s.shape)};
  if (s.family == "radial") return make_radial(n, a0);
  const RadialProfile g = RadialProfile::parse(s.g);
  const Perturbation p = s.perturbation == "gs" ? gs_perturbation(n, g) : e11_perturbation(n, g, s.perturbation_eps);
  return make_perturbed_radial(n, a0, p);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical)));
  return buf;
}

}  // namespace dynreg

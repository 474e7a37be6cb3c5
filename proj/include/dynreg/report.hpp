#pragma once

#include "dynreg/criteria.hpp"
#include "dynreg/dynsys.hpp"
#include "dynreg/gilbarg_serrin.hpp"
#include "dynreg/pde.hpp"
#include "dynreg/sphmean.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dynreg {

inline constexpr const char* kSchemaVersion = "1.0.0";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Non-finite values become null.
Json num(double v);
Json to_json(const Mat& m);
Json to_json(const Eigen::VectorXd& v);

Json to_json(const IntegralEvidence& ev);
Json to_json(const AsymptoticLimit& a);
Json to_json(const StabilityReport& s);
Json to_json(const DynamicsEvidence& d);
Json to_json(const ModulusDiagnostics& d);
Json to_json(const RegularityVerdict& v);
Json to_json(const MomentData& m);
Json to_json(const IndependenceReport& r);
Json to_json(const CesariGenerator& c);
Json to_json(const ModeSolution& m);
Json to_json(const SpectralDecomposition& s);
Json to_json(const LipschitzQuotient& q);
Json to_json(const GradientEstimate& g);

/// Envelope: schema_version, subcommand, status, provenance, result, run_info.
/// run_info holds everything that varies between identical runs (timestamp, wall times).
struct Report {
  std::string subcommand;
  std::string config_hash;
  std::string field_description;
  std::string status = "ok";  // ok | numerical_failure
  Json result = Json::object();
  Json error;
  Json wall_times = Json::object();

  Json to_json() const;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// %.17g columns, header row first.
void write_csv(const std::string& path, const CsvTable& table);
void write_json(const std::string& path, const Json& j);

}  // namespace dynreg

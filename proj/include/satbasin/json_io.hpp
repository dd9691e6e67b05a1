#pragma once

#include <json.hpp>

#include "satbasin/basin.hpp"
#include "satbasin/degree.hpp"
#include "satbasin/dynamics.hpp"
#include "satbasin/equilibria.hpp"
#include "satbasin/system.hpp"

namespace satbasin {

using json = nlohmann::json;

// System file schema: {"n", "m", "A", "B", "K", "M"} with row-major nested
// arrays. from_json throws std::invalid_argument on schema violations.
json to_json(const SystemSpec& spec);
SystemSpec system_from_json(const json& j);

SystemSpec load_system_file(const std::string& path);
void save_system_file(const std::string& path, const SystemSpec& spec);

json to_json(const ValidationReport& report);
json to_json(const Equilibrium& eq);
json to_json(const EnumerationResult& result);
json to_json(const ParityReport& report);
json to_json(const DegreeReport& report);
json to_json(const IndexSumReport& report);
json to_json(const LyapunovCertificate& cert);
json to_json(const EscapeCertificate& cert);
json to_json(const FateReport& report);
json to_json(const RayScanResult& result);
json to_json(const ConvexityReport& report);
json to_json(const SymmetryReport& report);

json vector_to_json(const Eigen::VectorXd& v);
json matrix_to_json(const Eigen::MatrixXd& m);
json complex_vector_to_json(const Eigen::VectorXcd& v);  // [[re, im], ...]

}  // namespace satbasin

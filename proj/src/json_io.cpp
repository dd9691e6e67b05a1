#include "satbasin/json_io.hpp"

#include <fstream>
#include <stdexcept>

#include "satbasin/errors.hpp"

namespace satbasin {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json complex_vector_to_json(const Eigen::VectorXcd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(json::array({v(i).real(), v(i).imag()}));
    return arr;
}

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(cols) +
                                        " columns per row");
        for (Eigen::Index k = 0; k < cols; ++k) {
            const json& cell = row[static_cast<std::size_t>(k)];
            if (!cell.is_number()) throw std::invalid_argument(std::string(name) + ": entries must be numbers");
            m(i, k) = cell.get<double>();
        }
    }
    return m;
}

}  // namespace

json to_json(const SystemSpec& spec) {
    return json{{"n", spec.n},
                {"m", spec.m},
                {"A", matrix_to_json(spec.A)},
                {"B", matrix_to_json(spec.B)},
                {"K", matrix_to_json(spec.K)},
                {"M", spec.M}};
}

SystemSpec system_from_json(const json& j) {
    for (const char* key : {"n", "m", "A", "B", "K", "M"})
        if (!j.contains(key)) throw std::invalid_argument(std::string("system file: missing key \"") + key + "\"");
    if (!j["n"].is_number_integer() || !j["m"].is_number_integer())
        throw std::invalid_argument("system file: n and m must be integers");
    const int n = j["n"].get<int>();
    const int m = j["m"].get<int>();
    if (n <= 0 || m <= 0) throw std::invalid_argument("system file: n and m must be positive");
    if (!j["M"].is_number()) throw std::invalid_argument("system file: M must be a number");
    return SystemSpec(matrix_from_json(j["A"], n, n, "A"), matrix_from_json(j["B"], n, m, "B"),
                      matrix_from_json(j["K"], m, n, "K"), j["M"].get<double>());
}

SystemSpec load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open system file: " + path);
    json j = json::parse(in);  // throws with byte position on malformed input
    return system_from_json(j);
}

void save_system_file(const std::string& path, const SystemSpec& spec) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write system file: " + path);
    out << to_json(spec).dump(2) << "\n";
}

json to_json(const ValidationReport& report) {
    return json{{"anti_stable", report.anti_stable},
                {"controllable", report.controllable},
                {"closed_loop_hurwitz", report.closed_loop_hurwitz},
                {"eig_A", complex_vector_to_json(report.eig_A)},
                {"eig_closed_loop", complex_vector_to_json(report.eig_closed_loop)},
                {"controllability_rank", report.controllability_rank},
                {"all_ok", report.all_ok()}};
}

json to_json(const Equilibrium& eq) {
    json j{{"x", vector_to_json(eq.x)},
           {"signature", eq.signature.to_string()},
           {"general_position", eq.general_position},
           {"margin", eq.margin},
           {"stability", stability_name(eq.stability)},
           {"jac_eigs", complex_vector_to_json(eq.jac_eigs)}};
    j["index"] = eq.index ? json(*eq.index) : json(nullptr);
    return j;
}

json to_json(const EnumerationResult& result) {
    json eqs = json::array();
    for (const Equilibrium& eq : result.equilibria) eqs.push_back(to_json(eq));
    json degenerate = json::array();
    for (const RegionSignature& sig : result.degenerate_regions) degenerate.push_back(sig.to_string());
    return json{{"equilibria", std::move(eqs)}, {"degenerate_regions", std::move(degenerate)}};
}

json to_json(const ParityReport& report) {
    return json{{"count", report.count},
                {"expected_count", report.expected_count},
                {"index_sum", report.index_sum},
                {"generic", report.generic},
                {"pass", report.pass}};
}

json to_json(const DegreeReport& report) {
    json solutions = json::array();
    for (const DegreeContribution& sol : report.solutions)
        solutions.push_back(json{{"x", vector_to_json(sol.x)},
                                 {"sign", sol.sign},
                                 {"signature", sol.signature.to_string()}});
    return json{{"value", report.value},
                {"method", report.method == DegreeMethod::Winding2D ? "winding_2d" : "piecewise_affine_preimage"},
                {"radius", report.radius},
                {"regular_value", vector_to_json(report.regular_value)},
                {"solutions", std::move(solutions)},
                {"margin_ok", report.margin_ok}};
}

json to_json(const IndexSumReport& report) {
    return json{{"lhs", report.lhs},
                {"rhs", report.rhs},
                {"pass", report.pass},
                {"radius", report.radius},
                {"degree", to_json(report.degree)}};
}

json to_json(const LyapunovCertificate& cert) {
    return json{{"P", matrix_to_json(cert.P)}, {"level", cert.level}, {"residual", cert.residual}};
}

json to_json(const EscapeCertificate& cert) {
    return json{{"Q", matrix_to_json(cert.Q)},
                {"divergence_radius", cert.divergence_radius},
                {"w_max", cert.w_max}};
}

json to_json(const FateReport& report) {
    json j{{"verdict", fate_verdict_name(report.verdict)},
           {"t_decided", report.t_decided},
           {"certificate", report.certificate},
           {"final_state", vector_to_json(report.final_state)}};
    if (!report.diagnostic.empty()) j["diagnostic"] = report.diagnostic;
    return j;
}

json to_json(const RayScanResult& result) {
    return json{{"direction", vector_to_json(result.direction)},
                {"r_lo", result.r_lo},
                {"r_hi", result.r_hi},
                {"iterations", result.iterations},
                {"undecided_hits", result.undecided_hits},
                {"tol", result.tol},
                {"width_ok", result.width_ok()}};
}

json to_json(const ConvexityReport& report) {
    json violations = json::array();
    for (const ConvexityViolation& v : report.violations)
        violations.push_back(json{{"p", vector_to_json(v.p)},
                                  {"q", vector_to_json(v.q)},
                                  {"midpoint", vector_to_json(v.midpoint)},
                                  {"fate_p", membership_name(v.fate_p)},
                                  {"fate_q", membership_name(v.fate_q)},
                                  {"fate_midpoint", membership_name(v.fate_midpoint)}});
    return json{{"trials", report.trials},
                {"violations", std::move(violations)},
                {"contains_reference_triple", report.contains_reference_triple}};
}

json to_json(const SymmetryReport& report) {
    json mismatches = json::array();
    for (const SymmetryMismatch& m : report.mismatches)
        mismatches.push_back(json{{"x", vector_to_json(m.x)},
                                  {"fate_x", membership_name(m.fate_x)},
                                  {"fate_neg", membership_name(m.fate_neg)}});
    return json{{"num_points", report.num_points},
                {"decided_pairs", report.decided_pairs},
                {"undecided_pairs", report.undecided_pairs},
                {"mismatches", std::move(mismatches)},
                {"pass", report.pass}};
}

}  // namespace satbasin

// satbasin command-line front end: validation, equilibrium enumeration,
// degree checks, trajectory fates, basin scans and the bundled-counterexample
// reproduction, all emitting JSON (and CSV for point data).

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "satbasin/basin.hpp"
#include "satbasin/degree.hpp"
#include "satbasin/dynamics.hpp"
#include "satbasin/equilibria.hpp"
#include "satbasin/errors.hpp"
#include "satbasin/json_io.hpp"
#include "satbasin/reference_systems.hpp"
#include "satbasin/system.hpp"

namespace {

using satbasin::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

Eigen::VectorXd parse_vector(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(token, &pos);
            while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
            if (pos != token.size()) throw std::invalid_argument("");
            values.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse vector component \"" + token + "\"");
        }
    }
    if (values.empty()) throw std::invalid_argument("empty vector");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot write output file: " + out_path);
        out << doc.dump(2) << "\n";
    }
}

struct CommonOptions {
    std::string system_path;
    std::string out_path;
    std::uint64_t seed = 0;
    double tol = 1e-3;
    double gp_tol = 1e-9;
    double t_max = 100.0;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::optional<double> radius;
    std::string x_csv;
    int rays = 500;
    int trials = 50;
};

satbasin::SystemSpec load_system(const CommonOptions& opts) {
    if (opts.system_path.empty()) throw std::invalid_argument("--system is required");
    return satbasin::load_system_file(opts.system_path);
}

json config_echo(const std::string& command, const CommonOptions& opts,
                 std::initializer_list<const char*> keys) {
    json cfg{{"command", command}};
    for (const char* key : keys) {
        const std::string k = key;
        if (k == "system") cfg["system"] = opts.system_path;
        else if (k == "out") cfg["out"] = opts.out_path.empty() ? "stdout" : opts.out_path;
        else if (k == "seed") cfg["seed"] = opts.seed;
        else if (k == "tol") cfg["tol"] = opts.tol;
        else if (k == "gp_tol") cfg["gp_tol"] = opts.gp_tol;
        else if (k == "t_max") cfg["t_max"] = opts.t_max;
        else if (k == "rel_tol") cfg["rel_tol"] = opts.rel_tol;
        else if (k == "abs_tol") cfg["abs_tol"] = opts.abs_tol;
        else if (k == "radius") cfg["radius"] = opts.radius ? json(*opts.radius) : json("auto");
        else if (k == "x") cfg["x"] = opts.x_csv;
        else if (k == "rays") cfg["rays"] = opts.rays;
        else if (k == "trials") cfg["trials"] = opts.trials;
    }
    return cfg;
}

int cmd_validate(const CommonOptions& opts) {
    const auto spec = load_system(opts);
    const auto report = satbasin::validate_spec(spec);
    json doc{{"config", config_echo("validate", opts, {"system", "out"})},
             {"validation", to_json(report)}};
    emit(doc, opts.out_path);
    return report.all_ok() ? kExitOk : kExitCheckFailed;
}

int cmd_equilibria(const CommonOptions& opts) {
    const auto spec = load_system(opts);
    const auto result = satbasin::enumerate_equilibria(spec, opts.gp_tol);
    json doc{{"config", config_echo("equilibria", opts, {"system", "gp_tol", "out"})},
             {"result", to_json(result)}};
    bool ok = true;
    if (spec.m == 1) {
        const auto parity = satbasin::parity_check(spec, opts.gp_tol);
        doc["parity"] = to_json(parity);
        ok = parity.pass;
    }
    emit(doc, opts.out_path);
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_degree(const CommonOptions& opts) {
    const auto spec = load_system(opts);
    const auto check = satbasin::index_sum_check(spec, opts.radius, opts.seed);
    json doc{{"config", config_echo("degree", opts, {"system", "radius", "seed", "out"})},
             {"degree", to_json(check.degree)},
             {"index_sum", json{{"lhs", check.lhs}, {"rhs", check.rhs}, {"pass", check.pass}}}};
    bool ok = check.pass;
    if (spec.n == 2) {
        const int winding = satbasin::winding_number_2d(spec, check.radius);
        doc["winding_2d"] = winding;
        ok = ok && winding == check.rhs;
    }
    emit(doc, opts.out_path);
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_fate(const CommonOptions& opts) {
    const auto spec = load_system(opts);
    const Eigen::VectorXd x0 = parse_vector(opts.x_csv);
    satbasin::IntegratorOptions integ;
    integ.rel_tol = opts.rel_tol;
    integ.abs_tol = opts.abs_tol;
    const auto report = satbasin::classify_fate(spec, x0, opts.t_max, integ);
    json doc{{"config", config_echo("fate", opts, {"system", "x", "t_max", "rel_tol", "abs_tol", "out"})},
             {"fate", to_json(report)}};
    emit(doc, opts.out_path);
    return kExitOk;
}

int cmd_scan(const CommonOptions& opts) {
    const auto spec = load_system(opts);
    const Eigen::VectorXd direction = parse_vector(opts.x_csv);
    satbasin::ScanOptions scan_opts;
    scan_opts.tol = opts.tol;
    scan_opts.t_max = opts.t_max;
    const auto result = satbasin::boundary_ray_scan(spec, direction, scan_opts);
    json doc{{"config", config_echo("scan", opts, {"system", "x", "tol", "t_max", "out"})},
             {"scan", to_json(result)}};
    emit(doc, opts.out_path);
    return kExitOk;
}

int cmd_convexity(const CommonOptions& opts) {
    const auto spec = load_system(opts);
    const auto report = satbasin::convexity_probe_random(spec, opts.trials, opts.seed, opts.t_max);
    json doc{{"config", config_echo("convexity", opts, {"system", "trials", "seed", "t_max", "out"})},
             {"convexity", to_json(report)}};
    emit(doc, opts.out_path);
    return kExitOk;
}

int cmd_generate(const CommonOptions& opts, int n) {
    const auto spec = satbasin::random_antistable_system(n, opts.seed);
    json doc = satbasin::to_json(spec);
    emit(doc, opts.out_path);
    return kExitOk;
}

// Full reproduction of the bundled counterexample analysis. Every expected
// outcome is checked; mismatches are printed expected-vs-actual and flip the
// exit code. All bundle bytes are deterministic in (seed, rays, tol).
int cmd_reproduce(const CommonOptions& opts) {
    namespace fs = std::filesystem;
    const auto& spec = satbasin::counterexample_3d();
    const auto& pts = satbasin::counterexample_points();
    const fs::path bundle_dir = opts.out_path.empty() ? "reproduction" : opts.out_path;
    fs::create_directories(bundle_dir);

    std::vector<std::string> mismatches;
    auto expect = [&mismatches](bool ok, const std::string& what, const std::string& expected,
                                const std::string& actual) {
        if (!ok) mismatches.push_back(what + ": expected " + expected + ", got " + actual);
    };

    json summary;
    summary["config"] = json{{"command", "reproduce-paper"},
                             {"seed", opts.seed},
                             {"rays", opts.rays},
                             {"tol", opts.tol},
                             {"t_max", opts.t_max},
                             {"out", bundle_dir.string()}};

    {
        std::ofstream out(bundle_dir / "system.json");
        out << satbasin::counterexample_3d_json();
    }

    // 1. validation and closed-loop spectrum
    const auto validation = satbasin::validate_spec(spec);
    summary["validation"] = to_json(validation);
    expect(validation.all_ok(), "validation", "anti-stable, controllable, Hurwitz closed loop",
           "some check failed");
    const double expected_eigs[3] = {-3.0, -2.0, -1.0};
    for (int i = 0; i < 3; ++i) {
        const auto lambda = validation.eig_closed_loop(i);
        expect(std::abs(lambda.real() - expected_eigs[i]) <= 1e-9 && std::abs(lambda.imag()) <= 1e-9,
               "closed-loop eigenvalue " + std::to_string(i), std::to_string(expected_eigs[i]),
               std::to_string(lambda.real()));
    }

    // 2. equilibria and parity
    const auto enumeration = satbasin::enumerate_equilibria(spec);
    const auto parity = satbasin::parity_check(spec);
    summary["equilibria"] = to_json(enumeration);
    summary["parity"] = to_json(parity);
    expect(enumeration.equilibria.size() == 3, "equilibrium count", "3",
           std::to_string(enumeration.equilibria.size()));
    expect(parity.pass, "parity check", "pass", "fail");

    // 3. index sum identity
    const auto index_sum = satbasin::index_sum_check(spec, std::nullopt, opts.seed);
    summary["index_sum"] = to_json(index_sum);
    expect(index_sum.pass && index_sum.lhs == 1, "index sum", "lhs = rhs = 1",
           std::to_string(index_sum.lhs) + " vs " + std::to_string(index_sum.rhs));

    // 4. probe-point fates and their trajectories
    const auto certs = satbasin::make_fate_certificates(spec);
    summary["certificates"] = json{{"lyapunov", to_json(certs.lyapunov)},
                                   {"escape", to_json(certs.escape)}};
    const struct {
        const char* name;
        Eigen::Vector3d x;
        satbasin::FateVerdict expected;
    } probes[] = {
        {"p1", pts.p1, satbasin::FateVerdict::ConvergedToOrigin},
        {"p2", pts.p2, satbasin::FateVerdict::ConvergedToOrigin},
        {"p3", pts.p3, satbasin::FateVerdict::NotConverged},
    };
    json fates;
    for (const auto& probe : probes) {
        const auto fate = satbasin::classify_fate(spec, certs, probe.x, opts.t_max);
        fates[probe.name] = to_json(fate);
        expect(fate.verdict == probe.expected, std::string("fate of ") + probe.name,
               satbasin::fate_verdict_name(probe.expected), satbasin::fate_verdict_name(fate.verdict));
        const double horizon = std::min(fate.t_decided + 5.0, 40.0);
        const auto traj = satbasin::integrate_adaptive(spec, probe.x, std::max(horizon, 1.0));
        std::ofstream out(bundle_dir / (std::string("traj_") + probe.name + ".csv"));
        satbasin::write_trajectory_csv(out, traj);
    }
    summary["fates"] = std::move(fates);

    // 5. convexity violation at the bundled triple
    const auto convexity = satbasin::convexity_probe(spec, {}, opts.t_max);
    summary["convexity"] = to_json(convexity);
    expect(convexity.contains_reference_triple, "convexity probe", "midpoint violation at the bundled triple",
           "no violation");
    if (convexity.contains_reference_triple) {
        const auto& violation = convexity.violations.back();
        const double midpoint_err = (violation.midpoint - pts.p3).cwiseAbs().maxCoeff();
        summary["convexity_midpoint_error"] = midpoint_err;
        expect(midpoint_err <= 1e-6, "violation midpoint", "bundled third point to 6 decimals",
               std::to_string(midpoint_err));
    }

    // 6. boundary point cloud
    const auto cloud = satbasin::basin_point_cloud(spec, opts.rays, opts.seed, opts.tol);
    {
        std::ofstream out(bundle_dir / "point_cloud.csv");
        satbasin::write_point_cloud_csv(out, cloud);
    }
    int flagged = 0;
    double max_ok_width = 0.0;
    for (const auto& ray : cloud.rays) {
        if (ray.flag == satbasin::RayFlag::Ok)
            max_ok_width = std::max(max_ok_width, ray.r_hi - ray.r_lo);
        else
            ++flagged;
    }
    summary["point_cloud"] = json{{"rays", cloud.num_rays},
                                  {"seed", cloud.seed},
                                  {"tol", cloud.tol},
                                  {"flagged", flagged},
                                  {"max_unflagged_width", max_ok_width}};
    expect(max_ok_width <= opts.tol, "point cloud widths", "<= tol or flagged",
           std::to_string(max_ok_width));

    // Exploratory: the saturated equilibrium direction should meet the
    // boundary near ||x+|| (reported only, never gated).
    {
        const Eigen::VectorXd x_plus = -spec.A.partialPivLu().solve(spec.B.col(0)) * spec.M;
        const double target = x_plus.norm();
        json probe{{"target_radius", target}};
        try {
            satbasin::ScanOptions scan_opts;
            scan_opts.tol = opts.tol;
            scan_opts.t_max = opts.t_max;
            const auto scan = satbasin::boundary_ray_scan(spec, certs, x_plus, scan_opts);
            probe["r_lo"] = scan.r_lo;
            probe["r_hi"] = scan.r_hi;
            probe["within_0.1"] = scan.r_lo - 0.1 <= target && target <= scan.r_hi + 0.1;
        } catch (const satbasin::GeometryError& e) {
            probe["error"] = e.what();
        }
        summary["boundary_distance_probe"] = std::move(probe);
    }

    summary["pass"] = mismatches.empty();
    summary["mismatches"] = mismatches;
    {
        std::ofstream out(bundle_dir / "summary.json");
        out << summary.dump(2) << "\n";
    }

    std::cout << "bundle written to " << bundle_dir.string() << "\n";
    std::cout << "p1: " << (summary["fates"]["p1"]["verdict"] == "converged_to_origin" ? "In" : "Out/?")
              << ", p2: " << (summary["fates"]["p2"]["verdict"] == "converged_to_origin" ? "In" : "Out/?")
              << ", p3: " << (summary["fates"]["p3"]["verdict"] == "not_converged" ? "Out" : "In/?") << "\n";
    if (!mismatches.empty()) {
        std::cerr << "reproduction mismatches:\n";
        for (const auto& m : mismatches) std::cerr << "  - " << m << "\n";
        return kExitCheckFailed;
    }
    std::cout << "all expected outcomes reproduced\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analysis toolkit for linear systems with saturated state feedback"};
    app.require_subcommand(1);

    CommonOptions opts;
    int gen_n = 3;

    auto add_common = [&opts](CLI::App* cmd, bool needs_system = true) {
        if (needs_system) cmd->add_option("--system", opts.system_path, "system JSON file")->required();
        cmd->add_option("--out", opts.out_path, "output path (default: stdout)");
    };

    auto* validate = app.add_subcommand("validate", "check anti-stability, controllability and closed-loop Hurwitz");
    add_common(validate);

    auto* equilibria = app.add_subcommand("equilibria", "enumerate equilibria and run the parity check");
    add_common(equilibria);
    equilibria->add_option("--tol", opts.gp_tol, "general-position tolerance");

    auto* degree = app.add_subcommand("degree", "ball degree with index-sum cross-check");
    add_common(degree);
    double radius_value = 0.0;
    auto* radius_opt = degree->add_option("--radius", radius_value, "ball radius (default: auto)");
    degree->add_option("--seed", opts.seed, "regular-value seed");

    auto* fate = app.add_subcommand("fate", "certificate-backed trajectory verdict for one state");
    add_common(fate);
    fate->add_option("--x", opts.x_csv, "initial state, comma separated")->required();
    fate->add_option("--t-max", opts.t_max, "simulation horizon");
    fate->add_option("--rel-tol", opts.rel_tol, "integrator relative tolerance");
    fate->add_option("--abs-tol", opts.abs_tol, "integrator absolute tolerance");

    auto* scan = app.add_subcommand("scan", "bisect the basin boundary along a ray");
    add_common(scan);
    scan->add_option("--x", opts.x_csv, "ray direction, comma separated")->required();
    scan->add_option("--tol", opts.tol, "bracket width tolerance");
    scan->add_option("--t-max", opts.t_max, "per-fate simulation horizon");

    auto* convexity = app.add_subcommand("convexity", "midpoint convexity probe with random pairs");
    add_common(convexity);
    convexity->add_option("--trials", opts.trials, "number of random pairs");
    convexity->add_option("--seed", opts.seed, "pair-sampling seed");
    convexity->add_option("--t-max", opts.t_max, "per-fate simulation horizon");

    auto* generate = app.add_subcommand("generate", "write a seeded random anti-stable single-input system");
    generate->add_option("--n", gen_n, "state dimension (2..8)");
    generate->add_option("--seed", opts.seed, "generator seed");
    generate->add_option("--out", opts.out_path, "output path (default: stdout)");

    auto* reproduce = app.add_subcommand("reproduce-paper", "full analysis bundle for the built-in counterexample system");
    reproduce->add_option("--out", opts.out_path, "bundle directory (default: reproduction)");
    reproduce->add_option("--rays", opts.rays, "number of boundary rays");
    reproduce->add_option("--seed", opts.seed, "sampling seed");
    reproduce->add_option("--tol", opts.tol, "bracket width tolerance");
    reproduce->add_option("--t-max", opts.t_max, "per-fate simulation horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (radius_opt->count() > 0) opts.radius = radius_value;

    try {
        if (validate->parsed()) return cmd_validate(opts);
        if (equilibria->parsed()) return cmd_equilibria(opts);
        if (degree->parsed()) return cmd_degree(opts);
        if (fate->parsed()) return cmd_fate(opts);
        if (scan->parsed()) return cmd_scan(opts);
        if (convexity->parsed()) return cmd_convexity(opts);
        if (generate->parsed()) return cmd_generate(opts, gen_n);
        if (reproduce->parsed()) return cmd_reproduce(opts);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const satbasin::Error& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}

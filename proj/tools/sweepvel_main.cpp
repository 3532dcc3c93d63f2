// Command-line front end: load problem files, run the catching-up solver,
// run the named verification suites, emit trajectories and reports.
//
// Exit codes: 0 pass, 1 usage or malformed input, 2 numerical failure.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sweepvel/sweepvel.hpp"

namespace {

using namespace sweepvel;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;

struct CommonFlags {
    std::optional<std::size_t> steps;
    std::optional<double> tol;
    std::uint64_t seed = 20250810;
    std::string out;
    std::string format = "csv";
};

void apply_overrides(LoadedProblem& problem, const CommonFlags& flags) {
    if (flags.steps) problem.n_steps = *flags.steps;
    if (flags.tol) problem.solver.tol = *flags.tol;
}

json trajectory_to_json(const Trajectory& traj) {
    return json{{"times", traj.times},
                {"states", traj.states},
                {"velocities", traj.velocities},
                {"residuals", traj.residuals}};
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << body;
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// Deterministic sample of distinct initial pairs inside C(0).
std::vector<std::pair<Vec, Vec>> sample_initial_pairs(const ProblemSpec& spec, std::size_t count,
                                                      std::uint64_t seed) {
    const ConvexSetDesc c0 = spec.C.at(0.0);
    double r = enclosing_radius(c0);
    if (r <= 0.0) r = 1.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-r, r);
    auto draw = [&]() {
        Vec p(spec.dim());
        for (auto& e : p) e = dist(rng);
        return project(c0, p);
    };
    std::vector<std::pair<Vec, Vec>> pairs;
    while (pairs.size() < count) {
        Vec a = draw(), b = draw();
        if (distance(a, b) >= 1e-6) pairs.emplace_back(std::move(a), std::move(b));
    }
    return pairs;
}

// Certified second solutions reached from u by sliding velocities along ker A0.
std::vector<Trajectory> kernel_companions(const ProblemSpec& spec, const Trajectory& u,
                                          double magnitude, double tol) {
    std::vector<Trajectory> found;
    for (const auto& d : spec.A0.spectrum().kernel_basis) {
        for (const double sign : {1.0, -1.0}) {
            const KernelPerturbation pert =
                sample_kernel_perturbation(spec, u, scaled(sign, d), magnitude, tol);
            const Trajectory candidate = apply_perturbation(u, pert.x);
            if (certify(spec, candidate, tol).is_solution && c0_distance(u, candidate) > 1e-6)
                found.push_back(candidate);
        }
    }
    return found;
}

int cmd_solve(const std::string& spec_path, const CommonFlags& flags) {
    LoadedProblem problem = parse_problem_file(spec_path);
    apply_overrides(problem, flags);

    Trajectory traj;
    try {
        traj = solve(problem.spec, problem.n_steps, problem.solver);
    } catch (const NoConverge& e) {
        std::cerr << "solver did not converge at step " << e.step << ": " << e.what() << "\n";
        return exit_numerical;
    }

    const double certify_tol = std::max(1e-9, 10.0 * problem.solver.tol);
    const CertifyResult cert = certify(problem.spec, traj, certify_tol);
    double max_step_residual = 0.0;
    for (const double r : traj.residuals) max_step_residual = std::max(max_step_residual, r);

    const std::string out = flags.out.empty() ? "trajectory.csv" : flags.out;
    if (flags.format == "json") {
        write_json_file(out, trajectory_to_json(traj));
    } else {
        std::ostringstream csv;
        trajectory_to_csv(traj, csv);
        write_text_file(out, csv.str());
    }

    const json summary{{"spec", spec_path},
                       {"steps", problem.n_steps},
                       {"u0_in_C0", problem.spec.u0_in_C0},
                       {"max_step_residual", max_step_residual},
                       {"max_velocity_norm", max_velocity_norm(traj)},
                       {"c0_norm", c0_norm(traj)},
                       {"w11_norm", w11_norm(traj)},
                       {"certified", cert.is_solution},
                       {"certify_tol", certify_tol},
                       {"certify_residual", cert.max_residual},
                       {"trajectory", out}};
    write_json_file(out + ".summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    return cert.is_solution ? exit_ok : exit_numerical;
}

// Bundled default instances, one per verification suite.
LoadedProblem default_problem(const std::string& suite) {
    auto make = [](SymmetricOperator a0, SymmetricOperator a1, TimeFunction f, MovingSet c, Vec u0,
                   double t, std::size_t n) {
        return LoadedProblem{ProblemSpec(std::move(a0), std::move(a1), std::move(f), std::move(c),
                                         std::move(u0), t),
                             n, VISolveConfig{}};
    };
    const auto unit_ball = ConvexSetDesc::ball({0.0, 0.0}, 1.0);
    const auto line = ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}});
    if (suite == "sensitivity-a0")
        return make(SymmetricOperator::diagonal({2.0, 0.5}), SymmetricOperator::zero(2),
                    TimeFunction::zero(2),
                    MovingSet::fixed(unit_ball, 1.0, ScalarTimeFunction::zero()), {0.0, 0.0}, 1.0,
                    2000);
    if (suite == "sensitivity-a1")
        return make(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                    TimeFunction::zero(2),
                    MovingSet::fixed(unit_ball, 2.0, ScalarTimeFunction::zero()), {0.0, 0.0}, 2.0,
                    2000);
    if (suite == "bound-h3a")
        return make(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                    TimeFunction::constant({2.0, 1.0}),
                    MovingSet::fixed(unit_ball, 1.0, ScalarTimeFunction::zero()), {0.0, 0.0}, 1.0,
                    1000);
    if (suite == "bound-h3b")
        return make(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                    TimeFunction::zero(2),
                    MovingSet::fixed(unit_ball, 1.0, ScalarTimeFunction::zero()), {0.0, 0.0}, 1.0,
                    1000);
    if (suite == "bound-h3c")
        return make(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                    TimeFunction::zero(2),
                    MovingSet(TranslateFamily{unit_ball,
                                              TimeFunction::polynomial({{0.0, 0.0}, {1.0, 0.0}})},
                              1.0, std::nullopt, 3.0),
                    {0.0, 0.0}, 1.0, 1000);
    if (suite == "convexity")
        return make(SymmetricOperator::zero(2), SymmetricOperator::diagonal({0.0, 1.0}),
                    TimeFunction::polynomial({{0.0, 0.0}, {0.0, 1.0}}), MovingSet::fixed(line, 1.0),
                    {0.0, 0.0}, 1.0, 1000);
    if (suite == "outer-estimate" || suite == "kernel-perturb") {
        if (suite == "outer-estimate")
            return make(SymmetricOperator::diagonal({0.0, 1.0}), SymmetricOperator::diagonal({0.0, 1.0}),
                        TimeFunction::polynomial({{0.0, 0.0}, {0.0, 1.0}}),
                        MovingSet::fixed(line, 1.0), {0.0, 0.0}, 1.0, 1000);
        return make(SymmetricOperator::diagonal({0.0, 1.0}), SymmetricOperator::zero(2),
                    TimeFunction::sinusoid({0.0, 0.0}, {0.0, 1.0}, 1.0, 0.0),
                    MovingSet(BoxPathFamily{TimeFunction::polynomial({{-2.0, 0.0}, {0.0, 0.25}}),
                                            TimeFunction::polynomial({{2.0, 0.0}, {0.0, 0.25}})},
                              1.0),
                    {0.0, 0.0}, 1.0, 1000);
    }
    throw std::runtime_error("suite '" + suite + "' has no bundled default problem");
}

int finish_report(const std::string& suite, const json& report, bool pass,
                  const std::string& out_path, const std::string& fail_detail) {
    const std::string out = out_path.empty() ? suite + "-report.json" : out_path;
    write_json_file(out, report);
    std::cout << report.dump(2) << "\n";
    if (!pass) {
        std::cerr << "verification failed: " << fail_detail << "\n";
        return exit_numerical;
    }
    return exit_ok;
}

int cmd_verify(const std::string& suite, const std::string& spec_path, const CommonFlags& flags) {
    static const std::vector<std::string> known{
        "sensitivity-a0", "sensitivity-a1", "bound-h3a",      "bound-h3b",      "bound-h3c",
        "gronwall",       "convexity",      "outer-estimate", "kernel-perturb", "nonclosedness"};
    if (std::find(known.begin(), known.end(), suite) == known.end()) {
        std::cerr << "unknown suite '" << suite << "'\n";
        return exit_usage;
    }
    const bool needs_problem = suite != "gronwall" && suite != "nonclosedness";
    std::optional<LoadedProblem> loaded;
    if (needs_problem) {
        loaded = spec_path.empty() ? default_problem(suite) : parse_problem_file(spec_path);
        apply_overrides(*loaded, flags);
    }

    if (suite == "sensitivity-a0" || suite == "sensitivity-a1") {
        const auto mode = suite == "sensitivity-a0" ? SensitivityMode::a0_coercive
                                                    : SensitivityMode::a1_coercive;
        const auto pairs = sample_initial_pairs(loaded->spec, 10, flags.seed);
        const auto report =
            sensitivity_experiment(loaded->spec, pairs, mode, loaded->n_steps, 0.05, loaded->solver);
        std::cout << "max_ratio " << report.max_ratio << " vs modulus "
                  << report.modulus_theoretical << " (slack 0.05)\n";
        return finish_report(suite, report_to_json(report), report.pass, flags.out,
                             "max_ratio " + std::to_string(report.max_ratio) + " exceeds modulus " +
                                 std::to_string(report.modulus_theoretical) + " * 1.05");
    }

    if (suite == "bound-h3a" || suite == "bound-h3b" || suite == "bound-h3c") {
        const BoundMode mode = suite == "bound-h3a" ? BoundMode::h3a
                               : suite == "bound-h3b" ? BoundMode::h3b
                                                      : BoundMode::h3c;
        BoundParams params;
        params.n_steps = loaded->n_steps;
        params.solver = loaded->solver;
        const auto report = boundedness_bound(loaded->spec, mode, params);
        return finish_report(suite, report_to_json(report), report.pass, flags.out,
                             "observed C0 norm " + std::to_string(report.observed_c0) +
                                 " against bound " + std::to_string(report.bound));
    }

    if (suite == "gronwall") {
        // Equality-case audit: f = a exp(bt) saturates the hypothesis, so the
        // cumulative integral must sit within quadrature error of the bound.
        json cases = json::array();
        bool pass = true;
        double worst_gap = 0.0;
        for (const auto& [a, b] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}}) {
            const std::size_t n = 20000;
            std::vector<double> samples(n + 1);
            for (std::size_t i = 0; i <= n; ++i)
                samples[i] = a * std::exp(b * (static_cast<double>(i) / static_cast<double>(n)));
            const auto check = check_gronwall(samples, 1.0, a, b);
            const bool near_equality = check.max_conclusion_gap >= -1e-4;
            pass = pass && check.hypothesis_holds && check.conclusion_holds && near_equality;
            worst_gap = std::max(worst_gap, std::abs(check.max_conclusion_gap));
            json cj = report_to_json(check);
            cj["a"] = a;
            cj["b"] = b;
            cases.push_back(std::move(cj));
        }
        return finish_report(suite, json{{"cases", cases}, {"pass", pass}}, pass, flags.out,
                             "equality-case residual " + std::to_string(worst_gap));
    }

    if (suite == "convexity") {
        const Trajectory u = solve(loaded->spec, loaded->n_steps, loaded->solver);
        const auto companions = kernel_companions(loaded->spec, u, 1.0, 1e-9);
        if (companions.empty()) {
            // No second solution reachable: fall back to the uniqueness
            // cross-check (two runs, different warm starts, must coincide).
            VISolveConfig warm = loaded->solver;
            warm.warm_start = project(loaded->spec.C.at(loaded->spec.T),
                                      Vec(loaded->spec.dim(), 0.9));
            const Trajectory v = solve(loaded->spec, loaded->n_steps, warm);
            const double d = c0_distance(u, v);
            const bool pass = d <= 1e-9;
            return finish_report(suite,
                                 json{{"mode", "uniqueness-cross-check"}, {"c0_distance", d},
                                      {"pass", pass}},
                                 pass, flags.out, "warm-start runs differ by " + std::to_string(d));
        }
        const auto report =
            convexity_check(loaded->spec, u, companions.front(), {0.25, 0.5, 0.75}, 1e-9);
        return finish_report(suite, report_to_json(report), report.pass, flags.out,
                             "a velocity blend failed certification");
    }

    if (suite == "outer-estimate") {
        const Trajectory u = solve(loaded->spec, loaded->n_steps, loaded->solver);
        auto companions = kernel_companions(loaded->spec, u, 1.0, 1e-9);
        companions.push_back(u);
        bool pass = true;
        for (const auto& v : companions)
            pass = pass && kernel_set_membership(loaded->spec, u, v, 1e-9);
        const json report{{"certified_solutions", companions.size()}, {"pass", pass}};
        return finish_report(suite, report, pass, flags.out,
                             "a certified solution left u + K");
    }

    if (suite == "kernel-perturb") {
        const Trajectory u = solve(loaded->spec, loaded->n_steps, loaded->solver);
        const auto& kernel = loaded->spec.A0.spectrum().kernel_basis;
        if (kernel.empty()) {
            std::cerr << "kernel-perturb: ker A0 is trivial for this problem\n";
            return exit_numerical;
        }
        const auto pert = sample_kernel_perturbation(loaded->spec, u, kernel.front(), 1.0, 1e-9);
        json report{{"a1_is_zero", pert.a1_is_zero},
                    {"f_orthogonal_to_kernel", pert.f_orthogonal_to_kernel}};
        if (!pert.a1_is_zero || !pert.f_orthogonal_to_kernel) {
            report["pass"] = false;
            return finish_report(suite, report, false, flags.out,
                                 std::string("theorem hypothesis violated: ") +
                                     (!pert.a1_is_zero ? "A1 is not zero"
                                                       : "f is not orthogonal to ker A0"));
        }
        const CertifyResult cert = certify(loaded->spec, apply_perturbation(u, pert.x), 1e-9);
        report["certify_residual"] = cert.max_residual;
        report["pass"] = cert.is_solution;
        return finish_report(suite, report, cert.is_solution, flags.out,
                             "perturbed trajectory failed certification with residual " +
                                 std::to_string(cert.max_residual));
    }

    if (suite == "nonclosedness") {
        const auto table = nonclosedness_demo({10u, 100u, 1000u});
        const bool pass = table.c0_within_bound && table.w11_strictly_increasing;
        return finish_report(suite, report_to_json(table), pass, flags.out,
                             table.c0_within_bound ? "W11 norms are not strictly increasing"
                                                   : "a C0 distance exceeded 2/k^2");
    }

    std::cerr << "unknown suite '" << suite << "'\n";
    return exit_usage;
}

int cmd_demo(const std::string& name, const std::string& lambdas_arg, const CommonFlags& flags) {
    if (name == "nonclosedness") {
        const auto table = nonclosedness_demo({10u, 100u, 1000u});
        std::ostringstream csv;
        nonclosedness_to_csv(table, csv);
        const std::string out = flags.out.empty() ? "nonclosedness.csv" : flags.out;
        write_text_file(out, csv.str());
        std::cout << csv.str();
        return exit_ok;
    }
    if (name == "unbounded") {
        const LoadedProblem problem = default_problem("outer-estimate");
        const std::size_t n = flags.steps.value_or(problem.n_steps);
        std::vector<double> lambdas{-2.0, 0.0, 3.0};
        if (!lambdas_arg.empty()) {
            lambdas.clear();
            std::istringstream in(lambdas_arg);
            std::string tok;
            while (std::getline(in, tok, ',')) lambdas.push_back(std::stod(tok));
        }
        bool all_ok = true;
        for (const double lambda : lambdas) {
            const Trajectory traj = Trajectory::from_velocities(
                {0.0, 0.0}, problem.spec.T, std::vector<Vec>(n, Vec{lambda, 0.0}));
            const CertifyResult cert = certify(problem.spec, traj, 1e-9);
            all_ok = all_ok && cert.is_solution;
            std::ostringstream csv;
            trajectory_to_csv(traj, csv);
            std::ostringstream path;
            path << (flags.out.empty() ? std::string("unbounded") : flags.out) << "_lambda_"
                 << lambda << ".csv";
            write_text_file(path.str(), csv.str());
            std::cout << "lambda " << lambda << ": certified=" << cert.is_solution
                      << " c0_norm=" << c0_norm(traj) << " -> " << path.str() << "\n";
        }
        return all_ok ? exit_ok : exit_numerical;
    }
    std::cerr << "unknown demo '" << name << "'\n";
    return exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("SWEEPVEL_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) sweepvel::set_max_threads(static_cast<std::size_t>(n));
    }

    CLI::App app{"solver and verification harness for sweeping processes with velocity constraints"};
    app.require_subcommand(1);
    CommonFlags flags;

    std::string spec_path;
    auto* solve_cmd = app.add_subcommand("solve", "integrate a problem file and certify the result");
    solve_cmd->add_option("spec", spec_path, "problem file (JSON)")->required();
    solve_cmd->add_option("--steps", flags.steps, "override the grid size N");
    solve_cmd->add_option("--tol", flags.tol, "override the VI residual tolerance");
    solve_cmd->add_option("--out", flags.out, "trajectory output path");
    solve_cmd->add_option("--format", flags.format, "trajectory format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string suite;
    std::string verify_spec;
    auto* verify_cmd = app.add_subcommand("verify", "run a named verification suite");
    verify_cmd->add_option("suite", suite,
                           "one of: sensitivity-a0, sensitivity-a1, bound-h3a, bound-h3b, "
                           "bound-h3c, gronwall, convexity, outer-estimate, kernel-perturb, "
                           "nonclosedness")
        ->required();
    verify_cmd->add_option("spec", verify_spec, "problem file (defaults to the bundled instance)");
    verify_cmd->add_option("--steps", flags.steps, "override the grid size N");
    verify_cmd->add_option("--tol", flags.tol, "override the VI residual tolerance");
    verify_cmd->add_option("--seed", flags.seed, "seed for randomized initial pairs");
    verify_cmd->add_option("--out", flags.out, "report output path");

    std::string demo_name;
    std::string lambdas_arg;
    auto* demo_cmd = app.add_subcommand("demo", "emit a worked-example dataset");
    demo_cmd->add_option("name", demo_name, "one of: nonclosedness, unbounded")->required();
    demo_cmd->add_option("--lambdas", lambdas_arg, "comma-separated family parameters");
    demo_cmd->add_option("--steps", flags.steps, "grid size for generated trajectories");
    demo_cmd->add_option("--out", flags.out, "output path (or prefix)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(spec_path, flags);
        if (verify_cmd->parsed()) return cmd_verify(suite, verify_spec, flags);
        return cmd_demo(demo_name, lambdas_arg, flags);
    } catch (const sweepvel::SpecParseError& e) {
        std::cerr << e.what() << "\n";
        return exit_usage;
    } catch (const sweepvel::NoConverge& e) {
        std::cerr << e.what() << "\n";
        return exit_numerical;
    } catch (const sweepvel::DykstraNoConverge& e) {
        std::cerr << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return exit_usage;
    }
}

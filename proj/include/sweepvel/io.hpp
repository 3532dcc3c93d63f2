#ifndef SWEEPVEL_IO_HPP
#define SWEEPVEL_IO_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sweepvel/analysis.hpp"
#include "sweepvel/integrate.hpp"

namespace sweepvel {

using nlohmann::json;

struct SpecParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A parsed problem file: the instance plus the requested grid and solver
/// configuration.
struct LoadedProblem {
    ProblemSpec spec;
    std::size_t n_steps;
    VISolveConfig solver;
};

namespace io_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw SpecParseError("spec error at '" + where + "': " + what);
}

inline void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
}

/// Unknown keys are rejected so typos cannot silently change a problem.
inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) fail(where, "unknown key '" + key + "'");
    }
}

inline const json& require_key(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
    return j.at(key);
}

inline double parse_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

inline std::size_t parse_count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) fail(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

inline Vec parse_vector(const json& j, const std::string& where, std::size_t dim) {
    if (!j.is_array()) fail(where, "expected an array");
    Vec v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(parse_number(j[i], where + "[" + std::to_string(i) + "]"));
    if (dim != 0 && v.size() != dim)
        fail(where, "expected " + std::to_string(dim) + " components, got " +
                        std::to_string(v.size()));
    return v;
}

inline std::vector<Vec> parse_vector_list(const json& j, const std::string& where,
                                          std::size_t dim) {
    if (!j.is_array()) fail(where, "expected an array of vectors");
    std::vector<Vec> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_vector(j[i], where + "[" + std::to_string(i) + "]", dim));
    return out;
}

inline SymmetricOperator parse_operator(const json& j, const std::string& where,
                                        std::size_t dim) {
    const std::vector<Vec> rows = parse_vector_list(j, where, dim);
    if (rows.size() != dim) fail(where, "expected " + std::to_string(dim) + " rows");
    std::vector<double> entries;
    entries.reserve(dim * dim);
    for (const auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
    try {
        return SymmetricOperator(dim, std::move(entries));
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
}

inline TimeFunction parse_time_function(const json& j, const std::string& where, std::size_t dim,
                                        double horizon) {
    require_object(j, where);
    const std::string kind = require_key(j, where, "kind").get<std::string>();
    if (kind == "zero") {
        check_keys(j, where, {"kind"});
        return TimeFunction::zero(dim);
    }
    if (kind == "polynomial") {
        check_keys(j, where, {"kind", "coefficients"});
        return TimeFunction::polynomial(
            parse_vector_list(require_key(j, where, "coefficients"), where + ".coefficients", dim));
    }
    if (kind == "sinusoid") {
        check_keys(j, where, {"kind", "offset", "amplitude", "omega", "phase"});
        return TimeFunction::sinusoid(
            parse_vector(require_key(j, where, "offset"), where + ".offset", dim),
            parse_vector(require_key(j, where, "amplitude"), where + ".amplitude", dim),
            parse_number(require_key(j, where, "omega"), where + ".omega"),
            parse_number(require_key(j, where, "phase"), where + ".phase"));
    }
    if (kind == "samples") {
        check_keys(j, where, {"kind", "values"});
        return TimeFunction::samples(
            parse_vector_list(require_key(j, where, "values"), where + ".values", dim), horizon);
    }
    fail(where, "unknown time-function kind '" + kind + "'");
}

inline ScalarTimeFunction parse_scalar_function(const json& j, const std::string& where,
                                                double horizon) {
    require_object(j, where);
    const std::string kind = require_key(j, where, "kind").get<std::string>();
    if (kind == "zero") {
        check_keys(j, where, {"kind"});
        return ScalarTimeFunction::zero();
    }
    if (kind == "polynomial") {
        check_keys(j, where, {"kind", "coefficients"});
        const json& c = require_key(j, where, "coefficients");
        if (!c.is_array()) fail(where + ".coefficients", "expected an array");
        std::vector<double> coeffs;
        for (std::size_t i = 0; i < c.size(); ++i)
            coeffs.push_back(parse_number(c[i], where + ".coefficients[" + std::to_string(i) + "]"));
        return ScalarTimeFunction::polynomial(std::move(coeffs));
    }
    if (kind == "sinusoid") {
        check_keys(j, where, {"kind", "offset", "amplitude", "omega", "phase"});
        return ScalarTimeFunction::sinusoid(
            parse_number(require_key(j, where, "offset"), where + ".offset"),
            parse_number(require_key(j, where, "amplitude"), where + ".amplitude"),
            parse_number(require_key(j, where, "omega"), where + ".omega"),
            parse_number(require_key(j, where, "phase"), where + ".phase"));
    }
    if (kind == "samples") {
        check_keys(j, where, {"kind", "values"});
        const json& c = require_key(j, where, "values");
        if (!c.is_array()) fail(where + ".values", "expected an array");
        std::vector<double> values;
        for (std::size_t i = 0; i < c.size(); ++i)
            values.push_back(parse_number(c[i], where + ".values[" + std::to_string(i) + "]"));
        return ScalarTimeFunction::samples(std::move(values), horizon);
    }
    fail(where, "unknown scalar-function kind '" + kind + "'");
}

inline ConvexSetDesc parse_set(const json& j, const std::string& where, std::size_t dim) {
    require_object(j, where);
    const std::string type = require_key(j, where, "type").get<std::string>();
    try {
        if (type == "whole_space") {
            check_keys(j, where, {"type"});
            return ConvexSetDesc::whole_space(dim);
        }
        if (type == "singleton") {
            check_keys(j, where, {"type", "point"});
            return ConvexSetDesc::singleton(
                parse_vector(require_key(j, where, "point"), where + ".point", dim));
        }
        if (type == "ball") {
            check_keys(j, where, {"type", "center", "radius"});
            return ConvexSetDesc::ball(
                parse_vector(require_key(j, where, "center"), where + ".center", dim),
                parse_number(require_key(j, where, "radius"), where + ".radius"));
        }
        if (type == "box") {
            check_keys(j, where, {"type", "lo", "hi"});
            return ConvexSetDesc::box(parse_vector(require_key(j, where, "lo"), where + ".lo", dim),
                                      parse_vector(require_key(j, where, "hi"), where + ".hi", dim));
        }
        if (type == "halfspace") {
            check_keys(j, where, {"type", "normal", "offset"});
            return ConvexSetDesc::halfspace(
                parse_vector(require_key(j, where, "normal"), where + ".normal", dim),
                parse_number(require_key(j, where, "offset"), where + ".offset"));
        }
        if (type == "hyperplane") {
            check_keys(j, where, {"type", "normal", "offset"});
            return ConvexSetDesc::hyperplane(
                parse_vector(require_key(j, where, "normal"), where + ".normal", dim),
                parse_number(require_key(j, where, "offset"), where + ".offset"));
        }
        if (type == "affine_subspace") {
            check_keys(j, where, {"type", "point", "basis"});
            return ConvexSetDesc::affine_subspace(
                parse_vector(require_key(j, where, "point"), where + ".point", dim),
                parse_vector_list(require_key(j, where, "basis"), where + ".basis", dim));
        }
        if (type == "intersection") {
            check_keys(j, where, {"type", "members", "witness"});
            const json& mj = require_key(j, where, "members");
            if (!mj.is_array()) fail(where + ".members", "expected an array");
            std::vector<ConvexSetDesc> members;
            for (std::size_t i = 0; i < mj.size(); ++i)
                members.push_back(parse_set(mj[i], where + ".members[" + std::to_string(i) + "]", dim));
            return ConvexSetDesc::intersection(
                std::move(members),
                parse_vector(require_key(j, where, "witness"), where + ".witness", dim));
        }
    } catch (const SpecParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    fail(where, "unknown set type '" + type + "'");
}

inline MovingSet parse_moving_set(const json& j, const std::string& where, std::size_t dim,
                                  double horizon) {
    require_object(j, where);
    const std::string family = require_key(j, where, "family").get<std::string>();
    std::optional<ScalarTimeFunction> g;
    if (j.contains("g")) g = parse_scalar_function(j.at("g"), where + ".g", horizon);
    std::optional<double> beta;
    if (j.contains("beta")) beta = parse_number(j.at("beta"), where + ".beta");

    try {
        if (family == "static") {
            check_keys(j, where, {"family", "set", "g", "beta"});
            return MovingSet(StaticFamily{parse_set(require_key(j, where, "set"), where + ".set", dim)},
                             horizon, std::move(g), beta);
        }
        if (family == "translate") {
            check_keys(j, where, {"family", "set", "path", "g", "beta"});
            return MovingSet(
                TranslateFamily{
                    parse_set(require_key(j, where, "set"), where + ".set", dim),
                    parse_time_function(require_key(j, where, "path"), where + ".path", dim, horizon)},
                horizon, std::move(g), beta);
        }
        if (family == "ball_path") {
            check_keys(j, where, {"family", "center", "radius", "g", "beta"});
            return MovingSet(
                BallPathFamily{
                    parse_time_function(require_key(j, where, "center"), where + ".center", dim,
                                        horizon),
                    parse_scalar_function(require_key(j, where, "radius"), where + ".radius",
                                          horizon)},
                horizon, std::move(g), beta);
        }
        if (family == "box_path") {
            check_keys(j, where, {"family", "lo", "hi", "g", "beta"});
            return MovingSet(
                BoxPathFamily{
                    parse_time_function(require_key(j, where, "lo"), where + ".lo", dim, horizon),
                    parse_time_function(require_key(j, where, "hi"), where + ".hi", dim, horizon)},
                horizon, std::move(g), beta);
        }
    } catch (const SpecParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    fail(where, "unknown moving-set family '" + family + "'");
}

inline VISolveConfig parse_solver(const json& j, const std::string& where) {
    check_keys(j, where, {"tol", "max_iter", "eps0", "theta", "stages"});
    VISolveConfig cfg;
    if (j.contains("tol")) cfg.tol = parse_number(j.at("tol"), where + ".tol");
    if (j.contains("max_iter")) cfg.max_iter = parse_count(j.at("max_iter"), where + ".max_iter");
    if (j.contains("eps0")) cfg.eps0 = parse_number(j.at("eps0"), where + ".eps0");
    if (j.contains("theta")) cfg.theta = parse_number(j.at("theta"), where + ".theta");
    if (j.contains("stages")) cfg.stages = parse_count(j.at("stages"), where + ".stages");
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    return cfg;
}

// --- serialization -------------------------------------------------------

inline json vec_to_json(const Vec& v) { return json(v); }

inline json operator_to_json(const SymmetricOperator& a) {
    json rows = json::array();
    for (std::size_t i = 0; i < a.dim(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < a.dim(); ++j) row.push_back(a.entry(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json time_function_to_json(const TimeFunction& f) {
    json j;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, TimeFunction::Zero>) {
                j["kind"] = "zero";
            } else if constexpr (std::is_same_v<T, TimeFunction::Polynomial>) {
                j["kind"] = "polynomial";
                j["coefficients"] = d.coefficients;
            } else if constexpr (std::is_same_v<T, TimeFunction::Sinusoid>) {
                j["kind"] = "sinusoid";
                j["offset"] = d.offset;
                j["amplitude"] = d.amplitude;
                j["omega"] = d.omega;
                j["phase"] = d.phase;
            } else {
                j["kind"] = "samples";
                j["values"] = d.values;
            }
        },
        f.desc());
    return j;
}

inline json scalar_function_to_json(const ScalarTimeFunction& f) {
    json j;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ScalarTimeFunction::Zero>) {
                j["kind"] = "zero";
            } else if constexpr (std::is_same_v<T, ScalarTimeFunction::Polynomial>) {
                j["kind"] = "polynomial";
                j["coefficients"] = d.coefficients;
            } else if constexpr (std::is_same_v<T, ScalarTimeFunction::Sinusoid>) {
                j["kind"] = "sinusoid";
                j["offset"] = d.offset;
                j["amplitude"] = d.amplitude;
                j["omega"] = d.omega;
                j["phase"] = d.phase;
            } else {
                j["kind"] = "samples";
                j["values"] = d.values;
            }
        },
        f.desc());
    return j;
}

inline json set_to_json(const ConvexSetDesc& s) {
    json j;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, WholeSpace>) {
                j["type"] = "whole_space";
            } else if constexpr (std::is_same_v<T, Singleton>) {
                j["type"] = "singleton";
                j["point"] = d.point;
            } else if constexpr (std::is_same_v<T, Ball>) {
                j["type"] = "ball";
                j["center"] = d.center;
                j["radius"] = d.radius;
            } else if constexpr (std::is_same_v<T, Box>) {
                j["type"] = "box";
                j["lo"] = d.lo;
                j["hi"] = d.hi;
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                j["type"] = "halfspace";
                j["normal"] = d.normal;
                j["offset"] = d.offset;
            } else if constexpr (std::is_same_v<T, Hyperplane>) {
                j["type"] = "hyperplane";
                j["normal"] = d.normal;
                j["offset"] = d.offset;
            } else if constexpr (std::is_same_v<T, AffineSubspace>) {
                j["type"] = "affine_subspace";
                j["point"] = d.point;
                j["basis"] = d.basis;
            } else {
                j["type"] = "intersection";
                json members = json::array();
                for (const auto& m : d.members) members.push_back(set_to_json(m));
                j["members"] = std::move(members);
                j["witness"] = d.witness;
            }
        },
        s.desc());
    return j;
}

inline json moving_set_to_json(const MovingSet& m) {
    json j;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, StaticFamily>) {
                j["family"] = "static";
                j["set"] = set_to_json(d.set);
            } else if constexpr (std::is_same_v<T, TranslateFamily>) {
                j["family"] = "translate";
                j["set"] = set_to_json(d.set);
                j["path"] = time_function_to_json(d.path);
            } else if constexpr (std::is_same_v<T, BallPathFamily>) {
                j["family"] = "ball_path";
                j["center"] = time_function_to_json(d.center);
                j["radius"] = scalar_function_to_json(d.radius);
            } else {
                j["family"] = "box_path";
                j["lo"] = time_function_to_json(d.lo);
                j["hi"] = time_function_to_json(d.hi);
            }
        },
        m.family());
    if (m.continuity_modulus()) j["g"] = scalar_function_to_json(*m.continuity_modulus());
    if (m.lipschitz_beta()) j["beta"] = *m.lipschitz_beta();
    return j;
}

}  // namespace io_detail

inline LoadedProblem parse_problem_json(const json& j) {
    using namespace io_detail;
    check_keys(j, "$", {"dim", "A0", "A1", "f", "C", "u0", "T", "N", "solver"});
    const std::size_t dim = parse_count(require_key(j, "$", "dim"), "$.dim");
    if (dim == 0) fail("$.dim", "dimension must be positive");
    const double horizon = parse_number(require_key(j, "$", "T"), "$.T");
    if (!(horizon > 0.0)) fail("$.T", "T must be positive");
    const std::size_t n_steps = parse_count(require_key(j, "$", "N"), "$.N");
    if (n_steps == 0) fail("$.N", "N must be positive");

    SymmetricOperator a0 = parse_operator(require_key(j, "$", "A0"), "$.A0", dim);
    SymmetricOperator a1 = parse_operator(require_key(j, "$", "A1"), "$.A1", dim);
    TimeFunction f = parse_time_function(require_key(j, "$", "f"), "$.f", dim, horizon);
    MovingSet c = parse_moving_set(require_key(j, "$", "C"), "$.C", dim, horizon);
    Vec u0 = parse_vector(require_key(j, "$", "u0"), "$.u0", dim);
    VISolveConfig solver;
    if (j.contains("solver")) solver = parse_solver(j.at("solver"), "$.solver");

    try {
        return LoadedProblem{ProblemSpec(std::move(a0), std::move(a1), std::move(f), std::move(c),
                                         std::move(u0), horizon),
                             n_steps, std::move(solver)};
    } catch (const std::exception& e) {
        fail("$", e.what());
    }
}

inline LoadedProblem parse_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecParseError("cannot open spec file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecParseError(std::string("spec file is not valid JSON: ") + e.what());
    }
    return parse_problem_json(j);
}

inline json problem_to_json(const ProblemSpec& spec, std::size_t n_steps,
                            const VISolveConfig& solver) {
    using namespace io_detail;
    json j;
    j["dim"] = spec.dim();
    j["A0"] = operator_to_json(spec.A0);
    j["A1"] = operator_to_json(spec.A1);
    j["f"] = time_function_to_json(spec.f);
    j["C"] = moving_set_to_json(spec.C);
    j["u0"] = spec.u0;
    j["T"] = spec.T;
    j["N"] = n_steps;
    j["solver"] = {{"tol", solver.tol},
                   {"max_iter", solver.max_iter},
                   {"eps0", solver.eps0},
                   {"theta", solver.theta},
                   {"stages", solver.stages}};
    return j;
}

// ---------------------------------------------------------------------------
// CSV output (fixed formatting so identical runs are byte-identical)
// ---------------------------------------------------------------------------

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Header t,u_1..u_n,v_1..v_n,residual; one row per grid node; velocity and
/// residual columns are blank on the k = 0 row.
inline void trajectory_to_csv(const Trajectory& traj, std::ostream& out) {
    traj.validate_shape();
    const std::size_t n = traj.states.front().size();
    out << "t";
    for (std::size_t i = 1; i <= n; ++i) out << ",u_" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",v_" << i;
    out << ",residual\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << format_g17(traj.times[k]);
        for (std::size_t i = 0; i < n; ++i) out << "," << format_g17(traj.states[k][i]);
        if (k == 0) {
            for (std::size_t i = 0; i <= n; ++i) out << ",";
        } else {
            for (std::size_t i = 0; i < n; ++i) out << "," << format_g17(traj.velocities[k - 1][i]);
            out << ","
                << (traj.residuals.empty() ? std::string() : format_g17(traj.residuals[k - 1]));
        }
        out << "\n";
    }
}

inline void nonclosedness_to_csv(const NonclosednessTable& table, std::ostream& out) {
    out << "k,c0_distance,w11_norm\n";
    for (const auto& row : table.rows)
        out << row.k << "," << format_g17(row.c0_distance) << "," << format_g17(row.w11_norm)
            << "\n";
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline json report_to_json(const SensitivityReport& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"x0", p.x0},
                         {"y0", p.y0},
                         {"c0_distance", p.c0_distance},
                         {"ratio", p.ratio}});
    return json{{"mode", r.mode == SensitivityMode::a0_coercive ? "a0_coercive" : "a1_coercive"},
                {"modulus_theoretical", r.modulus_theoretical},
                {"pairs", std::move(pairs)},
                {"max_ratio", r.max_ratio},
                {"slack", r.slack},
                {"pass", r.pass}};
}

inline json report_to_json(const BoundReport& r) {
    json j{{"mode", r.mode == BoundMode::h3a ? "h3a" : (r.mode == BoundMode::h3b ? "h3b" : "h3c")},
           {"bound", r.bound},
           {"velocity_bound", r.velocity_bound},
           {"w11_bound", r.w11_bound},
           {"observed_c0", r.observed_c0},
           {"observed_w11", r.observed_w11},
           {"observed_vmax", r.observed_vmax},
           {"pass", r.pass}};
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("rho0", r.rho0);
    put("rho", r.rho);
    put("beta", r.beta);
    put("gamma", r.gamma);
    put("c1_hat", r.c1_hat);
    put("c2_hat", r.c2_hat);
    return j;
}

inline json report_to_json(const ConvexityReport& r) {
    return json{{"lambdas", r.lambdas},
                {"blend_residuals", r.blend_residuals},
                {"tol", r.tol},
                {"pass", r.pass}};
}

inline json report_to_json(const GronwallCheck& r) {
    return json{{"hypothesis_holds", r.hypothesis_holds},
                {"conclusion_holds", r.conclusion_holds},
                {"max_hypothesis_gap", r.max_hypothesis_gap},
                {"max_conclusion_gap", r.max_conclusion_gap}};
}

inline json report_to_json(const NonclosednessTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"k", r.k},
                        {"c0_distance", r.c0_distance},
                        {"c0_bound", r.c0_bound},
                        {"w11_norm", r.w11_norm},
                        {"tv_part", r.tv_part}});
    return json{{"horizon", t.horizon},
                {"rows", std::move(rows)},
                {"c0_within_bound", t.c0_within_bound},
                {"w11_strictly_increasing", t.w11_strictly_increasing},
                {"limit_absolutely_continuous", t.limit_absolutely_continuous}};
}

}  // namespace sweepvel

#endif  // SWEEPVEL_IO_HPP

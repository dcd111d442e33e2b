#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "equiplan/error.hpp"
#include "equiplan/estimators.hpp"
#include "equiplan/experiments.hpp"
#include "equiplan/value_iteration.hpp"

namespace py = pybind11;
using namespace equiplan;

namespace {

// Dicts cross the boundary as JSON text; the config schema lives in C++.
nlohmann::json from_py(const py::object& obj) {
  if (obj.is_none()) return nlohmann::json::object();
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

// pybind11 holders cannot be shared_ptr<const T>; the bound objects expose
// only const methods, so the cast is safe.
using GroupHolder = std::shared_ptr<GroupSpec>;
using EnvHolder = std::shared_ptr<GeometricMDP>;
GroupHolder hold(const GroupPtr& g) { return std::const_pointer_cast<GroupSpec>(g); }
EnvHolder hold(const EnvPtr& e) { return std::const_pointer_cast<GeometricMDP>(e); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-group equivariant planning primitives";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "EquiplanError");

  py::class_<GroupSpec, GroupHolder>(m, "Group")
      .def_property_readonly("name", &GroupSpec::name)
      .def_property_readonly("order", &GroupSpec::order)
      .def("compose", &GroupSpec::compose)
      .def("inverse", &GroupSpec::inverse)
      .def("is_reflection", &GroupSpec::is_reflection)
      .def("cayley", [](const GroupSpec& g) {
        const int n = g.order();
        Eigen::MatrixXi table(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) table(a, b) = g.compose(a, b);
        return table;
      })
      .def("__repr__", [](const GroupSpec& g) { return "<Group " + g.name() + " of order " + std::to_string(g.order()) + ">"; });

  m.def("group", [](const std::string& name) { return hold(group_by_name(name)); }, py::arg("name"),
        "C<n>, D<n>, octahedral, icosahedral or trivial");
  m.def("cyclic", [](int n) { return hold(make_cyclic(n)); }, py::arg("n"));
  m.def("dihedral", [](int n) { return hold(make_dihedral(n)); }, py::arg("n"));
  m.def("octahedral", [] { return hold(make_octahedral()); });
  m.def("icosahedral", [] { return hold(make_icosahedral()); });

  py::class_<Rep>(m, "Rep")
      .def_property_readonly("group", [](const Rep& r) { return hold(r.group()); })
      .def_property_readonly("dim", &Rep::dim)
      .def("matrix", &Rep::matrix, py::arg("g"))
      .def("act", [](const Rep& r, Element g, const Eigen::VectorXd& v) { return act(r, g, v); }, py::arg("g"), py::arg("v"))
      .def("structure", [](const Rep& r) { return to_py(rep_structure(r)); });

  m.def("rep_trivial", [](const GroupHolder& g, int copies) { return rep_trivial(g, copies); }, py::arg("group"),
        py::arg("copies") = 1);
  m.def("rep_standard", [](const GroupHolder& g) { return rep_standard(g); }, py::arg("group"));
  m.def("rep_regular", [](const GroupHolder& g) { return rep_regular(g); }, py::arg("group"));
  m.def("rep_sign", [](const GroupHolder& g) { return rep_sign(g); }, py::arg("group"));
  m.def("rep_direct_sum", &rep_direct_sum, py::arg("parts"));

  py::class_<EquivariantMLP>(m, "EquivariantMLP")
      .def(py::init([](const std::vector<Rep>& reps, bool equivariant, std::uint64_t seed) {
             auto net = EquivariantMLP::build(reps, equivariant);
             Rng rng(seed);
             net.init(rng);
             return net;
           }),
           py::arg("reps"), py::arg("equivariant") = true, py::arg("seed") = 0)
      .def_property_readonly("num_params", &EquivariantMLP::num_params)
      .def_property_readonly("equivariant", &EquivariantMLP::equivariant)
      .def("params", &EquivariantMLP::params)
      .def("set_params", &EquivariantMLP::set_params)
      .def("__call__", &EquivariantMLP::forward, py::arg("x"))
      .def("forward_batch", [](const EquivariantMLP& net, const Eigen::MatrixXd& x) { return net.forward_batch(x); },
           py::arg("x"), "columns are samples");

  py::class_<GeometricMDP, EnvHolder>(m, "Env")
      .def_property_readonly("name", &GeometricMDP::name)
      .def_property_readonly("group", [](const GeometricMDP& e) { return hold(e.group()); })
      .def_property_readonly("rep_state", &GeometricMDP::rep_state)
      .def_property_readonly("rep_action", &GeometricMDP::rep_action)
      .def_property_readonly("horizon_cap", &GeometricMDP::horizon_cap)
      .def("transition", &GeometricMDP::transition, py::arg("s"), py::arg("a"))
      .def("reward", &GeometricMDP::reward, py::arg("s"), py::arg("a"))
      .def("goal_reached", &GeometricMDP::goal_reached, py::arg("s"))
      .def("sample_start", [](const GeometricMDP& e, std::uint64_t seed) {
        Rng rng(seed);
        return e.sample_start(rng);
      }, py::arg("seed"));

  m.def("make_env", [](const py::object& cfg) {
    nlohmann::json j = default_config("plan")["env"];
    j.merge_patch(from_py(cfg));
    return hold(env_from_json(j));
  }, py::arg("config") = py::none(), "environment from a config dict; omitted keys take the plan defaults");

  py::class_<PlanResult>(m, "PlanResult")
      .def_readonly("action", &PlanResult::action)
      .def_readonly("mean", &PlanResult::mean)
      .def_readonly("best_return", &PlanResult::best_return);

  py::class_<Planner>(m, "Planner")
      .def(py::init([](const py::object& cfg) {
             nlohmann::json j = default_config("plan")["sampler"];
             j.merge_patch(from_py(cfg));
             return Planner(sampler_from_json(j));
           }),
           py::arg("config") = py::none())
      .def("plan", [](const Planner& p, const EnvHolder& env, const Eigen::VectorXd& s0, std::uint64_t stream) {
        return p.plan(EnvScorer(env), s0, stream);
      }, py::arg("env"), py::arg("s0"), py::arg("stream") = 0)
      .def("equivariance_error", [](const Planner& p, const EnvHolder& env, const std::vector<Eigen::VectorXd>& states) {
        const EnvScorer scorer(env);
        const auto report = equivariance_error([&](const Eigen::VectorXd& s) { return p.plan(scorer, s, 0).action; },
                                               states, env->rep_state(), env->rep_action());
        return py::make_tuple(report.mean, report.max);
      }, py::arg("env"), py::arg("states"), "(mean, max) of |rho_A(g)^-1 plan(g s) - plan(s)|");

  m.def("run_episode", [](const EnvHolder& env, const Planner& p, const Eigen::VectorXd& s0, std::uint64_t stream) {
    const auto r = run_episode(*env, p, s0, stream);
    py::dict d;
    d["success"] = r.success;
    d["steps"] = r.steps;
    d["total_return"] = r.total_return;
    d["rewards"] = r.rewards;
    return d;
  }, py::arg("env"), py::arg("planner"), py::arg("s0"), py::arg("stream") = 0);

  m.def("domination_check", [](const Rep& rep, int trials, int m_samples, std::uint64_t seed, const std::string& fn) {
    ToyEnergy toy;
    toy.f = toy_function_from_string(fn);
    toy.dim = rep.dim();
    const auto report = domination_check(toy, rep, trials, m_samples, seed);
    std::vector<std::pair<double, double>> rows;
    for (const auto& row : report.rows) rows.emplace_back(row.r, row.l);
    return py::make_tuple(report.violations, rows);
  }, py::arg("rep"), py::arg("trials"), py::arg("m"), py::arg("seed") = 0, py::arg("function") = "tanh",
     "(violations, [(raw error, symmetrized error)])");

  m.def("policy_domination_check", [](const Rep& rep_state, const Rep& rep_action, int instances, std::uint64_t seed) {
    const auto report = policy_domination_check(rep_state, rep_action, instances, seed);
    std::vector<std::pair<double, double>> rows;
    for (const auto& row : report.rows) rows.emplace_back(row.averaged, row.symmetrized);
    return py::make_tuple(report.violations, rows);
  }, py::arg("rep_state"), py::arg("rep_action"), py::arg("instances"), py::arg("seed") = 0,
     "(violations, [(averaged distance, symmetrized distance)])");

  py::class_<GridMDP>(m, "GridMDP")
      .def(py::init(&make_grid_mdp), py::arg("n"), py::arg("goals"), py::arg("gamma"),
           py::arg("walls") = std::vector<Cell>{})
      .def_property_readonly("size", &GridMDP::size)
      .def_property_readonly("gamma", &GridMDP::gamma)
      .def("bellman", &bellman_apply, py::arg("v"))
      .def("value_iterate", [](const GridMDP& mdp, double tol, int max_iters) {
        const auto r = value_iterate(mdp, tol, max_iters);
        return py::make_tuple(r.values, r.iterations);
      }, py::arg("tol") = 1e-12, py::arg("max_iters") = 10000)
      .def("shortest_path_values", &shortest_path_values);
  m.def("rotate_field", &rotate_field, py::arg("v"), py::arg("quarter_turns") = 1);

  m.def("experiments", &experiment_names);
  m.def("default_config", [](const std::string& cmd) { return to_py(default_config(cmd)); }, py::arg("command"));
  m.def("run_experiment", [](const std::string& cmd, const py::object& cfg, int jobs) {
    const nlohmann::json resolved = resolve_config(cmd, from_py(cfg));
    ExperimentOutput out;
    {
      py::gil_scoped_release release;
      out = run_experiment(cmd, resolved, jobs);
    }
    py::dict files;
    for (const auto& [name, csv] : out.files) files[py::str(name)] = csv;
    return py::make_tuple(files, to_py(out.summary), out.exit_code);
  }, py::arg("command"), py::arg("config") = py::none(), py::arg("jobs") = 1,
     "(csv files by name, summary dict, exit code)");
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dualstop/analytics.hpp"
#include "dualstop/builtin.hpp"
#include "dualstop/cli.hpp"
#include "dualstop/exact.hpp"
#include "dualstop/max_pricing.hpp"
#include "dualstop/nested_mc.hpp"
#include "dualstop/oracles.hpp"
#include "dualstop/policy.hpp"
#include "dualstop/records.hpp"
#include "dualstop/verify.hpp"

namespace py = pybind11;
using namespace dualstop;

namespace {

Framework parse_framework(const std::string& f)
{
    if (f == "min") return Framework::Minimize;
    if (f == "max") return Framework::Maximize;
    throw DomainError("framework must be 'min' or 'max', got '" + f + "'");
}

std::string record_text(const nlohmann::json& j)
{
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Optimal stopping by the pure-dual expansion";

    static py::exception<BudgetExceeded> budget_exc(m, "BudgetExceeded", PyExc_RuntimeError);
    static py::exception<InvariantViolation> invariant_exc(m, "InvariantViolation", PyExc_ArithmeticError);
    static py::exception<ToleranceNotMet> tolerance_exc(m, "ToleranceNotMet", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const BudgetExceeded& e) {
            py::set_error(budget_exc, e.what());
        } catch (const InvariantViolation& e) {
            py::set_error(invariant_exc, e.what());
        } catch (const ToleranceNotMet& e) {
            py::set_error(tolerance_exc, e.what());
        } catch (const DomainError& e) {
            py::set_error(PyExc_ValueError, e.what());
        }
    });

    py::class_<StoppingProblem>(m, "Problem")
        .def_property_readonly("name", &StoppingProblem::name)
        .def_property_readonly("horizon", &StoppingProblem::horizon)
        .def_property_readonly("dim", &StoppingProblem::dim)
        .def_property_readonly("normalized", &StoppingProblem::normalized)
        .def_property_readonly("framework",
                               [](const StoppingProblem& p) { return p.framework() == Framework::Minimize ? "min" : "max"; })
        .def(
            "sample_path",
            [](const StoppingProblem& p, std::uint64_t seed) {
                RandomStream rng(seed);
                auto path = p.sample_path(PathPrefix::empty(p.dim()), rng);
                return std::vector<double>(path.values().begin(), path.values().end());
            },
            py::arg("seed"), "Full path, column-major (D values per period).")
        .def(
            "payout",
            [](const StoppingProblem& p, int t, std::vector<double> prefix) {
                return p.payout(t, PathPrefix(p.dim(), static_cast<int>(prefix.size()) / p.dim(), std::move(prefix)));
            },
            py::arg("t"), py::arg("prefix"))
        .def("__repr__", [](const StoppingProblem& p) { return "<Problem " + p.name() + ">"; });

    m.def(
        "make_problem", [](const std::string& spec, const std::string& fw) { return make_builtin(spec, parse_framework(fw)); },
        py::arg("spec"), py::arg("framework") = "min");
    m.def("builtin_names", &builtin_names);

    py::class_<FiniteTreeProcess, std::shared_ptr<FiniteTreeProcess>>(m, "Tree")
        .def_static("load", &FiniteTreeProcess::load)
        .def_static("from_json",
                    [](const std::string& text) { return FiniteTreeProcess::from_json(nlohmann::json::parse(text)); })
        .def("to_json", [](const FiniteTreeProcess& t) { return t.to_json().dump(); })
        .def("save", &FiniteTreeProcess::save)
        .def_property_readonly("size", &FiniteTreeProcess::size)
        .def_property_readonly("horizon", &FiniteTreeProcess::horizon)
        .def_property_readonly("max_payout", &FiniteTreeProcess::max_payout)
        .def(
            "problem",
            [](const FiniteTreeProcess& t, const std::string& fw) {
                return tree_problem(std::make_shared<const FiniteTreeProcess>(t), parse_framework(fw));
            },
            py::arg("framework") = "min");
    m.def("two_point_tree", &two_point_tree);
    m.def("notsurelem_tree", &notsurelem_tree);
    m.def("iid_grid_tree", &iid_grid_tree);
    m.def("midpoint_grid", &midpoint_grid);
    m.def("random_tree_suite", &random_tree_suite, py::arg("count"), py::arg("seed"), py::arg("max_horizon") = 5);

    // exact engine and oracles
    m.def(
        "exact_levels",
        [](const FiniteTreeProcess& t, int K, std::optional<double> eta) {
            const auto run = eta ? exact_modified_levels(t, K, *eta) : exact_levels(t, K);
            std::vector<double> H, E;
            for (int k = 1; k <= K; ++k) {
                H.push_back(run.H(k));
                E.push_back(run.E(k));
            }
            return py::dict(py::arg("H") = H, py::arg("E") = E, py::arg("active_horizon") = run.active_horizon);
        },
        py::arg("tree"), py::arg("K"), py::arg("eta") = py::none());
    m.def(
        "backward_induction", [](const FiniteTreeProcess& t, const std::string& fw) {
            return backward_induction(t, parse_framework(fw)).opt;
        },
        py::arg("tree"), py::arg("framework") = "min");
    m.def(
        "brute_force_opt",
        [](const FiniteTreeProcess& t, const std::string& fw) { return brute_force_opt(t, parse_framework(fw)); },
        py::arg("tree"), py::arg("framework") = "min");
    m.def("max_flow_value", [](const FiniteTreeProcess& t) { return max_flow(build_flow_network(t)).value; });
    m.def("flow_martingale", [](const FiniteTreeProcess& t) {
        const auto net = build_flow_network(t);
        return flow_to_martingale(net, max_flow(net));
    });
    m.def(
        "verify_tree",
        [](const FiniteTreeProcess& t, int K, const std::string& name) { return record_text(to_json(verify_tree(t, K, name))); },
        py::arg("tree"), py::arg("K") = 20, py::arg("name") = "tree");
    m.def(
        "tau_k_exact",
        [](const FiniteTreeProcess& t, int k) {
            auto r = tau_k_exact(t, k);
            return py::make_tuple(std::vector<bool>(r.stop.begin(), r.stop.end()), r.value);
        },
        py::arg("tree"), py::arg("k"));
    m.def(
        "tau_star_exact",
        [](const FiniteTreeProcess& t, int K, double tol) {
            auto r = tau_star_exact(t, K, tol);
            return py::make_tuple(std::vector<bool>(r.stop.begin(), r.stop.end()), r.value);
        },
        py::arg("tree"), py::arg("K"), py::arg("tol"));

    // budgets and estimators
    py::class_<SampleBudget>(m, "SampleBudget")
        .def(py::init([](const std::string& mode, double eps, double delta, std::vector<std::int64_t> outer,
                         std::vector<int> inner, std::optional<double> max_calls, int workers) {
                 SampleBudget b;
                 b.mode = parse_budget_mode(mode);
                 b.eps = eps;
                 b.delta = delta;
                 b.outer = std::move(outer);
                 b.inner = std::move(inner);
                 b.max_calls = max_calls;
                 b.workers = workers;
                 b.validate();
                 return b;
             }),
             py::arg("mode") = "practical", py::arg("eps") = 0.1, py::arg("delta") = 0.1,
             py::arg("outer") = std::vector<std::int64_t>{}, py::arg("inner") = std::vector<int>{16},
             py::arg("max_calls") = py::none(), py::arg("workers") = 1)
        .def_property_readonly("mode", [](const SampleBudget& b) { return to_string(b.mode); })
        .def_readwrite("eps", &SampleBudget::eps)
        .def_readwrite("delta", &SampleBudget::delta)
        .def_readwrite("outer", &SampleBudget::outer)
        .def_readwrite("inner", &SampleBudget::inner)
        .def_readwrite("max_calls", &SampleBudget::max_calls)
        .def_readwrite("workers", &SampleBudget::workers);

    py::class_<LevelEstimate>(m, "LevelEstimate")
        .def_readonly("k", &LevelEstimate::k)
        .def_readonly("H", &LevelEstimate::H)
        .def_readonly("E", &LevelEstimate::E)
        .def_readonly("std_error", &LevelEstimate::std_error)
        .def_readonly("samples", &LevelEstimate::samples);
    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("std_error", &Estimate::std_error)
        .def_readonly("calls", &Estimate::calls)
        .def_readonly("seed", &Estimate::seed)
        .def_readonly("levels", &Estimate::levels)
        .def("record", [](const Estimate& e) { return record_text(to_json(e)); });

    m.def(
        "estimate_Zk",
        [](const StoppingProblem& p, int k, std::vector<double> prefix, const SampleBudget& b, std::uint64_t seed) {
            const int t = static_cast<int>(prefix.size()) / p.dim();
            return estimate_Zk(p, k, PathPrefix(p.dim(), t, std::move(prefix)), b, seed);
        },
        py::arg("problem"), py::arg("k"), py::arg("prefix"), py::arg("budget"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
    m.def("estimate_Hk", &estimate_Hk, py::arg("problem"), py::arg("k"), py::arg("budget"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());
    m.def("estimate_OPT_min", &estimate_OPT_min, py::arg("problem"), py::arg("budget"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());
    m.def("modified_expansion_estimate", &modified_expansion_estimate, py::arg("problem"), py::arg("k"), py::arg("eta"),
          py::arg("budget"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
    m.def("strict_calls_Hk", &strict_calls_Hk);
    m.def("strict_calls_Zk", &strict_calls_Zk);
    m.def("budget_N", &budget_N);

    py::class_<MaxMoments>(m, "MaxMoments")
        .def(py::init(&make_moments), py::arg("M1"), py::arg("M2"))
        .def_readonly("M1", &MaxMoments::M1)
        .def_readonly("M2", &MaxMoments::M2)
        .def_readonly("gamma0", &MaxMoments::gamma0)
        .def_readonly("M1_std_error", &MaxMoments::M1_std_error)
        .def_readonly("M2_std_error", &MaxMoments::M2_std_error);
    m.def("estimate_max_moments", &estimate_max_moments, py::arg("problem"), py::arg("n"), py::arg("seed"),
          py::arg("workers") = 1);
    m.def("exact_max_moments", &exact_max_moments);
    m.def("truncation_level", [](const MaxMoments& mm, double eps) {
        const auto l = truncation_level(mm, eps);
        return py::make_tuple(l.U0, l.k0);
    });
    py::class_<MaxEstimate>(m, "MaxEstimate")
        .def_readonly("estimate", &MaxEstimate::estimate)
        .def_readonly("U", &MaxEstimate::U)
        .def_readonly("K", &MaxEstimate::K)
        .def_readonly("relative_bound", &MaxEstimate::relative_bound)
        .def_property_readonly("value", [](const MaxEstimate& e) { return e.estimate.value; });
    m.def("estimate_OPT_max", &estimate_OPT_max, py::arg("problem"), py::arg("moments"), py::arg("budget"),
          py::arg("seed"), py::arg("U") = py::none(), py::arg("K") = py::none(), py::call_guard<py::gil_scoped_release>());

    // policies
    py::class_<OnlinePolicy>(m, "OnlinePolicy");
    py::class_<TauEpsPolicy, OnlinePolicy>(m, "TauEpsPolicy")
        .def(py::init<const StoppingProblem&, double, SampleBudget>(), py::arg("problem"), py::arg("eps"),
             py::arg("budget"), py::keep_alive<1, 2>())
        .def_property_readonly("level", &TauEpsPolicy::level);
    py::class_<FixedTimePolicy, OnlinePolicy>(m, "FixedTimePolicy").def(py::init<int>(), py::arg("time"));
    py::class_<PolicyEvaluation>(m, "PolicyEvaluation")
        .def_readonly("mean", &PolicyEvaluation::mean)
        .def_readonly("std_error", &PolicyEvaluation::std_error)
        .def_readonly("mean_stop_time", &PolicyEvaluation::mean_stop_time)
        .def_readonly("calls", &PolicyEvaluation::calls)
        .def_readonly("episodes", &PolicyEvaluation::episodes)
        .def("record", [](const PolicyEvaluation& e) { return record_text(to_json(e)); });
    m.def("evaluate_policy", &evaluate_policy, py::arg("problem"), py::arg("policy"), py::arg("episodes"),
          py::arg("seed"), py::arg("workers") = 1, py::arg("keep_traces") = false,
          py::call_guard<py::gil_scoped_release>());

    // closed forms
    m.def("two_point_gap", &two_point_gap);
    m.def("iid_uniform_opt", &iid_uniform_opt);
    m.def("iid_uniform_sq_opt", &iid_uniform_sq_opt);
    m.def("expo_balanced_seq", [](int K) { return expo_balanced_seq(K).values; });
    m.def("expo_unbalanced_seq", [](int K) { return expo_unbalanced_seq(K).values; });
    m.def("uniform_balanced_seq", [](int K) { return uniform_balanced_seq(K).values; });

    m.def(
        "cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "dualstop");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, log;
            const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, log);
            return py::make_tuple(code, out.str(), log.str());
        },
        py::arg("args"), "Run the command-line front end; returns (exit code, stdout, stderr).");
}

#include "dualstop/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "dualstop/analytics.hpp"
#include "dualstop/builtin.hpp"
#include "dualstop/exact.hpp"
#include "dualstop/max_pricing.hpp"
#include "dualstop/nested_mc.hpp"
#include "dualstop/oracles.hpp"
#include "dualstop/policy.hpp"
#include "dualstop/records.hpp"
#include "dualstop/verify.hpp"

namespace dualstop {
namespace {

using nlohmann::json;
using Origin = std::function<std::string(const std::string&)>;

enum class Kind { Text, Real, Integer, Unsigned, Flag, IntList };

struct KeySpec {
    std::string key;
    Kind kind;
    std::string help;
};

const std::vector<KeySpec>& key_specs()
{
    static const std::vector<KeySpec> specs{
        {"problem", Kind::Text, "builtin problem, e.g. iid_uniform(4), two_point(2), tree(file.json)"},
        {"tree", Kind::Text, "tree file (JSON)"},
        {"framework", Kind::Text, "min or max"},
        {"mode", Kind::Text, "strict, practical or exact (trees)"},
        {"eps", Kind::Real, "accuracy in (0,1)"},
        {"delta", Kind::Real, "failure probability in (0,1)"},
        {"levels", Kind::Integer, "expansion levels K"},
        {"eta", Kind::Real, "modified expansion: minima over the first ceil((1-eta)T) periods"},
        {"trunc_U", Kind::Real, "truncation level U for maximization"},
        {"seed", Kind::Unsigned, "master seed (required for randomized runs)"},
        {"workers", Kind::Integer, "worker threads"},
        {"out", Kind::Text, "write the record to this file"},
        {"table", Kind::Text, "write the per-level table (TSV) to this file"},
        {"episodes", Kind::Integer, "policy episodes"},
        {"max_calls", Kind::Real, "refuse runs predicted to make more simulator calls"},
        {"allow_expensive", Kind::Flag, "allow strict runs above 1e8 predicted calls"},
        {"outer", Kind::IntList, "practical outer path counts, comma separated (one per level, or one for all)"},
        {"inner", Kind::IntList, "practical inner continuation counts by generation"},
        {"moment_samples", Kind::Integer, "paths for the moments of max_t Z_t"},
        {"grid", Kind::Integer, "grid points for the continuous two-period examples"},
        {"random_trees", Kind::Integer, "verify: number of seeded random trees"},
        {"traces", Kind::Flag, "policy: keep per-step decision traces"},
    };
    return specs;
}

const KeySpec* find_spec(const std::string& key)
{
    for (const auto& s : key_specs())
        if (s.key == key) return &s;
    return nullptr;
}

std::string flag_name(const std::string& key)
{
    std::string f = "--" + key;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

[[noreturn]] void config_error(const Origin& origin, const std::string& key, const std::string& message)
{
    throw ConfigError(origin(key) + ": " + message);
}

double as_real(const json& v, const Origin& origin, const std::string& key)
{
    if (!v.is_number()) config_error(origin, key, "expected a number");
    return v.get<double>();
}

std::int64_t as_integer(const json& v, const Origin& origin, const std::string& key)
{
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e18) return static_cast<std::int64_t>(d);
    }
    config_error(origin, key, "expected an integer");
}

void require_open_unit(double x, const Origin& origin, const std::string& key)
{
    if (!(x > 0.0 && x < 1.0)) config_error(origin, key, "must lie in (0,1)");
}

// "name(arg)" -> {name, arg}
std::pair<std::string, std::string> split_spec(const std::string& spec)
{
    const auto open = spec.find('(');
    if (open == std::string::npos || spec.back() != ')') return {spec, ""};
    return {spec.substr(0, open), spec.substr(open + 1, spec.size() - open - 2)};
}

std::string framework_name(Framework f)
{
    return f == Framework::Minimize ? "min" : "max";
}

struct Instance {
    std::string name;
    std::shared_ptr<const FiniteTreeProcess> tree;  ///< set when the problem is a finite tree
    std::optional<StoppingProblem> problem;
};

/// Trees for the tree-backed builtins; nullptr for the others.
std::shared_ptr<const FiniteTreeProcess> tree_for(const std::string& spec, int grid)
{
    const auto [name, arg] = split_spec(spec);
    auto make = [](FiniteTreeProcess t) { return std::make_shared<const FiniteTreeProcess>(std::move(t)); };
    if (name == "two_point") return make(two_point_tree(std::stoi(arg)));
    if (name == "notsurelem") return make(notsurelem_tree());
    if (name == "uniform_balanced") return make(two_period_tree(1.0, midpoint_grid(0.0, 2.0, grid)));
    if (name == "expo_balanced") return make(two_period_exponential_tree(1.0, grid));
    if (name == "expo_unbalanced") return make(two_period_exponential_tree(0.5, grid));
    if (name == "tree") return make(FiniteTreeProcess::load(arg));
    return nullptr;
}

/// Resolves --tree / --problem. `want_tree` swaps continuous two-period
/// builtins for their grid trees.
Instance resolve(const RunConfig& c, bool want_tree)
{
    Instance in;
    if (c.tree) {
        in.name = "tree(" + *c.tree + ")";
        in.tree = std::make_shared<const FiniteTreeProcess>(FiniteTreeProcess::load(*c.tree));
        in.problem = tree_problem(in.tree, c.framework, in.name);
        return in;
    }
    if (!c.problem) throw ConfigError("'" + c.command + "' needs --problem or --tree");
    in.name = *c.problem;
    const auto name = split_spec(*c.problem).first;
    const bool tree_only = name == "notsurelem";
    const bool always_tree = name == "two_point" || name == "tree";
    if (want_tree || tree_only || always_tree) in.tree = tree_for(*c.problem, c.grid);
    if (in.tree && (tree_only || want_tree)) {
        in.problem = tree_problem(in.tree, c.framework, in.name);
    } else {
        in.problem = make_builtin(*c.problem, c.framework);
    }
    return in;
}

std::uint64_t require_seed(const RunConfig& c)
{
    if (!c.seed) throw ConfigError("'" + c.command + "' is randomized: --seed is required (seeds are never defaulted)");
    return *c.seed;
}

SampleBudget make_budget(const RunConfig& c)
{
    SampleBudget b;
    b.mode = c.mode == "strict" ? BudgetMode::PaperStrict : BudgetMode::Practical;
    b.eps = c.eps;
    b.delta = c.delta;
    b.outer = c.outer;
    b.inner = c.inner;
    b.workers = c.workers;
    if (c.max_calls) {
        b.max_calls = c.max_calls;
    } else if (b.mode == BudgetMode::PaperStrict && !c.allow_expensive) {
        b.max_calls = kExpensiveCalls;
    }
    return b;
}

std::vector<std::int64_t> level_counts(const RunConfig& c, int K)
{
    if (c.outer.empty()) throw ConfigError("practical mode needs --outer");
    if (c.outer.size() == 1) return std::vector<std::int64_t>(static_cast<std::size_t>(K), c.outer[0]);
    if (static_cast<int>(c.outer.size()) != K)
        throw ConfigError("--outer has " + std::to_string(c.outer.size()) + " entries but --levels is " + std::to_string(K));
    return c.outer;
}

std::string format_number(const json& v)
{
    if (v.is_null()) return "nan";
    if (v.is_number_float()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        return os.str();
    }
    return v.dump();
}

void write_table(const std::string& path, const std::vector<std::string>& columns, const json& rows)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open table file '" + path + "'");
    for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "\t" : "") << columns[i];
    f << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "\t" : "") << format_number(row.at(columns[i]));
        f << "\n";
    }
}

void emit(const RunConfig& c, const json& record, std::ostream& out)
{
    const auto text = dump_record(record);
    if (c.out) {
        std::ofstream f(*c.out, std::ios::binary);
        if (!f) throw ConfigError("cannot open output file '" + *c.out + "'");
        f << text;
    }
    out << text;
}

json header(const RunConfig& c, const Instance& in)
{
    json j = {{"command", c.command}, {"problem", in.name}, {"framework", framework_name(c.framework)}, {"mode", c.mode}};
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

json level_rows(const Estimate& e, bool normalized)
{
    json rows = json::array();
    for (const auto& l : e.levels) {
        auto r = to_json(l);
        r["bound"] = normalized ? json(1.0 / (l.k + 1)) : json(nullptr);
        rows.push_back(std::move(r));
    }
    return rows;
}

int cmd_price(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto in = resolve(c, c.mode == "exact");
    auto rec = header(c, in);
    const bool normalized = in.problem->normalized() && c.framework == Framework::Minimize;

    if (c.mode == "exact") {
        if (!in.tree) throw ConfigError("--mode exact needs a tree problem");
        const auto vf = backward_induction(*in.tree, c.framework);
        rec["estimate"] = vf.opt;
        rec["std_error"] = 0.0;
        rec["calls"] = 0;
        json rows = json::array();
        if (c.levels && *c.levels > 0 && c.framework == Framework::Minimize) {
            const auto run = exact_levels(*in.tree, *c.levels);
            for (int k = 1; k <= *c.levels; ++k)
                rows.push_back({{"k", k},
                                {"H", run.H(k)},
                                {"E", run.E(k)},
                                {"std_error", 0.0},
                                {"samples", 0},
                                {"bound", normalized ? json(1.0 / (k + 1)) : json(nullptr)}});
        }
        rec["levels"] = rows;
        emit(c, rec, out);
        if (c.table) write_table(*c.table, {"k", "H", "E", "std_error", "bound"}, rows);
        return kExitOk;
    }

    const auto seed = require_seed(c);
    auto budget = make_budget(c);
    const int T = in.problem->horizon();

    if (c.framework == Framework::Maximize) {
        MaxMoments moments;
        if (in.tree) {
            moments = exact_max_moments(*in.tree);
        } else {
            moments = estimate_max_moments(*in.problem, c.moment_samples, RandomStream(seed).child(1).key(), c.workers);
        }
        if (budget.mode == BudgetMode::PaperStrict) {
            const auto level = truncation_level(moments, c.eps);
            log << "strict maximization: U0 = " << level.U0 << ", k0 = " << level.k0 << " levels\n";
        } else {
            if (!c.levels || !c.trunc_U) throw ConfigError("practical maximization needs --levels and --trunc-U");
            budget.outer = level_counts(c, *c.levels);
            log << "predicted simulator calls: " << practical_calls(budget.outer, budget.inner, T) << "\n";
        }
        const auto e = estimate_OPT_max(*in.problem, moments, budget, seed, c.trunc_U, c.levels);
        rec.update(to_json(e));
        rec["moments"] = to_json(moments);
        rec["levels"] = level_rows(e.estimate, false);
        emit(c, rec, out);
        if (c.table) write_table(*c.table, {"k", "H", "E", "std_error", "bound"}, rec["levels"]);
        return kExitOk;
    }

    Estimate e;
    if (c.eta) {
        if (!c.levels || *c.levels < 1) throw ConfigError("--eta needs --levels");
        if (budget.mode == BudgetMode::Practical) budget.outer = level_counts(c, *c.levels);
        e = modified_expansion_estimate(*in.problem, *c.levels, *c.eta, budget, seed);
        rec["eta"] = *c.eta;
        rec["active_horizon"] = eta_horizon(T, *c.eta);
    } else {
        if (budget.mode == BudgetMode::PaperStrict) {
            log << "predicted simulator calls: " << strict_calls_OPT(c.eps, c.delta, T) << " ("
                << strict_opt_levels(c.eps) << " levels)\n";
        } else {
            if (c.levels) {
                budget.outer = level_counts(c, *c.levels);
            } else if (budget.outer.empty()) {
                throw ConfigError("practical mode needs --outer");
            }
            log << "predicted simulator calls: " << practical_calls(budget.outer, budget.inner, T) << "\n";
        }
        e = estimate_OPT_min(*in.problem, budget, seed);
    }
    rec.update(to_json(e));
    rec["mode"] = c.mode;
    rec["levels"] = level_rows(e, normalized);
    emit(c, rec, out);
    if (c.table) write_table(*c.table, {"k", "H", "E", "std_error", "bound"}, rec["levels"]);
    return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream&)
{
    const int K = c.levels.value_or(20);
    if (K < 0) throw ConfigError("--levels must be nonnegative");
    std::vector<std::pair<std::string, std::shared_ptr<const FiniteTreeProcess>>> trees;
    if (c.tree || c.problem) {
        const auto in = resolve(c, true);
        if (!in.tree) throw ConfigError("verify needs a tree instance; '" + in.name + "' is not one");
        trees.emplace_back(in.name, in.tree);
    }
    if (c.random_trees > 0) {
        const auto seed = require_seed(c);
        auto suite = random_tree_suite(c.random_trees, seed);
        for (std::size_t i = 0; i < suite.size(); ++i)
            trees.emplace_back("random[" + std::to_string(i) + "]",
                               std::make_shared<const FiniteTreeProcess>(std::move(suite[i])));
    }
    if (trees.empty()) throw ConfigError("verify needs --problem, --tree or --random-trees");

    json instances = json::array();
    bool pass = true;
    for (const auto& [name, tree] : trees) {
        auto report = verify_tree(*tree, K, name);
        const auto [base, arg] = split_spec(name);
        if (base == "two_point" && K > 0) {
            const int n = std::stoi(arg);
            const double opt = backward_induction(*tree).opt;
            const auto run = exact_levels(*tree, K);
            double worst = 0.0;
            for (int k = 1; k <= K; ++k) worst = std::max(worst, std::abs(opt - run.E(k) - two_point_gap(n, k)));
            Check gap;
            gap.name = "two_point_gap_formula";
            gap.residual = worst;
            gap.tolerance = 1e-12;
            gap.pass = worst <= 1e-12;
            report.checks.push_back(gap);
        }
        pass = pass && report.pass();
        instances.push_back(to_json(report));
    }
    json rec = {{"command", "verify"}, {"levels", K}, {"pass", pass}, {"instances", std::move(instances)}};
    if (c.seed) rec["seed"] = *c.seed;
    emit(c, rec, out);
    return pass ? kExitOk : kExitInvariant;
}

std::optional<double> known_opt(const Instance& in, Framework framework)
{
    if (in.tree) return backward_induction(*in.tree, framework).opt;
    const auto [name, arg] = split_spec(in.name);
    if (name == "iid_uniform" && framework == Framework::Minimize) return iid_uniform_opt(std::stoi(arg));
    if (name == "iid_uniform") return 1.0 - iid_uniform_opt(std::stoi(arg));
    return std::nullopt;
}

int cmd_policy(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    if (c.framework != Framework::Minimize) throw ConfigError("policy runs in the min framework");
    if (c.mode == "exact") throw ConfigError("policy supports strict or practical mode");
    const auto seed = require_seed(c);
    const auto in = resolve(c, false);
    auto budget = make_budget(c);
    if (budget.mode == BudgetMode::Practical && budget.outer.empty()) budget.outer = {1};
    TauEpsPolicy policy(*in.problem, c.eps, budget);
    const int T = in.problem->horizon();
    if (budget.mode == BudgetMode::PaperStrict) {
        const double per = strict_calls_Zk(policy.level(), c.eps / 4, c.eps / (4 * T), T);
        log << "predicted simulator calls per decision: " << per << " (level " << policy.level() << ")\n";
    } else {
        log << "predicted simulator calls per decision: at most "
            << static_cast<double>(budget.outer[0]) * practical_rooted_calls(policy.level(), 1, budget.inner, T) << "\n";
    }
    const auto ev = evaluate_policy(*in.problem, policy, c.episodes, seed, c.workers, c.traces);
    auto rec = header(c, in);
    rec["eps"] = c.eps;
    rec["level"] = policy.level();
    rec.update(to_json(ev));
    if (const auto opt = known_opt(in, c.framework)) rec["opt"] = *opt;
    emit(c, rec, out);
    return kExitOk;
}

int cmd_converge(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const int K = c.levels.value_or(10);
    if (K < 0) throw ConfigError("--levels must be nonnegative");
    const auto in = resolve(c, true);
    const auto [base, arg] = split_spec(in.name);

    std::vector<double> formula;
    if (base == "two_point") {
        for (int k = 1; k <= K; ++k) formula.push_back(two_point_gap(std::stoi(arg), k));
    } else if (K > 0 && base == "uniform_balanced") {
        formula = uniform_balanced_seq(K).gap;
    } else if (K > 0 && base == "expo_balanced") {
        formula = expo_balanced_seq(K).gap;
    } else if (K > 0 && base == "expo_unbalanced") {
        formula = expo_unbalanced_seq(K).gap;
    }

    auto rec = header(c, in);
    std::optional<double> opt = known_opt(in, Framework::Minimize);
    bool normalized = in.problem->normalized();
    std::vector<double> E(static_cast<std::size_t>(K));
    std::vector<double> se(static_cast<std::size_t>(K), 0.0);
    if (in.tree) {
        rec["source"] = "exact";
        normalized = in.tree->max_payout() <= 1.0;
        if (K > 0) {
            const auto run = exact_levels(*in.tree, K);
            for (int k = 1; k <= K; ++k) E[k - 1] = run.E(k);
        }
    } else {
        if (c.mode != "practical") throw ConfigError("converge on a simulated problem runs in practical mode");
        rec["source"] = "monte_carlo";
        const auto seed = require_seed(c);
        if (K > 0) {
            auto budget = make_budget(c);
            budget.outer = level_counts(c, K);
            log << "predicted simulator calls: " << practical_calls(budget.outer, budget.inner, in.problem->horizon())
                << "\n";
            const auto e = estimate_OPT_min(*in.problem, budget, seed);
            for (int k = 1; k <= K; ++k) {
                E[k - 1] = e.levels[k - 1].E;
                se[k - 1] = e.levels[k - 1].std_error;
            }
            rec["calls"] = e.calls;
        }
    }
    if (opt) rec["opt"] = *opt;

    const std::vector<std::string> columns{"k", "E", "std_error", "gap", "formula_gap", "bound", "hk_opt"};
    json rows = json::array();
    for (int k = 1; k <= K; ++k) {
        const double Ek = E[k - 1];
        rows.push_back({{"k", k},
                        {"E", Ek},
                        {"std_error", se[k - 1]},
                        {"gap", opt ? json(*opt - Ek) : json(nullptr)},
                        {"formula_gap", formula.empty() ? json(nullptr) : json(formula[k - 1])},
                        {"bound", normalized ? json(1.0 / (k + 1)) : json(nullptr)},
                        {"hk_opt", normalized && opt ? json(hk_bound(k, *opt)) : json(nullptr)}});
    }
    rec["columns"] = columns;
    rec["rows"] = rows;
    emit(c, rec, out);
    if (c.table) write_table(*c.table, columns, rows);
    return kExitOk;
}

/// CLI string -> JSON value of the key's kind.
json parse_flag_value(const KeySpec& spec, const std::string& text)
{
    const auto fail = [&](const char* what) -> json {
        throw ConfigError(flag_name(spec.key) + ": '" + text + "' is not " + what);
    };
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("a number");
        }
        if (used != s.size()) fail("a number");
        return v;
    };
    switch (spec.kind) {
    case Kind::Text:
        return text;
    case Kind::Real:
        return number(text);
    case Kind::Integer:
        return number(text);  // integrality checked with the rest of the config
    case Kind::Unsigned: {
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) return fail("an unsigned integer");
        try {
            return std::stoull(text);
        } catch (const std::exception&) {
            return fail("an unsigned 64-bit integer");
        }
    }
    case Kind::Flag:
        return true;
    case Kind::IntList: {
        json list = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) list.push_back(number(item));
        return list;
    }
    }
    return nullptr;
}

}  // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k{"command"};
        for (const auto& s : key_specs()) k.push_back(s.key);
        return k;
    }();
    return keys;
}

RunConfig config_from_json(const json& j, const Origin& origin_in)
{
    const Origin origin = origin_in ? origin_in : Origin([](const std::string& key) { return "config key '" + key + "'"; });
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "command") {
            if (!v.is_string()) config_error(origin, key, "expected a string");
            c.command = v.get<std::string>();
            continue;
        }
        const auto* spec = find_spec(key);
        if (!spec) config_error(origin, key, "unknown key");
        auto text = [&] {
            if (!v.is_string()) config_error(origin, key, "expected a string");
            return v.get<std::string>();
        };
        auto int_list = [&] {
            if (!v.is_array() || v.empty()) config_error(origin, key, "expected a nonempty list of counts");
            std::vector<std::int64_t> out;
            for (const auto& x : v) {
                const auto n = as_integer(x, origin, key);
                if (n < 1) config_error(origin, key, "counts must be positive");
                out.push_back(n);
            }
            return out;
        };
        if (key == "problem") c.problem = text();
        else if (key == "tree") c.tree = text();
        else if (key == "framework") {
            const auto f = text();
            if (f == "min") c.framework = Framework::Minimize;
            else if (f == "max") c.framework = Framework::Maximize;
            else config_error(origin, key, "expected 'min' or 'max', got '" + f + "'");
        } else if (key == "mode") {
            c.mode = text();
            if (c.mode != "strict" && c.mode != "practical" && c.mode != "exact")
                config_error(origin, key, "expected strict, practical or exact, got '" + c.mode + "'");
        } else if (key == "eps") {
            c.eps = as_real(v, origin, key);
            require_open_unit(c.eps, origin, key);
        } else if (key == "delta") {
            c.delta = as_real(v, origin, key);
            require_open_unit(c.delta, origin, key);
        } else if (key == "eta") {
            c.eta = as_real(v, origin, key);
            require_open_unit(*c.eta, origin, key);
        } else if (key == "trunc_U") {
            c.trunc_U = as_real(v, origin, key);
            if (!(*c.trunc_U > 0.0) || !std::isfinite(*c.trunc_U)) config_error(origin, key, "must be positive");
        } else if (key == "max_calls") {
            c.max_calls = as_real(v, origin, key);
            if (!(*c.max_calls > 0.0)) config_error(origin, key, "must be positive");
        } else if (key == "levels") {
            const auto n = as_integer(v, origin, key);
            if (n < 0 || n > 1000000) config_error(origin, key, "must lie in [0, 1e6]");
            c.levels = static_cast<int>(n);
        } else if (key == "seed") {
            if (!v.is_number_unsigned()) config_error(origin, key, "expected an unsigned integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "workers") {
            const auto n = as_integer(v, origin, key);
            if (n < 1 || n > 1024) config_error(origin, key, "must lie in [1, 1024]");
            c.workers = static_cast<int>(n);
        } else if (key == "episodes") {
            c.episodes = as_integer(v, origin, key);
            if (c.episodes < 1) config_error(origin, key, "must be at least 1");
        } else if (key == "moment_samples") {
            c.moment_samples = as_integer(v, origin, key);
            if (c.moment_samples < 2) config_error(origin, key, "must be at least 2");
        } else if (key == "grid") {
            const auto n = as_integer(v, origin, key);
            if (n < 2 || n > 10000000) config_error(origin, key, "must lie in [2, 1e7]");
            c.grid = static_cast<int>(n);
        } else if (key == "random_trees") {
            const auto n = as_integer(v, origin, key);
            if (n < 0 || n > 1000000) config_error(origin, key, "must lie in [0, 1e6]");
            c.random_trees = static_cast<int>(n);
        } else if (key == "out") c.out = text();
        else if (key == "table") c.table = text();
        else if (key == "allow_expensive" || key == "traces") {
            if (!v.is_boolean()) config_error(origin, key, "expected true or false");
            (key == "traces" ? c.traces : c.allow_expensive) = v.get<bool>();
        } else if (key == "outer") c.outer = int_list();
        else if (key == "inner") {
            c.inner.clear();
            for (auto n : int_list()) {
                if (n > 1000000) config_error(origin, key, "counts above 1e6 are not supported");
                c.inner.push_back(static_cast<int>(n));
            }
        }
    }
    if (c.command != "price" && c.command != "verify" && c.command != "policy" && c.command != "converge")
        throw ConfigError("unknown command '" + c.command + "' (expected price, verify, policy or converge)");
    if (c.problem && c.tree) throw ConfigError("give either --problem or --tree, not both");
    return c;
}

json read_config_file(const std::string& path, Origin* origin)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buffer;
    buffer << f.rdbuf();
    const std::string text = buffer.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto ? upto - 1 : 0), '\n');
        throw ConfigError(path + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    if (origin) {
        *origin = [path, text](const std::string& key) {
            const auto at = text.find("\"" + key + "\"");
            const auto line = at == std::string::npos ? 0 : 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n');
            return path + ":" + std::to_string(line) + ": key '" + key + "'";
        };
    }
    return j;
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& log)
{
    if (config.command == "price") return cmd_price(config, out, log);
    if (config.command == "verify") return cmd_verify(config, out, log);
    if (config.command == "policy") return cmd_policy(config, out, log);
    if (config.command == "converge") return cmd_converge(config, out, log);
    throw ConfigError("unknown command '" + config.command + "'");
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& log)
{
    CLI::App app{"Optimal stopping by the pure-dual expansion: pricing, verification, policies, convergence tables."};
    app.require_subcommand(1);
    const std::map<std::string, std::string> about{
        {"price", "estimate OPT (min or max framework)"},
        {"verify", "run the oracle-equivalence checks on trees"},
        {"policy", "simulate the online tau_eps policy"},
        {"converge", "tabulate E_k and the gap OPT - E_k by level"},
    };
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> given;
    std::string config_path;
    CLI::Option* config_option = nullptr;
    std::vector<CLI::App*> subs;
    for (const auto& [name, text] : about) {
        auto* sub = app.add_subcommand(name, text);
        subs.push_back(sub);
        auto* opt = sub->add_option("--config", config_path, "JSON config file; flags override its keys");
        if (!config_option) config_option = opt;
        for (const auto& spec : key_specs()) {
            const auto flag = flag_name(spec.key);
            const std::string slot = name + "/" + spec.key;
            if (spec.kind == Kind::Flag) {
                given[slot] = sub->add_flag(flag, spec.help);
            } else {
                given[slot] = sub->add_option(flag, raw[slot], spec.help);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, log);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const CLI::App* sub = nullptr;
        for (auto* s : subs)
            if (s->parsed()) sub = s;
        const std::string command = sub->get_name();

        json merged = json::object();
        Origin file_origin;
        if (!config_path.empty()) merged = read_config_file(config_path, &file_origin);
        if (!merged.is_object()) throw ConfigError(config_path + ": config must be a JSON object");
        std::map<std::string, bool> from_flag;
        for (const auto& spec : key_specs()) {
            const std::string slot = command + "/" + spec.key;
            if (given[slot]->count() == 0) continue;
            merged[spec.key] = parse_flag_value(spec, raw[slot]);
            from_flag[spec.key] = true;
        }
        if (merged.contains("command") && merged["command"] != command)
            throw ConfigError("config file is for command " + merged["command"].dump() + ", not '" + command + "'");
        merged["command"] = command;
        const Origin origin = [&](const std::string& key) {
            if (from_flag.count(key)) return flag_name(key);
            if (file_origin) return file_origin(key);
            return "config key '" + key + "'";
        };
        const auto config = config_from_json(merged, origin);
        return run_command(config, out, log);
    } catch (const PolicyAborted& e) {
        log << "error: " << e.what() << " after " << e.partial().trace.size() << " decisions\n";
        return kExitBudget;
    } catch (const BudgetExceeded& e) {
        log << "error: " << e.what() << "\n";
        if (e.ceiling() == kExpensiveCalls && e.predicted_calls() <= 9.0e18) log << "pass --allow-expensive (or a larger --max-calls) to run anyway\n";
        return kExitBudget;
    } catch (const DomainError& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvariantViolation& e) {
        log << "invariant failure: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const ToleranceNotMet& e) {
        log << "invariant failure: " << e.what() << "\n";
        return kExitInvariant;
    }
}

}  // namespace dualstop

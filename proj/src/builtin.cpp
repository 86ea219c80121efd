#include "dualstop/builtin.hpp"

#include <charconv>
#include <cmath>

namespace dualstop {

IndependentColumnsSimulator::IndependentColumnsSimulator(int horizon, ColumnSampler column)
    : horizon_(horizon), column_(std::move(column))
{
    if (horizon < 1) throw DomainError("simulator: horizon must be at least 1");
}

void IndependentColumnsSimulator::extend(std::span<double> path, int t, int upto, RandomStream& rng) const
{
    for (int s = t + 1; s <= upto; ++s) path[static_cast<std::size_t>(s - 1)] = column_(s, rng);
}

double RobbinsPayout::operator()(int t, std::span<const double> path) const
{
    const double yt = path[static_cast<std::size_t>(t - 1)];
    double rank = 0.0;
    for (int i = 0; i < t; ++i)
        if (path[static_cast<std::size_t>(i)] <= yt) rank += 1.0;
    return rank + (horizon_ - t) * yt;
}

namespace {

StoppingProblem independent(int horizon, IndependentColumnsSimulator::ColumnSampler column,
                            std::shared_ptr<const PayoutFunction> payout, ProblemTraits traits)
{
    return StoppingProblem(std::make_shared<IndependentColumnsSimulator>(horizon, std::move(column)), std::move(payout),
                           std::move(traits));
}

StoppingProblem two_period(double y1, IndependentColumnsSimulator::ColumnSampler second, std::string name,
                           std::optional<double> bound)
{
    auto column = [y1, second = std::move(second)](int t, RandomStream& rng) { return t == 1 ? y1 : second(t, rng); };
    ProblemTraits traits{std::move(name), Framework::Minimize, bound, false};
    return independent(2, std::move(column), std::make_shared<IdentityPayout>(), std::move(traits));
}

int parse_int_argument(const std::string& spec, const std::string& arg)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc() || ptr != arg.data() + arg.size())
        throw DomainError("problem '" + spec + "': expected an integer argument, got '" + arg + "'");
    return value;
}

}  // namespace

StoppingProblem iid_uniform(int horizon, Framework framework)
{
    if (horizon < 1) throw DomainError("iid_uniform: T must be at least 1");
    ProblemTraits traits{"iid_uniform(" + std::to_string(horizon) + ")", framework, 1.0, true};
    return independent(horizon, [](int, RandomStream& rng) { return rng.uniform(); }, std::make_shared<IdentityPayout>(),
                       std::move(traits));
}

StoppingProblem robbins(int horizon)
{
    if (horizon < 1) throw DomainError("robbins: T must be at least 1");
    ProblemTraits traits{"robbins(" + std::to_string(horizon) + ")", Framework::Minimize, static_cast<double>(horizon), false};
    return independent(horizon, [](int, RandomStream& rng) { return rng.uniform(); },
                       std::make_shared<RobbinsPayout>(horizon), std::move(traits));
}

StoppingProblem two_point(int n)
{
    if (n < 2) throw DomainError("two_point: n must be at least 2");
    const double p = 1.0 / n;
    auto column = [p](int t, RandomStream& rng) { return t == 1 ? p : (rng.uniform() < p ? 1.0 : 0.0); };
    ProblemTraits traits{"two_point(" + std::to_string(n) + ")", Framework::Minimize, 1.0, true};
    return independent(2, std::move(column), std::make_shared<IdentityPayout>(), std::move(traits));
}

StoppingProblem expo_balanced()
{
    return two_period(1.0, [](int, RandomStream& rng) { return rng.exponential(); }, "expo_balanced", std::nullopt);
}

StoppingProblem expo_unbalanced()
{
    return two_period(0.5, [](int, RandomStream& rng) { return rng.exponential(); }, "expo_unbalanced", std::nullopt);
}

StoppingProblem uniform_balanced()
{
    return two_period(1.0, [](int, RandomStream& rng) { return 2.0 * rng.uniform(); }, "uniform_balanced", 2.0);
}

std::vector<std::string> builtin_names()
{
    return {"iid_uniform(T)", "robbins(T)", "two_point(n)", "expo_balanced", "expo_unbalanced", "uniform_balanced",
            "tree(file)"};
}

StoppingProblem make_builtin(const std::string& spec, Framework framework)
{
    const auto open = spec.find('(');
    const std::string name = spec.substr(0, open);
    std::string arg;
    if (open != std::string::npos) {
        if (spec.back() != ')') throw DomainError("problem '" + spec + "': missing ')'");
        arg = spec.substr(open + 1, spec.size() - open - 2);
    }
    auto require_arg = [&] {
        if (arg.empty()) throw DomainError("problem '" + spec + "' needs an argument");
    };
    auto forbid_arg = [&] {
        if (open != std::string::npos) throw DomainError("problem '" + name + "' takes no argument");
    };

    if (name == "iid_uniform") {
        require_arg();
        return iid_uniform(parse_int_argument(spec, arg), framework);
    }
    if (name == "robbins") {
        require_arg();
        return robbins(parse_int_argument(spec, arg));
    }
    if (name == "two_point") {
        require_arg();
        return two_point(parse_int_argument(spec, arg));
    }
    if (name == "expo_balanced") {
        forbid_arg();
        return expo_balanced();
    }
    if (name == "expo_unbalanced") {
        forbid_arg();
        return expo_unbalanced();
    }
    if (name == "uniform_balanced") {
        forbid_arg();
        return uniform_balanced();
    }
    if (name == "tree") {
        require_arg();
        auto tree = std::make_shared<const FiniteTreeProcess>(FiniteTreeProcess::load(arg));
        return tree_problem(tree, framework, "tree(" + arg + ")");
    }
    throw DomainError("unknown problem '" + spec + "'");
}

FiniteTreeProcess two_point_tree(int n)
{
    if (n < 2) throw DomainError("two_point: n must be at least 2");
    const double p = 1.0 / n;
    std::vector<TreeNodeSpec> nodes{
        {0, std::nullopt, 1.0, p, {p}},
        {1, 0, 1.0 - p, 0.0, {0.0}},
        {2, 0, p, 1.0, {1.0}},
    };
    return FiniteTreeProcess(1, 2, std::move(nodes));
}

FiniteTreeProcess notsurelem_tree()
{
    std::vector<TreeNodeSpec> nodes{
        {0, std::nullopt, 1.0, 0.0, {0.0}},
        {1, 0, 1.0, 1.0, {1.0}},
        {2, 1, 0.5, 0.5, {0.5}},
        {3, 1, 0.5, 1.0, {1.0}},
    };
    return FiniteTreeProcess(1, 3, std::move(nodes));
}

std::vector<double> midpoint_grid(double lo, double hi, int points)
{
    if (points < 1 || !(hi > lo)) throw DomainError("midpoint_grid: need points >= 1 and hi > lo");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double h = (hi - lo) / points;
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
    return grid;
}

FiniteTreeProcess iid_grid_tree(int horizon, const std::vector<double>& grid)
{
    if (horizon < 1 || grid.empty()) throw DomainError("iid_grid_tree: empty grid or horizon");
    const double p = 1.0 / static_cast<double>(grid.size());
    std::vector<TreeNodeSpec> nodes;
    std::vector<std::int64_t> frontier{-1};
    std::int64_t next = 0;
    for (int t = 1; t <= horizon; ++t) {
        std::vector<std::int64_t> level;
        for (auto parent : frontier) {
            for (double v : grid) {
                TreeNodeSpec s;
                s.id = next++;
                if (parent >= 0) s.parent = parent;
                s.branch_prob = p;
                s.payout = v;
                s.value = {v};
                nodes.push_back(std::move(s));
                level.push_back(nodes.back().id);
            }
        }
        frontier = std::move(level);
    }
    // exact-sum probabilities for awkward grid sizes
    for (std::size_t i = grid.size() - 1; i < nodes.size(); i += grid.size())
        nodes[i].branch_prob = 1.0 - p * static_cast<double>(grid.size() - 1);
    return FiniteTreeProcess(1, horizon, std::move(nodes));
}

FiniteTreeProcess two_period_tree(double y1, const std::vector<double>& grid)
{
    if (grid.empty()) throw DomainError("two_period_tree: empty grid");
    const double p = 1.0 / static_cast<double>(grid.size());
    std::vector<TreeNodeSpec> nodes{{0, std::nullopt, 1.0, y1, {y1}}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double prob = i + 1 == grid.size() ? 1.0 - p * static_cast<double>(grid.size() - 1) : p;
        nodes.push_back({static_cast<std::int64_t>(i + 1), 0, prob, grid[i], {grid[i]}});
    }
    return FiniteTreeProcess(1, 2, std::move(nodes));
}

FiniteTreeProcess two_period_exponential_tree(double y1, int points)
{
    if (points < 1) throw DomainError("two_period_exponential_tree: points must be positive");
    // cell [a,b] of Exp(1) has conditional mean (a+1)e^{-a} - (b+1)e^{-b}, divided by mass
    std::vector<double> grid;
    const double mass = 1.0 / points;
    double a = 0.0;
    for (int i = 0; i < points; ++i) {
        const double b = i + 1 == points ? INFINITY : -std::log(1.0 - (i + 1) * mass);
        const double upper = std::isinf(b) ? 0.0 : (b + 1.0) * std::exp(-b);
        grid.push_back(((a + 1.0) * std::exp(-a) - upper) / mass);
        a = b;
    }
    return two_period_tree(y1, grid);
}

}  // namespace dualstop

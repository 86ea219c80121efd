#include "dualstop/records.hpp"

namespace dualstop {

using nlohmann::json;

json to_json(const LevelEstimate& level)
{
    return {{"k", level.k}, {"H", level.H}, {"E", level.E}, {"std_error", level.std_error}, {"samples", level.samples}};
}

json to_json(const Estimate& estimate)
{
    json levels = json::array();
    for (const auto& l : estimate.levels) levels.push_back(to_json(l));
    return {{"estimate", estimate.value},
            {"std_error", estimate.std_error},
            {"mode", to_string(estimate.mode)},
            {"eps", estimate.eps},
            {"delta", estimate.delta},
            {"calls", estimate.calls},
            {"seed", estimate.seed},
            {"levels", std::move(levels)}};
}

json to_json(const MaxMoments& m)
{
    return {{"M1", m.M1},
            {"M2", m.M2},
            {"gamma0", m.gamma0},
            {"M1_std_error", m.M1_std_error},
            {"M2_std_error", m.M2_std_error},
            {"samples", m.samples}};
}

json to_json(const MaxEstimate& e)
{
    auto j = to_json(e.estimate);
    j["U"] = e.U;
    j["K"] = e.K;
    j["relative_bound"] = e.relative_bound;
    return j;
}

json to_json(const LevelRecord& r)
{
    return {{"k", r.k}, {"H", r.H}, {"E", r.E}, {"bound", r.bound}};
}

json to_json(const PolicyDecision& d)
{
    return {{"t", d.t},
            {"stop", d.stop},
            {"statistic", d.statistic},
            {"threshold", d.threshold},
            {"payout", d.payout},
            {"calls", d.calls}};
}

json to_json(const EpisodeResult& e)
{
    json trace = json::array();
    for (const auto& d : e.trace) trace.push_back(to_json(d));
    return {{"stop_time", e.stop_time}, {"payout", e.payout}, {"calls", e.calls}, {"trace", std::move(trace)}};
}

json to_json(const PolicyEvaluation& ev)
{
    json j = {{"mean", ev.mean},
              {"std_error", ev.std_error},
              {"mean_stop_time", ev.mean_stop_time},
              {"calls", ev.calls},
              {"episodes", ev.episodes}};
    if (!ev.traces.empty()) {
        json traces = json::array();
        for (const auto& e : ev.traces) traces.push_back(to_json(e));
        j["traces"] = std::move(traces);
    }
    return j;
}

json to_json(const Check& c)
{
    json j = {{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass}};
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

json to_json(const VerifyReport& r)
{
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return {{"instance", r.instance}, {"pass", r.pass()}, {"checks", std::move(checks)}};
}

std::string dump_record(const json& record)
{
    return record.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace dualstop

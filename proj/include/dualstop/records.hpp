#pragma once

#include <nlohmann/json.hpp>

#include "dualstop/exact.hpp"
#include "dualstop/max_pricing.hpp"
#include "dualstop/nested_mc.hpp"
#include "dualstop/policy.hpp"
#include "dualstop/verify.hpp"

namespace dualstop {

// JSON forms of result types. Non-finite doubles come out as null.
nlohmann::json to_json(const LevelEstimate& level);
nlohmann::json to_json(const Estimate& estimate);
nlohmann::json to_json(const MaxMoments& moments);
nlohmann::json to_json(const MaxEstimate& estimate);
nlohmann::json to_json(const LevelRecord& record);
nlohmann::json to_json(const PolicyDecision& decision);
nlohmann::json to_json(const EpisodeResult& episode);
nlohmann::json to_json(const PolicyEvaluation& evaluation);
nlohmann::json to_json(const Check& check);
nlohmann::json to_json(const VerifyReport& report);

/// Fixed-format dump so identical results give identical bytes.
std::string dump_record(const nlohmann::json& record);

}  // namespace dualstop

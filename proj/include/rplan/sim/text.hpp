#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rplan/sim/types.hpp"

namespace rplan::sim {

// Whitespace-separated alphanumeric runs; every punctuation character is its
// own token ("Cup-1" -> Cup - 1, "(Apple, On, Table)." -> ( Apple , On , ...).
std::vector<std::string> tokenize(std::string_view text);

// Task descriptions h. Deterministic template per kind; parse_task inverts it.
std::string render_task(const TaskSpec& task);
std::optional<TaskSpec> parse_task(std::string_view h);

// Observation text used for prompting, embeddings and dataset records.
// parse_observation inverts render_observation exactly.
std::string render_observation(const Observation& obs);
std::optional<Observation> parse_observation(std::string_view text);

// Natural-language plan phrases. Rationales never contain canonical plan
// text; they use these forms ("pick up the Mug from the SideTable").
std::string plan_to_phrase(const PlanAction& plan);        // infinitive
std::string plan_to_past_phrase(const PlanAction& plan);   // for plan-history lines
std::optional<PlanAction> phrase_to_plan(std::string_view phrase);

std::string subgoal_phrase(const SubGoal& g);

// "in" for containers and the sink, "on" otherwise
std::string_view receptacle_preposition(const Symbol& receptacle);

std::string flags_suffix(const ObjectFlags& flags);  // " (sliced, heated)" or ""

}  // namespace rplan::sim

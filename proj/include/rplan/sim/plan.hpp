#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rplan::sim {

// The 11 executable plan forms. Text form is "Verb Arg1 [Arg2]".
enum class Verb {
  OpenObject,
  CloseObject,
  ToggleObject,
  SliceObject,
  GotoLocation,
  PickupObject,
  PutObject,
  CoolObject,
  HeatObject,
  CleanObject,
  End,
};

struct PlanAction {
  Verb verb = Verb::End;
  std::string arg1;  // object class or receptacle, empty for End
  std::string arg2;  // receptacle for two-argument verbs

  bool operator==(const PlanAction&) const = default;
};

// 0, 1 or 2
int verb_arity(Verb v);
// true when arg1 names a receptacle (Open/Close/Toggle/Goto)
bool verb_arg1_is_receptacle(Verb v);
std::string_view verb_name(Verb v);
std::optional<Verb> verb_from_name(std::string_view name);

std::string render_plan(const PlanAction& a);

struct PlanParse {
  std::optional<PlanAction> action;
  std::string error;  // nonempty iff !action
};

// Strict grammar: known verb, exact arity, args drawn from the catalog
// (object classes for object slots, receptacle classes for receptacle slots).
PlanParse parse_plan(std::string_view text);

}  // namespace rplan::sim

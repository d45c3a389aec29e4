#include "rplan/sim/plan.hpp"

#include <array>
#include <sstream>

#include "rplan/sim/catalog.hpp"

namespace rplan::sim {

namespace {

struct VerbInfo {
  Verb verb;
  std::string_view name;
  int arity;
  bool arg1_receptacle;
};

constexpr int kVerbCount = 11;

const std::array<VerbInfo, kVerbCount>& verb_table() {
  static const std::array<VerbInfo, kVerbCount> kTable = {{
      {Verb::OpenObject, "OpenObject", 1, true},
      {Verb::CloseObject, "CloseObject", 1, true},
      {Verb::ToggleObject, "ToggleObject", 1, true},
      {Verb::SliceObject, "SliceObject", 1, false},
      {Verb::GotoLocation, "GotoLocation", 1, true},
      {Verb::PickupObject, "PickupObject", 2, false},
      {Verb::PutObject, "PutObject", 2, false},
      {Verb::CoolObject, "CoolObject", 2, false},
      {Verb::HeatObject, "HeatObject", 2, false},
      {Verb::CleanObject, "CleanObject", 2, false},
      {Verb::End, "End", 0, false},
  }};
  return kTable;
}

const VerbInfo& info(Verb v) {
  for (const auto& e : verb_table())
    if (e.verb == v) return e;
  return verb_table().back();
}

}  // namespace

int verb_arity(Verb v) { return info(v).arity; }
bool verb_arg1_is_receptacle(Verb v) { return info(v).arg1_receptacle; }
std::string_view verb_name(Verb v) { return info(v).name; }

std::optional<Verb> verb_from_name(std::string_view name) {
  for (const auto& e : verb_table())
    if (e.name == name) return e.verb;
  return std::nullopt;
}

std::string render_plan(const PlanAction& a) {
  std::string out{verb_name(a.verb)};
  if (verb_arity(a.verb) >= 1) out += " " + a.arg1;
  if (verb_arity(a.verb) >= 2) out += " " + a.arg2;
  return out;
}

PlanParse parse_plan(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  if (words.empty()) return {std::nullopt, "empty plan"};

  auto verb = verb_from_name(words[0]);
  if (!verb) return {std::nullopt, "unknown verb: " + words[0]};

  const int arity = verb_arity(*verb);
  if (static_cast<int>(words.size()) != arity + 1)
    return {std::nullopt, "arity: " + words[0] + " expects " + std::to_string(arity) +
                              " arguments, got " + std::to_string(words.size() - 1)};

  PlanAction a;
  a.verb = *verb;
  if (arity >= 1) {
    a.arg1 = words[1];
    if (verb_arg1_is_receptacle(*verb)) {
      if (!find_receptacle_class(a.arg1)) return {std::nullopt, "unknown receptacle: " + a.arg1};
    } else {
      if (!find_object_class(a.arg1)) return {std::nullopt, "unknown object class: " + a.arg1};
    }
  }
  if (arity >= 2) {
    a.arg2 = words[2];
    if (!find_receptacle_class(a.arg2)) return {std::nullopt, "unknown receptacle: " + a.arg2};
  }
  return {a, ""};
}

}  // namespace rplan::sim

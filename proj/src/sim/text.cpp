#include "rplan/sim/text.hpp"

#include <cctype>

#include "rplan/sim/catalog.hpp"

namespace rplan::sim {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string plural(const Symbol& cls) { return cls + "s"; }

std::optional<Symbol> singular(std::string_view word) {
  if (word.size() < 2 || word.back() != 's') return std::nullopt;
  Symbol cls{word.substr(0, word.size() - 1)};
  if (!find_object_class(cls)) return std::nullopt;
  return cls;
}

// consumes `prefix` from the front of `s` if present
bool eat(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

std::string take_word(std::string_view& s) {
  size_t i = 0;
  while (i < s.size() && s[i] != ' ' && s[i] != '.') ++i;
  std::string w{s.substr(0, i)};
  s.remove_prefix(i);
  return w;
}

std::vector<std::string> flag_words(const ObjectFlags& f) {
  std::vector<std::string> out;
  if (f.sliced) out.push_back("sliced");
  if (f.heated) out.push_back("heated");
  if (f.cooled) out.push_back("cooled");
  if (f.clean) out.push_back("clean");
  return out;
}

std::optional<ObjectFlags> parse_flags(std::string_view body) {
  ObjectFlags f;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t end = body.find(", ", pos);
    std::string_view w = body.substr(pos, end == std::string_view::npos ? end : end - pos);
    if (w == "sliced")
      f.sliced = true;
    else if (w == "heated")
      f.heated = true;
    else if (w == "cooled")
      f.cooled = true;
    else if (w == "clean")
      f.clean = true;
    else
      return std::nullopt;
    if (end == std::string_view::npos) break;
    pos = end + 2;
  }
  return f;
}

// "the Apple (sliced, heated)" -> VisibleObject
std::optional<VisibleObject> parse_item(std::string_view item) {
  if (!eat(item, "the ")) return std::nullopt;
  VisibleObject v;
  size_t paren = item.find(" (");
  if (paren == std::string_view::npos) {
    v.id = Symbol{item};
  } else {
    v.id = Symbol{item.substr(0, paren)};
    std::string_view rest = item.substr(paren + 2);
    if (rest.empty() || rest.back() != ')') return std::nullopt;
    rest.remove_suffix(1);
    auto f = parse_flags(rest);
    if (!f) return std::nullopt;
    v.flags = *f;
  }
  v.cls = class_of_id(v.id);
  if (!find_object_class(v.cls)) return std::nullopt;
  return v;
}

std::string render_item(const Symbol& id, const ObjectFlags& flags) {
  return "the " + id + flags_suffix(flags);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (is_word_char(c)) {
      cur += c;
      continue;
    }
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(std::string(1, c));
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string_view receptacle_preposition(const Symbol& receptacle) {
  const auto* info = find_receptacle_class(receptacle);
  if (info && (info->openable || receptacle == "Sink")) return "in";
  return "on";
}

std::string flags_suffix(const ObjectFlags& flags) {
  auto words = flag_words(flags);
  if (words.empty()) return "";
  std::string out = " (";
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ", ";
    out += words[i];
  }
  out += ")";
  return out;
}

std::string render_task(const TaskSpec& t) {
  const std::string prep{receptacle_preposition(t.target)};
  switch (t.kind) {
    case TaskKind::PickPlace:
      return "Put a " + t.object + " " + prep + " the " + t.target + ".";
    case TaskKind::StackPlace:
      return "Put a " + t.object + " with a " + t.object2 + " in it " + prep + " the " +
             t.target + ".";
    case TaskKind::PickTwoPlace:
      return "Put two " + plural(t.object) + " " + prep + " the " + t.target + ".";
    case TaskKind::CleanPlace:
      return "Put a clean " + t.object + " " + prep + " the " + t.target + ".";
    case TaskKind::HeatPlace:
      return "Put a heated " + t.object + (t.sliced ? " slice " : " ") + prep + " the " +
             t.target + ".";
    case TaskKind::CoolPlace:
      return "Put a cold " + t.object + (t.sliced ? " slice " : " ") + prep + " the " +
             t.target + ".";
    case TaskKind::ExamineInLight:
      return "Pick up a " + t.object + " and turn on the " + t.target + ".";
  }
  return "";
}

std::optional<TaskSpec> parse_task(std::string_view h) {
  TaskSpec t;
  std::string_view s = h;

  auto finish_target = [&](std::string_view rest) -> bool {
    std::string_view r = rest;
    if (!eat(r, "in the ") && !eat(r, "on the ")) return false;
    std::string target = take_word(r);
    if (r != "." || !find_receptacle_class(target)) return false;
    t.target = target;
    return true;
  };

  if (eat(s, "Pick up a ")) {
    t.kind = TaskKind::ExamineInLight;
    t.object = take_word(s);
    if (!find_object_class(t.object)) return std::nullopt;
    if (!eat(s, " and turn on the ")) return std::nullopt;
    t.target = take_word(s);
    if (s != "." || !find_receptacle_class(t.target)) return std::nullopt;
    return t;
  }

  if (eat(s, "Put two ")) {
    t.kind = TaskKind::PickTwoPlace;
    auto cls = singular(take_word(s));
    if (!cls) return std::nullopt;
    t.object = *cls;
    if (!eat(s, " ")) return std::nullopt;
    if (!finish_target(s)) return std::nullopt;
    return t;
  }

  if (!eat(s, "Put a ")) return std::nullopt;

  if (eat(s, "clean ")) {
    t.kind = TaskKind::CleanPlace;
  } else if (eat(s, "heated ")) {
    t.kind = TaskKind::HeatPlace;
  } else if (eat(s, "cold ")) {
    t.kind = TaskKind::CoolPlace;
  } else {
    t.kind = TaskKind::PickPlace;
  }

  t.object = take_word(s);
  if (!find_object_class(t.object)) return std::nullopt;

  if ((t.kind == TaskKind::HeatPlace || t.kind == TaskKind::CoolPlace) && eat(s, " slice")) {
    t.sliced = true;
  }
  if (t.kind == TaskKind::PickPlace && eat(s, " with a ")) {
    t.kind = TaskKind::StackPlace;
    t.object2 = take_word(s);
    if (!find_object_class(t.object2)) return std::nullopt;
    if (!eat(s, " in it")) return std::nullopt;
  }
  if (!eat(s, " ")) return std::nullopt;
  if (!finish_target(s)) return std::nullopt;
  return t;
}

std::string render_observation(const Observation& obs) {
  std::string out = "You are at the " + obs.agent_at + ".";
  if (obs.local.openable)
    out += obs.local.open ? " The " + obs.agent_at + " is open." : " The " + obs.agent_at + " is closed.";
  if (obs.local.toggleable)
    out += obs.local.on ? " The " + obs.agent_at + " is on." : " The " + obs.agent_at + " is off.";
  if (obs.visible.empty()) {
    out += " You see nothing.";
  } else {
    out += " You see ";
    for (size_t i = 0; i < obs.visible.size(); ++i) {
      if (i) out += (i + 1 == obs.visible.size()) ? " and " : ", ";
      out += render_item(obs.visible[i].id, obs.visible[i].flags);
    }
    out += ".";
  }
  if (obs.inventory)
    out += " You are holding " + render_item(obs.inventory->id, obs.inventory->flags) + ".";
  else
    out += " You are holding nothing.";
  return out;
}

std::optional<Observation> parse_observation(std::string_view text) {
  Observation obs;
  std::string_view s = text;
  if (!eat(s, "You are at the ")) return std::nullopt;
  obs.agent_at = take_word(s);
  const auto* rinfo = find_receptacle_class(obs.agent_at);
  if (!rinfo || !eat(s, ". ")) return std::nullopt;
  obs.local.id = obs.agent_at;
  obs.local.openable = rinfo->openable;
  obs.local.toggleable = rinfo->toggleable;

  if (rinfo->openable) {
    if (!eat(s, "The " + obs.agent_at + " is ")) return std::nullopt;
    if (eat(s, "open. "))
      obs.local.open = true;
    else if (eat(s, "closed. "))
      obs.local.open = false;
    else
      return std::nullopt;
  }
  if (rinfo->toggleable) {
    if (!eat(s, "The " + obs.agent_at + " is ")) return std::nullopt;
    if (eat(s, "on. "))
      obs.local.on = true;
    else if (eat(s, "off. "))
      obs.local.on = false;
    else
      return std::nullopt;
  }

  if (!eat(s, "You see ")) return std::nullopt;
  if (!eat(s, "nothing. ")) {
    size_t stop = s.find(". You are holding ");
    if (stop == std::string_view::npos) return std::nullopt;
    std::string_view list = s.substr(0, stop);
    s.remove_prefix(stop + 2);
    while (!list.empty()) {
      size_t comma = list.find(", the ");
      size_t andw = list.find(" and the ");
      size_t cut = std::min(comma, andw);
      std::string_view item = list.substr(0, cut);
      auto v = parse_item(item);
      if (!v) return std::nullopt;
      obs.visible.push_back(*v);
      if (cut == std::string_view::npos) break;
      list.remove_prefix(cut == comma ? comma + 2 : andw + 5);
    }
  }

  if (!eat(s, "You are holding ")) return std::nullopt;
  if (eat(s, "nothing.")) {
    if (!s.empty()) return std::nullopt;
    return obs;
  }
  if (s.empty() || s.back() != '.') return std::nullopt;
  s.remove_suffix(1);
  auto v = parse_item(s);
  if (!v) return std::nullopt;
  obs.inventory = *v;
  return obs;
}

std::string plan_to_phrase(const PlanAction& p) {
  const std::string prep{verb_arity(p.verb) >= 2 ? receptacle_preposition(p.arg2) : ""};
  switch (p.verb) {
    case Verb::GotoLocation: return "go to the " + p.arg1;
    case Verb::PickupObject: return "pick up the " + p.arg1 + " from the " + p.arg2;
    case Verb::PutObject: return "put the " + p.arg1 + " " + prep + " the " + p.arg2;
    case Verb::HeatObject: return "heat the " + p.arg1 + " in the " + p.arg2;
    case Verb::CoolObject: return "cool the " + p.arg1 + " in the " + p.arg2;
    case Verb::CleanObject: return "clean the " + p.arg1 + " in the " + p.arg2;
    case Verb::SliceObject: return "slice the " + p.arg1;
    case Verb::OpenObject: return "open the " + p.arg1;
    case Verb::CloseObject: return "close the " + p.arg1;
    case Verb::ToggleObject: return "toggle the " + p.arg1;
    case Verb::End: return "end";
  }
  return "";
}

std::string plan_to_past_phrase(const PlanAction& p) {
  const std::string prep{verb_arity(p.verb) >= 2 ? receptacle_preposition(p.arg2) : ""};
  switch (p.verb) {
    case Verb::GotoLocation: return "gone to the " + p.arg1;
    case Verb::PickupObject: return "picked up the " + p.arg1 + " from the " + p.arg2;
    case Verb::PutObject: return "put the " + p.arg1 + " " + prep + " the " + p.arg2;
    case Verb::HeatObject: return "heated the " + p.arg1 + " in the " + p.arg2;
    case Verb::CoolObject: return "cooled the " + p.arg1 + " in the " + p.arg2;
    case Verb::CleanObject: return "cleaned the " + p.arg1 + " in the " + p.arg2;
    case Verb::SliceObject: return "sliced the " + p.arg1;
    case Verb::OpenObject: return "opened the " + p.arg1;
    case Verb::CloseObject: return "closed the " + p.arg1;
    case Verb::ToggleObject: return "toggled the " + p.arg1;
    case Verb::End: return "ended";
  }
  return "";
}

std::optional<PlanAction> phrase_to_plan(std::string_view phrase) {
  std::string_view s = phrase;
  PlanAction p;
  auto one_arg = [&](Verb v) -> std::optional<PlanAction> {
    p.verb = v;
    p.arg1 = take_word(s);
    if (!s.empty()) return std::nullopt;
    return p;
  };
  auto two_arg = [&](Verb v) -> std::optional<PlanAction> {
    p.verb = v;
    p.arg1 = take_word(s);
    if (!eat(s, " in the ") && !eat(s, " on the ") && !eat(s, " from the ")) return std::nullopt;
    p.arg2 = take_word(s);
    if (!s.empty()) return std::nullopt;
    return p;
  };
  if (s == "end") return PlanAction{Verb::End, "", ""};
  if (eat(s, "go to the ")) return one_arg(Verb::GotoLocation);
  if (eat(s, "pick up the ")) return two_arg(Verb::PickupObject);
  if (eat(s, "put the ")) return two_arg(Verb::PutObject);
  if (eat(s, "heat the ")) return two_arg(Verb::HeatObject);
  if (eat(s, "cool the ")) return two_arg(Verb::CoolObject);
  if (eat(s, "clean the ")) return two_arg(Verb::CleanObject);
  if (eat(s, "slice the ")) return one_arg(Verb::SliceObject);
  if (eat(s, "open the ")) return one_arg(Verb::OpenObject);
  if (eat(s, "close the ")) return one_arg(Verb::CloseObject);
  if (eat(s, "toggle the ")) return one_arg(Verb::ToggleObject);
  return std::nullopt;
}

std::string subgoal_phrase(const SubGoal& g) {
  switch (g.kind) {
    case SubGoal::Kind::AtCount: {
      const std::string prep{receptacle_preposition(g.receptacle)};
      if (g.count >= 2) return "put two " + plural(g.object_class) + " " + prep + " the " + g.receptacle;
      return "put one " + g.object_class + " " + prep + " the " + g.receptacle;
    }
    case SubGoal::Kind::Flag:
      switch (g.flag) {
        case FlagKind::Sliced: return "slice the " + g.object_class;
        case FlagKind::Heated: return "heat the " + g.object_class;
        case FlagKind::Cooled: return "cool the " + g.object_class;
        case FlagKind::Clean: return "clean the " + g.object_class;
      }
      return "";
    case SubGoal::Kind::Holding: return "hold the " + g.object_class;
    case SubGoal::Kind::ReceptacleOn: return "turn on the " + g.receptacle;
  }
  return "";
}

}  // namespace rplan::sim

#include "rplan/model/vocab.hpp"

#include <set>

#include "rplan/sim/catalog.hpp"
#include "rplan/sim/text.hpp"
#include "rplan/util/errors.hpp"

namespace rplan::model {

namespace {

constexpr int kNumMarkers = 7;

// every literal word the domain templates can emit
const char* kTemplateWords[] = {
    // observation / state
    "You", "are", "at", "the", "is", "open", "closed", "on", "off", "see", "nothing",
    "and", "holding", "sliced", "heated", "cooled", "clean",
    // tasks
    "Put", "a", "with", "in", "it", "two", "cold", "slice", "Pick", "up", "turn",
    // plan phrases, infinitive and past
    "go", "to", "pick", "put", "heat", "cool", "from", "close", "toggle", "end",
    "gone", "picked", "opened", "cleaned", "toggled", "ended",
    // rationales
    "The", "goal", "I", "am", "can", "here", "So", "far", "have", "done", "executed",
    "Completed", "subgoals", "none", "Remaining", "next", "subgoal", "finish", "task",
    "Therefore", "plan", "hold", "one",
    // knowledge-graph symbols
    "Agent", "Task", "At", "On", "In", "Is", "Holding", "Action", "Object", "Object2",
    "Target", "Modifier", "Count", "Open", "Closed", "Off", "Sliced", "Heated", "Cooled",
    "Clean",
    // policy context rendering
    "Observation", "History",
};

const char* kPunct[] = {"(", ")", ",", ".", ";", ":", "-", "?"};

bool no_space_before(const std::string& t) {
  return t == "," || t == "." || t == ";" || t == ":" || t == ")" || t == "?" || t == "-";
}
bool no_space_after(const std::string& t) { return t == "(" || t == "-"; }

}  // namespace

Vocab Vocab::domain() {
  std::vector<std::string> toks = {"<pad>", "<bos>", "<eos>", "<go>", "<sep>"};
  for (int i = 0; i < kNumMarkers; ++i) toks.push_back("<r" + std::to_string(i + 1) + ">");

  std::set<std::string> seen(toks.begin(), toks.end());
  auto push = [&](const std::string& t) {
    if (seen.insert(t).second) toks.push_back(t);
  };

  for (const auto* p : kPunct) push(p);
  push("1");
  push("2");
  for (const auto& c : sim::object_catalog()) {
    push(c.name);
    push(c.name + "s");  // plural used by pick-two task text
  }
  for (const auto& r : sim::receptacle_catalog()) push(r.name);
  for (int v = 0; v < 11; ++v) push(std::string(sim::verb_name(static_cast<sim::Verb>(v))));
  for (const auto* w : kTemplateWords) push(w);

  return from_tokens(std::move(toks));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.num_markers_ = kNumMarkers;
  v.rebuild_index();
  return v;
}

void Vocab::rebuild_index() {
  index_.clear();
  for (size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw VocabError("unknown token: '" + std::string(token) + "'");
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw VocabError("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<size_t>(id)];
}

int Vocab::marker(int query_index) const {
  if (query_index < 0 || query_index >= num_markers_)
    throw VocabError("marker index out of range: " + std::to_string(query_index));
  return 5 + query_index;
}

std::vector<int> Vocab::encode(std::string_view text) const {
  std::vector<int> out;
  for (const auto& t : sim::tokenize(text)) out.push_back(id(t));
  return out;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  bool suppress_space = true;  // no leading space
  for (int i : ids) {
    const std::string& t = token(i);
    if (t.size() >= 2 && t.front() == '<' && t.back() == '>') continue;  // specials
    if (!out.empty() && !suppress_space && !no_space_before(t)) out += " ";
    out += t;
    suppress_space = no_space_after(t);
  }
  return out;
}

}  // namespace rplan::model

#include "rplan/data/types.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rplan/sim/text.hpp"
#include "rplan/util/errors.hpp"

namespace rplan::data {

using nlohmann::json;

const QuerySet& default_queries() {
  static const QuerySet kQueries{{
      "What is the goal of the task?",
      "What is the current state of the agent?",
      "What do you observe around you?",
      "Which plans have been executed so far?",
      "How much progress has been made toward the goal?",
      "What is the next sub-goal?",
      "What should the next plan be?",
  }};
  return kQueries;
}

std::string expert_jsonl(const std::vector<ExpertTransition>& transitions) {
  std::string out;
  for (const auto& t : transitions) {
    json j;
    j["task_id"] = t.task_id;
    j["scene_id"] = t.scene_id;
    j["step_index"] = t.step_index;
    j["h"] = t.h;
    j["observation"] = t.o_text;
    j["plan_text"] = t.plan_text;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ExpertTransition> parse_expert_jsonl(const std::string& text) {
  std::vector<ExpertTransition> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    ExpertTransition t;
    t.task_id = j.at("task_id").get<std::string>();
    t.scene_id = j.at("scene_id").get<std::string>();
    t.step_index = j.at("step_index").get<int>();
    t.h = j.at("h").get<std::string>();
    t.o_text = j.at("observation").get<std::string>();
    t.plan_text = j.at("plan_text").get<std::string>();
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

json provenance_json(const Provenance& p) {
  json j;
  j["backend"] = p.backend;
  j["retries"] = p.retries;
  j["critic_votes"] = p.critic_votes;
  j["seed_example"] = p.seed_example;
  j["task_id"] = p.task_id;
  j["scene_id"] = p.scene_id;
  j["step_index"] = p.step_index;
  return j;
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.backend = j.at("backend").get<std::string>();
  p.retries = j.at("retries").get<int>();
  p.critic_votes = j.at("critic_votes").get<std::vector<std::string>>();
  p.seed_example = j.at("seed_example").get<bool>();
  p.task_id = j.at("task_id").get<std::string>();
  p.scene_id = j.at("scene_id").get<std::string>();
  p.step_index = j.at("step_index").get<int>();
  return p;
}

}  // namespace

std::string dataset_jsonl(const RationaleDataset& ds) {
  std::string out;
  for (const auto& t : ds.tuples) {
    json j;
    j["o"] = t.o;
    j["a"] = t.a;
    j["h"] = t.h;
    j["rationales"] = t.rationales;
    j["provenance"] = provenance_json(t.provenance);
    out += j.dump() + "\n";
  }
  for (const auto& s : ds.skips) {
    json j;
    j["skip"] = {{"task_id", s.transition.task_id},
                 {"step_index", s.transition.step_index},
                 {"attempts", s.attempts},
                 {"reason", s.reason}};
    out += j.dump() + "\n";
  }
  return out;
}

RationaleDataset parse_dataset_jsonl(const std::string& text) {
  RationaleDataset ds;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    if (j.contains("skip")) {
      SkipRecord s;
      s.transition.task_id = j["skip"].at("task_id").get<std::string>();
      s.transition.step_index = j["skip"].at("step_index").get<int>();
      s.attempts = j["skip"].at("attempts").get<int>();
      s.reason = j["skip"].at("reason").get<std::string>();
      ds.skips.push_back(std::move(s));
      continue;
    }
    RationaleTuple t;
    t.o = j.at("o").get<std::string>();
    t.a = j.at("a").get<std::string>();
    t.h = j.at("h").get<std::string>();
    t.rationales = j.at("rationales").get<std::vector<std::string>>();
    t.provenance = provenance_from_json(j.at("provenance"));
    ds.tuples.push_back(std::move(t));
  }
  return ds;
}

std::string suite_manifest_jsonl(const std::vector<sim::TaskSpec>& tasks) {
  std::string out;
  for (const auto& t : tasks) {
    json j;
    j["task_id"] = t.task_id;
    j["kind"] = std::string(sim::task_kind_name(t.kind));
    j["object"] = t.object;
    j["object2"] = t.object2;
    j["target"] = t.target;
    j["sliced"] = t.sliced;
    j["scene_id"] = t.scene_id;
    j["h"] = sim::render_task(t);
    out += j.dump() + "\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rplan::data

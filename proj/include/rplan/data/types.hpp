#pragma once

#include <string>
#include <vector>

#include "rplan/sim/types.hpp"

namespace rplan::data {

struct ExpertTransition {
  std::string task_id;
  sim::Symbol scene_id;
  int step_index = 0;
  std::string h;
  std::string o_text;      // rendered observation
  std::string plan_text;   // canonical plan form

  bool operator==(const ExpertTransition&) const = default;
};

// ordered, aligned to the query set
using RationaleSet = std::vector<std::string>;

struct QuerySet {
  std::vector<std::string> queries;
  int size() const { return static_cast<int>(queries.size()); }
};

// the seven MDP-feature queries, fixed wording
const QuerySet& default_queries();

struct Provenance {
  std::string backend;
  int retries = 0;
  std::vector<std::string> critic_votes;
  bool seed_example = false;
  std::string task_id;
  sim::Symbol scene_id;
  int step_index = 0;

  bool operator==(const Provenance&) const = default;
};

struct RationaleTuple {
  std::string o;
  std::string a;
  std::string h;
  RationaleSet rationales;
  Provenance provenance;

  bool operator==(const RationaleTuple&) const = default;
};

struct SkipRecord {
  ExpertTransition transition;
  int attempts = 0;
  std::string reason;
};

struct RationaleDataset {
  std::vector<RationaleTuple> tuples;
  std::vector<SkipRecord> skips;
};

// ---- JSON Lines artifacts ----
std::string expert_jsonl(const std::vector<ExpertTransition>& transitions);
std::vector<ExpertTransition> parse_expert_jsonl(const std::string& text);

std::string dataset_jsonl(const RationaleDataset& ds);
RationaleDataset parse_dataset_jsonl(const std::string& text);

std::string suite_manifest_jsonl(const std::vector<sim::TaskSpec>& tasks);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace rplan::data

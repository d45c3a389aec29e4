#include "rplan/data/oracle.hpp"

#include <stdexcept>

#include "rplan/sim/catalog.hpp"
#include "rplan/sim/text.hpp"
#include "rplan/util/errors.hpp"

namespace rplan::data {

ExpertCorpus ExpertCorpus::build_train() {
  ExpertCorpus c;
  for (const auto& task : sim::train_tasks()) {
    ExpertEpisode ep;
    ep.task = task;
    const auto state = sim::new_scene(task.scene_id, 0, sim::Category::Train);
    ep.traj = sim::run_expert(state, task);
    sim::WorldState st = state;
    for (const auto& rec : ep.traj.steps) {
      ep.states.push_back(st);
      ep.obs_texts.push_back(sim::render_observation(rec.obs));
      ep.plan_texts.push_back(sim::render_plan(rec.plan));
      const auto r = sim::step(st, rec.plan);
      st = r.state;
    }
    c.episodes_.push_back(std::move(ep));
  }
  const auto h_of = [](const ExpertEpisode& ep) { return sim::render_task(ep.task); };
  for (size_t e = 0; e < c.episodes_.size(); ++e) {
    for (size_t s = 0; s < c.episodes_[e].obs_texts.size(); ++s) {
      const auto key = std::make_pair(h_of(c.episodes_[e]), c.episodes_[e].obs_texts[s]);
      auto it = c.index_.find(key);
      if (it != c.index_.end()) {
        // duplicate (h, o) must agree on the next plan, otherwise the oracle
        // would be ill-defined
        const auto& prev = c.episodes_[static_cast<size_t>(it->second.first)];
        if (prev.plan_texts[static_cast<size_t>(it->second.second)] !=
            c.episodes_[e].plan_texts[s])
          throw IntegrityError("ambiguous oracle index for task " + c.episodes_[e].task.task_id);
        continue;
      }
      c.index_[key] = {static_cast<int>(e), static_cast<int>(s)};
    }
  }
  return c;
}

std::vector<ExpertTransition> ExpertCorpus::transitions() const {
  std::vector<ExpertTransition> out;
  for (const auto& ep : episodes_) {
    for (size_t s = 0; s < ep.obs_texts.size(); ++s) {
      ExpertTransition t;
      t.task_id = ep.task.task_id;
      t.scene_id = ep.task.scene_id;
      t.step_index = static_cast<int>(s);
      t.h = sim::render_task(ep.task);
      t.o_text = ep.obs_texts[s];
      t.plan_text = ep.plan_texts[s];
      out.push_back(std::move(t));
    }
  }
  return out;
}

const ExpertEpisode* ExpertCorpus::find(const std::string& h, const std::string& o_text,
                                        int* step) const {
  auto it = index_.find({h, o_text});
  if (it == index_.end()) return nullptr;
  if (step) *step = it->second.second;
  return &episodes_[static_cast<size_t>(it->second.first)];
}

namespace {

std::string decapitalize(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

std::string item_phrase(const sim::VisibleObject& v) {
  return "the " + v.id + sim::flags_suffix(v.flags);
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

RationaleSet oracle_rationales(const ExpertEpisode& ep, int step) {
  const auto& obs = ep.traj.steps[static_cast<size_t>(step)].obs;
  const auto& state = ep.states[static_cast<size_t>(step)];
  const std::string h = sim::render_task(ep.task);

  RationaleSet r(7);

  // goal restatement
  std::string goal = h;
  if (!goal.empty() && goal.back() == '.') goal.pop_back();
  r[0] = "The goal is to " + decapitalize(goal) + ".";

  // current-state summary
  r[1] = "I am at the " + obs.agent_at + ". I am holding " +
         (obs.inventory ? item_phrase(*obs.inventory) : std::string("nothing")) + ".";

  // salient observation facts
  if (obs.visible.empty()) {
    r[2] = "I can see nothing here.";
  } else {
    std::vector<std::string> items;
    for (const auto& v : obs.visible) items.push_back(item_phrase(v));
    r[2] = "I can see " + join_list(items) + " here.";
  }
  if (obs.local.openable)
    r[2] += obs.local.open ? " The " + obs.agent_at + " is open." : " The " + obs.agent_at + " is closed.";
  if (obs.local.toggleable)
    r[2] += obs.local.on ? " The " + obs.agent_at + " is on." : " The " + obs.agent_at + " is off.";

  // plan-history summary
  if (step == 0) {
    r[3] = "So far I have done nothing.";
  } else {
    std::vector<std::string> past;
    for (int i = 0; i < step; ++i)
      past.push_back(sim::plan_to_past_phrase(ep.traj.steps[static_cast<size_t>(i)].plan));
    std::string joined;
    for (size_t i = 0; i < past.size(); ++i) {
      if (i) joined += "; ";
      joined += past[i];
    }
    r[3] = "So far I have " + joined + ".";
  }

  // progress estimate: completed and remaining sub-goals
  const auto goals = sim::subgoals_of(ep.task);
  std::vector<std::string> completed, remaining;
  for (const auto& g : goals)
    (sim::subgoal_satisfied(g, state) ? completed : remaining).push_back(sim::subgoal_phrase(g));
  auto join_semi = [](const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) out += "; ";
      out += v[i];
    }
    return out.empty() ? std::string("none") : out;
  };
  r[4] = "Completed subgoals: " + join_semi(completed) + ". Remaining subgoals: " +
         join_semi(remaining) + ".";

  // next sub-goal
  r[5] = remaining.empty() ? "The next subgoal is to finish the task."
                           : "The next subgoal is to " + remaining.front() + ".";

  // next-plan justification, natural-language form only
  r[6] = "Therefore the next plan is to " +
         sim::plan_to_phrase(ep.traj.steps[static_cast<size_t>(step)].plan) + ".";
  return r;
}

std::vector<RationaleTuple> seed_examples(const ExpertCorpus& corpus) {
  // nine curated (task, step) pairs covering every instruction kind and all
  // plan families: goto, pickup, put, heat, cool, clean, slice, toggle, end
  static const std::pair<const char*, int> kPicks[] = {
      {"train-00", 0},  // goto
      {"train-01", 3},  // heat
      {"train-02", 4},  // cool -> goto target leg
      {"train-03", 3},  // clean
      {"train-04", 3},  // put
      {"train-06", 1},  // slice
      {"train-11", 2},  // open drawer
      {"train-13", 2},  // toggle lamp
      {"train-14", 6},  // end
  };
  std::vector<RationaleTuple> out;
  for (const auto& [task_id, step] : kPicks) {
    const ExpertEpisode* ep = nullptr;
    for (const auto& e : corpus.episodes())
      if (e.task.task_id == task_id) ep = &e;
    if (!ep || step >= static_cast<int>(ep->traj.steps.size()))
      throw IntegrityError("seed example out of range: " + std::string(task_id));
    RationaleTuple t;
    t.o = ep->obs_texts[static_cast<size_t>(step)];
    t.a = ep->plan_texts[static_cast<size_t>(step)];
    t.h = sim::render_task(ep->task);
    t.rationales = oracle_rationales(*ep, step);
    t.provenance.backend = "seed";
    t.provenance.seed_example = true;
    t.provenance.task_id = ep->task.task_id;
    t.provenance.scene_id = ep->task.scene_id;
    t.provenance.step_index = step;
    out.push_back(std::move(t));
  }
  return out;
}

std::string rationale_plan_phrase(const std::string& r7) {
  const std::string prefix = "Therefore the next plan is to ";
  const auto at = r7.find(prefix);
  if (at == std::string::npos) return "";
  auto rest = r7.substr(at + prefix.size());
  const auto dot = rest.find('.');
  if (dot == std::string::npos) return "";
  return rest.substr(0, dot);
}

namespace {

// extraction prompts end with "Q<j>: <query>\nA<j>:"
bool parse_extraction_prompt(const std::string& prompt, std::string* h, std::string* o,
                             int* query_index) {
  const std::string cur = "Current task:\nTask: ";
  const auto at = prompt.rfind(cur);
  if (at == std::string::npos) return false;
  auto rest = prompt.substr(at + cur.size());
  const auto h_end = rest.find('\n');
  if (h_end == std::string::npos) return false;
  *h = rest.substr(0, h_end);
  rest = rest.substr(h_end + 1);
  const std::string obs = "Observation: ";
  if (rest.rfind(obs, 0) != 0) return false;
  const auto o_end = rest.find('\n');
  *o = rest.substr(obs.size(), o_end - obs.size());
  const auto q_at = rest.rfind("\nQ");
  if (q_at == std::string::npos) return false;
  *query_index = std::atoi(rest.c_str() + q_at + 2);
  return *query_index >= 1;
}

// critic prompts quote the rationale text first and the plan last
bool parse_critic_prompt(const std::string& prompt, std::string* rationale_text,
                         std::string* plan_text) {
  const auto q1 = prompt.find('"');
  if (q1 == std::string::npos) return false;
  const auto q2 = prompt.find('"', q1 + 1);
  if (q2 == std::string::npos) return false;
  const auto q4 = prompt.rfind('"');
  if (q4 == std::string::npos || q4 <= q2) return false;
  const auto q3 = prompt.rfind('"', q4 - 1);
  if (q3 == std::string::npos || q3 <= q2) return false;
  *rationale_text = prompt.substr(q1 + 1, q2 - q1 - 1);
  *plan_text = prompt.substr(q3 + 1, q4 - q3 - 1);
  return true;
}

}  // namespace

std::string OracleBackend::complete(const std::string& prompt, const LlmGenConfig& /*cfg*/) {
  if (prompt.find("Answer with yes or no.") != std::string::npos) {
    std::string rationale_text, plan_text;
    if (!parse_critic_prompt(prompt, &rationale_text, &plan_text)) return "no";
    const auto phrase = rationale_plan_phrase(rationale_text);
    if (phrase.empty()) return "no";
    const auto plan = sim::phrase_to_plan(phrase);
    if (!plan) return "no";
    return sim::render_plan(*plan) == plan_text ? "yes" : "no";
  }

  std::string h, o;
  int query_index = 0;
  if (!parse_extraction_prompt(prompt, &h, &o, &query_index))
    throw BackendError("oracle could not parse the prompt");
  int step = 0;
  const ExpertEpisode* ep = corpus_->find(h, o, &step);
  if (!ep) throw BackendError("oracle has no ground truth for the prompted transition");
  const auto r = oracle_rationales(*ep, step);
  if (query_index > static_cast<int>(r.size()))
    throw BackendError("oracle query index out of range");
  return r[static_cast<size_t>(query_index - 1)];
}

}  // namespace rplan::data

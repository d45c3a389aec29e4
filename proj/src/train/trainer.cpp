#include "rplan/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rplan/model/checkpoint.hpp"
#include "rplan/train/contrastive.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

namespace rplan::train {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void append_logs(const std::string& path, const std::vector<EpochLog>& logs,
                 const std::string& phase) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app);
  for (const auto& l : logs) {
    nlohmann::json j;
    j["phase"] = phase;
    j["epoch"] = l.epoch;
    j["loss_rtn"] = l.loss_rtn;
    j["loss_con"] = l.loss_con;
    j["loss_total"] = l.loss_total;
    j["wall_clock_s"] = l.wall_s;
    out << j.dump() << "\n";
  }
}

void require_finite(double loss, const std::string& where) {
  if (!std::isfinite(loss))
    throw IntegrityError("training diverged (non-finite loss) in " + where);
}

}  // namespace

std::vector<EpochLog> train_reasoning(model::Reasoner& r, const GraphedDataset& gd,
                                      const TrainConfig& cfg) {
  std::vector<EpochLog> logs;
  std::vector<int> order(gd.tuples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.reasoning_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rng = make_rng(cfg.seed, "reason-epoch-" + std::to_string(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double sum_rtn = 0.0, sum_con = 0.0, sum_total = 0.0;
    for (int idx : order) {
      const auto& tuple = gd.tuples[static_cast<size_t>(idx)];
      model::Tape tape;
      model::Bind bind(tape, r.params());
      const int z = r.encode_node(tape, bind, tuple.tokens);
      const int zhat = r.attend_node(tape, bind, z);
      const int loss_rtn = r.rationale_nll_node(tape, bind, zhat, tuple.rationale_targets);

      int total = loss_rtn;
      double con_value = 0.0;
      if (cfg.lambda_con != 0.0) {
        if (auto triple = contrastive_for_anchor(gd, idx, rng)) {
          const int term = contrastive_term_node(
              tape, bind, r, zhat, gd.tuples[static_cast<size_t>(triple->positive)].tokens,
              gd.tuples[static_cast<size_t>(triple->negative)].tokens, cfg.margin);
          con_value = tape.val(term)(0, 0);
          total = tape.add_scalars({loss_rtn, tape.scale(term, cfg.lambda_con)});
        }
      }

      const double total_value = tape.val(total)(0, 0);
      require_finite(total_value, "train_reasoning");
      sum_rtn += tape.val(loss_rtn)(0, 0);
      sum_con += con_value;
      sum_total += total_value;

      r.params().zero_grads();
      tape.backward(total);
      bind.harvest_grads();
      r.params().sgd_step(cfg.reasoning_lr);
    }

    EpochLog log;
    log.epoch = epoch;
    const double n = static_cast<double>(order.size());
    log.loss_rtn = sum_rtn / n;
    log.loss_con = sum_con / n;
    log.loss_total = sum_total / n;
    log.wall_s = seconds_since(t0);
    logs.push_back(log);
    if (!cfg.checkpoint_path.empty()) model::save_reasoner(cfg.checkpoint_path, r);
  }
  append_logs(cfg.log_path, logs, "reasoning");
  return logs;
}

std::vector<int> rationale_context_tokens(const std::vector<std::vector<int>>& streams) {
  std::vector<int> ctx;
  for (size_t i = 0; i < streams.size(); ++i) {
    if (i) ctx.push_back(model::Vocab::kSep);
    ctx.insert(ctx.end(), streams[i].begin(), streams[i].end());
  }
  return ctx;
}

std::vector<EpochLog> train_planning(model::Planner& p, const model::Reasoner& frozen,
                                     const GraphedDataset& gd, const TrainConfig& cfg) {
  const auto teacher_hash_before = frozen.params().value_hash();

  // the teacher is frozen, so its rationales per tuple are constants;
  // generate them once
  std::vector<std::vector<int>> contexts(gd.tuples.size());
  for (size_t i = 0; i < gd.tuples.size(); ++i)
    contexts[i] = rationale_context_tokens(frozen.decode_rationales(gd.tuples[i].tokens));

  std::vector<EpochLog> logs;
  std::vector<int> order(gd.tuples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.planning_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rng = make_rng(cfg.seed, "plan-epoch-" + std::to_string(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double sum = 0.0;
    for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.planning_batch)) {
      model::Tape tape;
      model::Bind bind(tape, p.params());
      std::vector<int> losses;
      const size_t end = std::min(order.size(), at + static_cast<size_t>(cfg.planning_batch));
      for (size_t i = at; i < end; ++i) {
        const auto& tuple = gd.tuples[static_cast<size_t>(order[i])];
        losses.push_back(
            p.nll_node(tape, bind, contexts[static_cast<size_t>(order[i])], tuple.plan_tokens));
      }
      const int loss =
          tape.scale(tape.add_scalars(losses), 1.0 / static_cast<double>(losses.size()));
      const double value = tape.val(loss)(0, 0);
      require_finite(value, "train_planning");
      sum += value * static_cast<double>(losses.size());

      p.params().zero_grads();
      tape.backward(loss);
      bind.harvest_grads();
      p.params().sgd_step(cfg.planning_lr);
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss_total = sum / static_cast<double>(order.size());
    log.wall_s = seconds_since(t0);
    logs.push_back(log);
  }

  if (frozen.params().value_hash() != teacher_hash_before)
    throw IntegrityError("frozen reasoning-policy was mutated during planner training");
  append_logs(cfg.log_path, logs, "planning");
  return logs;
}

std::string render_policy_context(const std::string& h, const std::string& o_text,
                                  const std::vector<std::string>& history_plans) {
  std::string out = "Task: " + h + " Observation: " + o_text + " History: ";
  if (history_plans.empty()) {
    out += "none.";
    return out;
  }
  for (size_t i = 0; i < history_plans.size(); ++i) {
    if (i) out += "; ";
    out += history_plans[i];
  }
  out += ".";
  return out;
}

std::vector<EpochLog> train_end2end(model::Planner& p, const data::RationaleDataset& ds,
                                    const GraphedDataset& gd, const TrainConfig& cfg) {
  // context: (h, o, plan history) rendered text per tuple
  std::vector<std::vector<int>> contexts(gd.tuples.size());
  for (size_t i = 0; i < gd.tuples.size(); ++i) {
    const auto& gt = gd.tuples[i];
    const auto& row = ds.tuples[static_cast<size_t>(gt.dataset_index)];
    std::vector<std::string> history;
    const auto& episode = gd.episodes[static_cast<size_t>(gt.episode)];
    for (int j = 0; j < gt.pos_in_episode; ++j)
      history.push_back(gd.tuples[static_cast<size_t>(episode[static_cast<size_t>(j)])].plan_text);
    contexts[i] = p.vocab().encode(render_policy_context(row.h, row.o, history));
  }

  std::vector<EpochLog> logs;
  std::vector<int> order(gd.tuples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.planning_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rng = make_rng(cfg.seed, "e2e-epoch-" + std::to_string(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.planning_batch)) {
      model::Tape tape;
      model::Bind bind(tape, p.params());
      std::vector<int> losses;
      const size_t end = std::min(order.size(), at + static_cast<size_t>(cfg.planning_batch));
      for (size_t i = at; i < end; ++i)
        losses.push_back(p.nll_node(tape, bind, contexts[static_cast<size_t>(order[i])],
                                    gd.tuples[static_cast<size_t>(order[i])].plan_tokens));
      const int loss =
          tape.scale(tape.add_scalars(losses), 1.0 / static_cast<double>(losses.size()));
      const double value = tape.val(loss)(0, 0);
      require_finite(value, "train_end2end");
      sum += value * static_cast<double>(losses.size());
      p.params().zero_grads();
      tape.backward(loss);
      bind.harvest_grads();
      p.params().sgd_step(cfg.planning_lr);
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss_total = sum / static_cast<double>(order.size());
    log.wall_s = seconds_since(t0);
    logs.push_back(log);
  }
  append_logs(cfg.log_path, logs, "end2end");
  return logs;
}

}  // namespace rplan::train

#include "rplan/data/builder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rplan/util/errors.hpp"

namespace rplan::data {

std::string render_transition(const ExpertTransition& tx) {
  return tx.h + " " + tx.o_text + " " + tx.plan_text;
}

std::string render_tuple_for_retrieval(const RationaleTuple& t) {
  return t.h + " " + t.o + " " + t.a;
}

namespace {

void append_example(std::string& out, int number, const RationaleTuple& t, const QuerySet& qs) {
  out += "Example " + std::to_string(number) + ":\n";
  out += "Task: " + t.h + "\n";
  out += "Observation: " + t.o + "\n";
  for (int j = 0; j < qs.size(); ++j) {
    out += "Q" + std::to_string(j + 1) + ": " + qs.queries[static_cast<size_t>(j)] + "\n";
    out += "A" + std::to_string(j + 1) + ": " + t.rationales[static_cast<size_t>(j)] + "\n";
  }
  out += "\n";
}

}  // namespace

std::string render_prompt(const QuerySet& qs, const std::vector<RationaleTuple>& examples,
                          const ExpertTransition& tx, const std::vector<std::string>& priors,
                          int query_index) {
  std::string out =
      "You are a household agent. Answer each query about the current task using the "
      "context.\n\n";
  for (size_t i = 0; i < examples.size(); ++i)
    append_example(out, static_cast<int>(i + 1), examples[i], qs);
  out += "Current task:\n";
  out += "Task: " + tx.h + "\n";
  out += "Observation: " + tx.o_text + "\n";
  for (size_t j = 0; j < priors.size(); ++j) {
    out += "Q" + std::to_string(j + 1) + ": " + qs.queries[j] + "\n";
    out += "A" + std::to_string(j + 1) + ": " + priors[j] + "\n";
  }
  out += "Q" + std::to_string(query_index + 1) + ": " +
         qs.queries[static_cast<size_t>(query_index)] + "\n";
  out += "A" + std::to_string(query_index + 1) + ":";
  return out;
}

std::string render_critic_prompt(const RationaleSet& rationales, const std::string& plan_text,
                                 int variant) {
  std::string joined;
  for (size_t i = 0; i < rationales.size(); ++i) {
    if (i) joined += " ";
    joined += rationales[i];
  }
  switch (variant % 3) {
    case 0:
      return "Can the rationale \"" + joined + "\" lead to the next plan \"" + plan_text +
             "\"? Answer with yes or no.";
    case 1:
      return "Does the rationale \"" + joined +
             "\" contain enough information to derive the next plan \"" + plan_text +
             "\"? Answer with yes or no.";
    default:
      return "Given only the rationale \"" + joined + "\", is \"" + plan_text +
             "\" the correct next plan? Answer with yes or no.";
  }
}

struct AuditLog::Impl {
  std::ofstream out;
};

AuditLog::AuditLog(std::string path) : impl_(new Impl) {
  impl_->out.open(path, std::ios::trunc);
  if (!impl_->out) {
    delete impl_;
    impl_ = nullptr;
    throw ConfigError("cannot open audit log: " + path);
  }
}

AuditLog::~AuditLog() { delete impl_; }

void AuditLog::record(const std::string& purpose, const std::string& prompt,
                      const std::string& completion) {
  nlohmann::json j;
  j["purpose"] = purpose;
  j["prompt"] = prompt;
  j["completion"] = completion;
  impl_->out << j.dump() << "\n";
}

RationaleSet extract_rationales(const QuerySet& qs, const std::vector<RationaleTuple>& examples,
                                const ExpertTransition& tx, LLMBackend& backend,
                                const LlmGenConfig& gen, AuditLog* audit) {
  RationaleSet priors;
  for (int l = 0; l < qs.size(); ++l) {
    const auto prompt = render_prompt(qs, examples, tx, priors, l);
    auto completion = backend.complete(prompt, gen);
    if (audit) audit->record("extract", prompt, completion);
    // trim surrounding whitespace
    const auto first = completion.find_first_not_of(" \t\n\r");
    const auto last = completion.find_last_not_of(" \t\n\r");
    if (first == std::string::npos) throw MalformedRationale("empty completion for query " +
                                                             std::to_string(l + 1));
    completion = completion.substr(first, last - first + 1);
    priors.push_back(std::move(completion));
  }
  return priors;
}

namespace {

// "yes"/"no" from the first word; anything else is unparseable
std::optional<bool> parse_vote(const std::string& completion) {
  std::string word;
  for (char c : completion) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!word.empty()) break;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)))
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else
      break;
  }
  if (word == "yes") return true;
  if (word == "no") return false;
  return std::nullopt;
}

}  // namespace

bool self_critic(const RationaleSet& rationales, const std::string& plan_text,
                 LLMBackend& backend, const LlmGenConfig& gen, int n_variants,
                 std::vector<std::string>* votes_out, AuditLog* audit) {
  if (n_variants % 2 == 0) throw ConfigError("critic variant count must be odd");
  int yes = 0;
  for (int v = 0; v < n_variants; ++v) {
    const auto prompt = render_critic_prompt(rationales, plan_text, v);
    const auto completion = backend.complete(prompt, gen);
    if (audit) audit->record("critic", prompt, completion);
    if (votes_out) votes_out->push_back(completion);
    const auto vote = parse_vote(completion);
    if (vote && *vote) ++yes;  // unparseable counts as no
  }
  return yes * 2 > n_variants;
}

RationaleDataset build_dataset(const std::vector<ExpertTransition>& d_exp, const QuerySet& qs,
                               LLMBackend& backend, const BuilderConfig& cfg,
                               const rel::Embedder& embedder,
                               std::vector<RationaleTuple> seeds) {
  std::unique_ptr<AuditLog> audit;
  if (!cfg.audit_path.empty()) audit = std::make_unique<AuditLog>(cfg.audit_path);

  RationaleDataset ds;

  // seeds pass through the same critic gate so every admitted tuple carries
  // verifiable votes
  for (auto& seed : seeds) {
    std::vector<std::string> votes;
    const bool ok = self_critic(seed.rationales, seed.a, backend, cfg.gen, cfg.critic_variants,
                                &votes, audit.get());
    seed.provenance.critic_votes = votes;
    if (ok) {
      ds.tuples.push_back(std::move(seed));
    } else {
      SkipRecord s;
      s.transition.task_id = seed.provenance.task_id;
      s.transition.step_index = seed.provenance.step_index;
      s.attempts = 1;
      s.reason = "seed example failed the critic";
      ds.skips.push_back(std::move(s));
    }
  }

  for (const auto& tx : d_exp) {
    int attempts = 0;
    while (true) {
      ++attempts;
      // retrieve in-context examples from the growing dataset
      std::vector<std::string> candidates;
      candidates.reserve(ds.tuples.size());
      for (const auto& t : ds.tuples) candidates.push_back(render_tuple_for_retrieval(t));
      const auto picked = rel::top_k(embedder, render_transition(tx), candidates, cfg.k);
      std::vector<RationaleTuple> examples;
      for (int idx : picked) examples.push_back(ds.tuples[static_cast<size_t>(idx)]);

      std::string failure;
      RationaleSet rationales;
      std::vector<std::string> votes;
      bool ok = false;
      try {
        rationales = extract_rationales(qs, examples, tx, backend, cfg.gen, audit.get());
        ok = self_critic(rationales, tx.plan_text, backend, cfg.gen, cfg.critic_variants, &votes,
                         audit.get());
        if (!ok) failure = "critic rejected the rationales";
      } catch (const MalformedRationale& e) {
        failure = e.what();
      } catch (const BackendError& e) {
        failure = std::string("backend error: ") + e.what();
      }

      if (ok) {
        RationaleTuple t;
        t.o = tx.o_text;
        t.a = tx.plan_text;
        t.h = tx.h;
        t.rationales = std::move(rationales);
        t.provenance.backend = backend.identity();
        t.provenance.retries = attempts - 1;
        t.provenance.critic_votes = std::move(votes);
        t.provenance.task_id = tx.task_id;
        t.provenance.scene_id = tx.scene_id;
        t.provenance.step_index = tx.step_index;
        ds.tuples.push_back(std::move(t));
        break;
      }
      if (attempts > cfg.max_retries) {
        SkipRecord s;
        s.transition = tx;
        s.attempts = attempts;
        s.reason = failure;
        ds.skips.push_back(std::move(s));
        break;
      }
    }
  }
  return ds;
}

}  // namespace rplan::data

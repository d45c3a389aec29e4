#pragma once

#include <memory>
#include <string>

#include "rplan/model/planner.hpp"
#include "rplan/model/reasoner.hpp"

namespace rplan::model {

// Binary container: magic + JSON meta (kind tag, config, vocab) + named
// parameter tensors as little-endian doubles. Bitwise round trip.
void save_reasoner(const std::string& path, const Reasoner& r);
void save_planner(const std::string& path, const Planner& p, const std::string& kind = "planner");

// `expected_kind` lets End2End checkpoints reuse the planner container with
// a distinct section tag.
std::unique_ptr<Reasoner> load_reasoner(const std::string& path, const Vocab& vocab);
std::unique_ptr<Planner> load_planner(const std::string& path, const Vocab& vocab,
                                      const std::string& expected_kind = "planner");

}  // namespace rplan::model

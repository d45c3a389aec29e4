#pragma once

#include <cstdint>

namespace rplan::train {

enum class LossKind { Rationale, Contrastive, Plan };

// Central finite differences against the analytic gradient over every
// parameter group of a toy model (dims <= 16). Returns the worst relative
// error, |analytic - numeric| / max(|analytic|, |numeric|, 1).
double grad_check(LossKind kind, std::uint64_t seed);

}  // namespace rplan::train

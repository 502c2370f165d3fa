#pragma once

#include "smpriv/ba.hpp"
#include "smpriv/load_models.hpp"

namespace smpriv {

// Randomized source-selection policy: each slot is served entirely by the
// AES (probability P/E[X]) or entirely by the grid. I = (1 - P/E[X]) H(X).
CurvePoint time_division(const DiscreteLoadModel& model, double power, Unit unit = Unit::Bits);

// Grid-output clipping at threshold k*c for the N-point uniform model with
// spacing c: P = (N-1-k)(N-k) c / (2N), I = log2 N - ((N-k)/(2N)) log2(N-k).
CurvePoint limit_max_output(std::size_t levels, double spacing, std::size_t threshold,
                            Unit unit = Unit::Bits);

// Exact (P, I) of the clip-at-level-k policy for an arbitrary pmf, from the
// tail of the distribution. limit_max_output above keeps the simpler
// uniform-model bookkeeping; this variant matches a slot-level simulation.
CurvePoint limit_max_clip(const DiscreteLoadModel& model, std::size_t threshold,
                          Unit unit = Unit::Bits);

}  // namespace smpriv

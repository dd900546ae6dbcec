#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "erw/common.hpp"
#include "erw/lattice.hpp"

namespace erw {

/// Exact law of the count vector Y_n: probability per reachable count state.
struct ExactLaw {
    std::int64_t n = 0;
    std::map<std::vector<std::int64_t>, double> table;

    double total_mass() const;
};

/// Forward dynamic programming over count states, valid because the law of
/// Y_{n+1} given the past depends on the history only through Y_n. The state
/// count guard (default 10^6) is overridable for experimentation.
ExactLaw exact_law(std::int64_t n, const StepSet& steps, const MemoryParams& params,
                   std::size_t max_states = 1000000);

struct LawMoments {
    Vec mean_counts;    // E[Y_n]
    Vec mean_position;  // E[S_n]
    double s = 0.0;     // E|S_n - E[S_n]|^2
    double t = 0.0;
    double u = 0.0;
};

LawMoments exact_moments_from_law(const ExactLaw& law, const StepSet& steps);

/// Literal history-based law: enumerates all step sequences with
/// probabilities from the definition (uniform memory index, then the
/// repeat/reverse kernel), aggregated by count vector. n <= 6 only.
ExactLaw history_simulator_law(std::int64_t n, const StepSet& steps, const MemoryParams& params);

/// Total-variation distance between two laws on count states.
double total_variation(const ExactLaw& a, const ExactLaw& b);

}  // namespace erw

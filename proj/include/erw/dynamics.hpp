#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erw/common.hpp"
#include "erw/lattice.hpp"
#include "erw/rng.hpp"

namespace erw {

/// Full state of a single walk after n steps. Count vector indices follow
/// the step indexing: i < m are odd-class steps v_{i+1}, i >= m their
/// negations. The martingale triple (zeta, compensator, martingale) is
/// maintained from n = 2 on; below that the fields are zero sentinels.
struct WalkState {
    std::int64_t n = 0;
    std::vector<std::int64_t> counts;  // Y_n, length 2m
    Vec position;                      // S_n
    Vec auxiliary;                     // T_n
    Vec martingale;                    // M_n
    Vec compensator;                   // R_n
    double zeta = 0.0;                 // zeta_n (zeta_2 = 1)
    Vec anchor;                        // S_2, subtracted so that M_2 = 0

    std::int64_t odd_count() const { return (n + 1) / 2; }
    std::int64_t even_count() const { return n / 2; }
};

/// Distribution of the next step identity over all 2m directions. Only the
/// parity-correct half can be nonzero.
struct StepLaw {
    std::vector<double> probs;
};

/// Law of X_1: uniform over the m odd-class directions.
StepLaw initial_step_law(int m);

/// Law of X_{n+1} given counts Y_n, i.e. H_{n+1} Y_n / n evaluated without
/// forming the matrix. Requires n >= 1.
StepLaw step_law_from_counts(const std::vector<std::int64_t>& counts, std::int64_t n,
                             const MemoryParams& params);

StepLaw step_law(const WalkState& state, const MemoryParams& params);

/// Fresh state after the first step, which is chosen by inverse CDF over
/// the uniform law on V_odd using `u`.
WalkState walk_start(const StepSet& steps, double u);

/// One transition n -> n+1 driven by a single uniform draw: inverse-CDF
/// sampling over step_law in fixed index order, then count/position/
/// auxiliary/martingale updates.
WalkState advance(const WalkState& state, const StepSet& steps, const MemoryParams& params,
                  double u);

namespace detail {
// Shared core used by advance() and the simulation loop. `flat` is the
// 2m x d row-major matrix of step vectors, `vbar` the mean odd step.
void advance_core(WalkState& st, const double* flat, int m, int d, const MemoryParams& mp,
                  const double* vbar, double u, bool with_martingale);
}  // namespace detail

/// Reusable single-walk engine: owns the state and a keyed RNG stream, no
/// allocation per step. Martingale tracking can be switched off for bulk
/// ensembles where only S, T and counts are aggregated.
class Walker {
  public:
    Walker(const StepSet& steps, const MemoryParams& params, bool track_martingale = true);

    /// Restarts the walk on stream (seed, stream) and performs the first step.
    void reset(std::uint64_t seed, std::uint64_t stream);

    /// Advances until n = target (no-op if already past).
    void run_to(std::int64_t target_n);

    const WalkState& state() const { return state_; }
    int dimension() const { return d_; }
    int directions() const { return 2 * m_; }

  private:
    int m_;
    int d_;
    MemoryParams params_;
    std::vector<double> flat_;
    Vec vbar_;
    bool track_martingale_;
    WalkState state_;
    Xoshiro256pp rng_{0};
};

/// Runs one walk to n_max and snapshots the state at each checkpoint.
/// Deterministic given (seed, stream). Throws TooShort for n_max < 2.
std::vector<WalkState> run_walk(const StepSet& steps, const MemoryParams& params,
                                std::int64_t n_max, std::uint64_t seed, std::uint64_t stream,
                                const std::vector<std::int64_t>& checkpoints);

/// Default schedule: powers of two up to n_max, plus n_max itself.
std::vector<std::int64_t> pow2_checkpoints(std::int64_t n_max);

/// k evenly spaced checkpoints ending at n_max.
std::vector<std::int64_t> linear_checkpoints(std::int64_t n_max, int k);

/// Writes snapshots as CSV with header n,S_1..,T_1..,M_1..,Y_1..
void write_trajectory_csv(const std::string& path, const std::vector<WalkState>& snapshots,
                          int dimension, int m);

}  // namespace erw

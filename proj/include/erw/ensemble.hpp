#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erw/common.hpp"
#include "erw/dynamics.hpp"
#include "erw/lattice.hpp"
#include "erw/moments.hpp"
#include "erw/report.hpp"

namespace erw {

struct EnsembleConfig {
    std::int64_t walks = 1;
    std::int64_t n_max = 0;
    std::vector<std::int64_t> checkpoints;  // empty: powers of two plus n_max
    std::uint64_t seed = 0;
    int parallelism = 0;  // worker hint; 0 = hardware, ERW_THREADS caps
    bool collect_positions = false;  // keep per-walk S at checkpoints
};

/// Aggregated estimators at one checkpoint. Centered sums are taken about
/// the exact E[S_n], so e2 and m2e estimate E|S_n - E[S_n]|^2 and its matrix
/// form directly; cov_S is the usual sample covariance about the sample
/// mean. Standard errors are sample-std/sqrt(N).
struct CheckpointStats {
    std::int64_t n = 0;
    std::int64_t walks = 0;
    Vec mean_S;
    Vec se_mean_S;
    Mat cov_S;
    Mat m2e;       // (1/N) sum (S - E[S_n])(S - E[S_n])^T
    Mat se_m2e;    // per-entry standard errors of m2e
    Vec mean_counts;
    Vec se_mean_counts;
    double e2 = 0.0;
    double se_e2 = 0.0;
    Vec skewness;         // of S - E[S_n], per coordinate
    Vec excess_kurtosis;  // of S - E[S_n], per coordinate
};

struct EnsembleResult {
    std::vector<std::int64_t> checkpoints;
    std::vector<CheckpointStats> stats;
    int dimension = 0;
    int workers = 0;
    double steps_per_second = 0.0;  // aggregate over all workers
    // Per-walk positions at checkpoints when collected: positions[(i*K + k)*d + c].
    std::vector<double> positions;

    const CheckpointStats& at(std::int64_t n) const;
};

/// Runs N independent walks on streams (seed, walk index) and aggregates
/// block sums with a fixed pairwise tree reduction, so the result is
/// bitwise identical for any worker count.
EnsembleResult run_ensemble(const EnsembleConfig& config, const StepSet& steps,
                            const MemoryParams& params);

/// Compares the empirical covariance of (S_n - E[S_n]) / sqrt(norm) against
/// the regime's limit covariance, entrywise within max(rel_band * |expected|,
/// 4 SE). norm is n (diffusive) or n log n (critical); rel_band < 0 picks the
/// regime default (0.05 diffusive, 0.15 critical).
CheckReport clt_check(const CheckpointStats& stats, const AsymptoticPrediction& prediction,
                      RegimeKind regime, double rel_band = -1.0);

/// Superdiffusive scaling-limit check at the final checkpoint: mean of
/// S_n/n^delta within 4 SE of zero, mean of |S_n/n^delta|^2 within rel_band
/// of c_alpha_beta, and the per-walk doubling diagnostic: the median of
/// |S_{4n}/(4n)^delta - S_n/n^delta| over walks must shrink by more than
/// min_decay when the base n doubles. Requires collected positions.
CheckReport superdiffusive_check(const EnsembleResult& result, const StepSet& steps,
                                 const MemoryParams& params, double c_alpha_beta,
                                 double rel_band = 0.05, double min_decay = 1.0);

/// Single-long-walk law of large numbers report: gates on
/// max_v |Y_n(v)/n - 1/(2m)| < max_count_dev at the final snapshot, and
/// reports the regime's normalized path statistic over the last three
/// decades as an informational diagnostic.
CheckReport slln_check(const std::vector<WalkState>& snapshots, const StepSet& steps,
                       const MemoryParams& params, double max_count_dev = 0.01);

/// CSV with header n,mean_S_*,cov_S_** (row-major),e2,se_e2,meanY_*.
void write_ensemble_csv(const std::string& path, const EnsembleResult& result, int m);

}  // namespace erw

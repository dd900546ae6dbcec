#pragma once

#include <set>
#include <string>
#include <vector>

#include "erw/common.hpp"

namespace erw {

// Tolerance for comparing user-supplied lattice vectors. These are input
// data, not computed quantities, so an absolute tolerance is appropriate.
inline constexpr double kVectorTol = 1e-12;

/// Odd-step directions of a bipartite periodic lattice. The even-step set is
/// implied as the negations, indexed v_{m+i} = -v_i.
struct StepSet {
    int dimension = 0;                // d
    std::vector<Vec> odd_steps;       // v_1..v_m

    int m() const { return static_cast<int>(odd_steps.size()); }
    int directions() const { return 2 * m(); }

    /// Step vector for a full index in 0..2m-1 (i >= m gives -v_{i-m}).
    Vec step(int i) const;

    /// All 2m step vectors flattened row-major (i * dimension + c), for the
    /// simulation hot path.
    std::vector<double> flattened_steps() const;

    /// True when V_odd and -V_odd share no vector, i.e. the negation closure
    /// has 2m distinct elements. The walk dynamics are defined only in this
    /// case; the geometric quantities (vbar, sigma^2, covariance shapes) make
    /// sense for any step list.
    bool is_disjoint() const;
};

/// Throws OverlapViolation unless steps.is_disjoint().
void require_disjoint(const StepSet& steps);

/// Memory parameters (p, q) with the derived (alpha, beta, gamma, delta).
struct MemoryParams {
    double p = 0.0;
    double q = 0.0;
    int m = 0;
    double alpha = 0.0;  // (mp-1)/(m-1)
    double beta = 0.0;   // (mq-1)/(m-1)
    double gamma = 0.0;  // (alpha+beta)/2
    double delta = 0.0;  // (alpha-beta)/2
};

enum class RegimeKind { Diffusive, Critical, Superdiffusive };

const char* regime_name(RegimeKind kind);

struct Regime {
    RegimeKind kind = RegimeKind::Diffusive;
    bool gamma_is_one = false;
    bool delta_is_one = false;

    bool degenerate() const { return gamma_is_one || delta_is_one; }
};

/// Validates raw vectors as an odd-step set: m >= 2, nonzero, pairwise
/// distinct, and disjoint from its negation (v_i + v_j != 0 for all i, j).
/// Throws Error with code EmptySet, ZeroVector, DuplicateVector,
/// OverlapViolation or DimensionMismatch.
StepSet validate_step_set(const std::vector<Vec>& raw_vectors);

/// Derives (alpha, beta, gamma, delta) from (p, q, m). Throws OutOfRange.
MemoryParams derive_memory_params(double p, double q, int m);

/// Classifies by delta: diffusive (< 1/2), critical (= 1/2), superdiffusive
/// (> 1/2); flags the deterministic cases gamma = 1 and delta = 1.
Regime classify_regime(const MemoryParams& params);

/// Mean odd step, (1/m) sum of v in V_odd.
Vec mean_odd_step(const StepSet& steps);

/// Built-in example lattices: hexagonal, brick_wall, distorted_hexagonal,
/// two_step_line. Throws UnknownName. Note that brick_wall is the partially
/// overlapping case ((1,0) and -(-1,0) coincide): it is exposed for the
/// geometric operations but rejected by every simulation entry point.
StepSet builtin_lattice(const std::string& name);

std::vector<std::string> builtin_lattice_names();

/// Loads a lattice spec file {"dimension": int, "odd_steps": [[...],...]}.
/// Unknown fields are rejected. Throws ParseError, then validates.
StepSet load_step_set_json(const std::string& path);

std::string step_set_to_json(const StepSet& steps);

}  // namespace erw

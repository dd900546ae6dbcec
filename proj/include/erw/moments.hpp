#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "erw/common.hpp"
#include "erw/lattice.hpp"
#include "erw/urn.hpp"

namespace erw {

/// One row of the deterministic moment trace at time n. eta is defined from
/// n = 3, zeta from n = 2 (NaN before); tau is an empty sum (0) before n = 3.
struct MomentRow {
    std::int64_t n = 0;
    double sigma2 = 0.0;  // E|X_n - E[X_n]|^2
    double s = 0.0;       // E|S_n - E[S_n]|^2
    double t = 0.0;       // E|T_n - E[T_n]|^2
    double u = 0.0;       // E[(S_n - E[S_n])^T (T_n - E[T_n])]
    double eta = 0.0;
    double zeta = 0.0;
    double tau = 0.0;
};

/// a_n = ceil(n/2)/m and b_n = floor(n/2)/m, the exact expected per-vector
/// counts on the odd and even halves.
std::pair<double, double> expected_counts(std::int64_t n, int m);

/// E[S_n] = (a_n - b_n) m vbar: vbar for odd n, zero for even n.
Vec expected_position(std::int64_t n, const StepSet& steps);

/// Variance of a single step, sum_i |v_i|^2 pi_i - |sum_i v_i pi_i|^2 with
/// pi the unconditional law of X_n (uniform over V_odd for n = 1, otherwise
/// H_n E[Y_{n-1}]/(n-1)).
double step_variance(std::int64_t n, const StepSet& steps, const MemoryParams& params);

/// Streaming evaluation of the coupled recursions for s_n, t_n, u_n together
/// with sigma^2_n, eta_n, zeta_n and tau_n. O(m^2) per step, O(1) memory.
class MomentEngine {
  public:
    MomentEngine(const StepSet& steps, const MemoryParams& params);

    void step();  // n -> n+1

    std::int64_t n() const { return n_; }
    double sigma2() const { return sigma2_; }
    double s() const { return s_; }
    double t() const { return t_; }
    double u() const { return u_; }
    double eta() const { return eta_; }
    double zeta() const { return zeta_; }
    double tau() const { return tau_; }
    MomentRow row() const { return {n_, sigma2_, s_, t_, u_, eta_, zeta_, tau_}; }

  private:
    double sigma2_at(std::int64_t n) const;

    MemoryParams params_;
    GeneratorMatrices gen_;
    std::vector<Vec> step_vectors_;  // all 2m directions
    std::int64_t n_ = 1;
    double sigma2_ = 0.0, s_ = 0.0, t_ = 0.0, u_ = 0.0;
    double eta_ = 0.0, zeta_ = 0.0, tau_ = 0.0;
};

/// Runs the recursion to n_max, optionally reporting every row.
MomentRow second_moment_recursion(std::int64_t n_max, const StepSet& steps,
                                  const MemoryParams& params,
                                  const std::function<void(const MomentRow&)>& sink = nullptr);

/// Closed forms via log-gamma, used to cross-check the iterative products.
double zeta_closed_form(std::int64_t n, double delta);  // n >= 2
double eta_closed_form(std::int64_t n, double delta);   // n >= 3
/// Leading-order tau for delta < 1/2: Gamma(2+delta)^2 n^(1-2delta)/(1-2delta).
double tau_asymptote(std::int64_t n, double delta);

struct ScalingTriple {
    double eta = 0.0;
    double zeta = 0.0;
    double tau = 0.0;
};

/// (eta_n, zeta_n, tau_n) at n = n_max by iteration. Requires n_max >= 3.
ScalingTriple scaling_sequences(std::int64_t n_max, const MemoryParams& params);

/// Recursion for the 2m x 2m centered count covariance E[Ybar_n Ybar_n^T].
class CountCovariance {
  public:
    CountCovariance(const StepSet& steps, const MemoryParams& params);

    void step();  // n -> n+1
    std::int64_t n() const { return n_; }
    const Mat& matrix() const { return cov_; }

    /// Quadratic functionals recovering s_n, t_n and u_n from the count
    /// covariance; the independent route to the second-moment recursion.
    double s_functional() const;
    double t_functional() const;
    double u_functional() const;

  private:
    MemoryParams params_;
    GeneratorMatrices gen_;
    Mat v_map_;  // d x 2m, S = V Y
    Mat w_map_;  // d x 2m, T = W Y
    std::int64_t n_ = 1;
    Mat cov_;
};

Mat count_covariance_recursion(std::int64_t n_max, const StepSet& steps,
                               const MemoryParams& params);

struct AsymptoticPrediction {
    RegimeKind regime = RegimeKind::Diffusive;
    double sigma2 = 0.0;
    Mat cov_base;         // (1/m) sum (v - vbar)(v - vbar)^T
    double scale = 1.0;   // 1/(1-2delta) diffusive, 1 critical
    std::string normalization;
    std::optional<double> c_alpha_beta;  // superdiffusive second-moment constant

    Mat cov_limit() const;  // scale * cov_base
};

/// Limiting constants of the regime: sigma^2, the CLT covariance shape, and
/// in the superdiffusive case C_{alpha,beta}. Refuses gamma = 1 / delta = 1
/// (DegenerateParams) and, when `expect` is given, a mismatched regime
/// (WrongRegime).
AsymptoticPrediction limit_constants(const StepSet& steps, const MemoryParams& params,
                                     std::optional<RegimeKind> expect = std::nullopt,
                                     double series_tolerance = 1e-3);

struct SuperdiffusiveConstant {
    double value = 0.0;
    double tail_bound = 0.0;
    std::int64_t terms = 0;
};

/// Evaluates C_{alpha,beta} = (Gamma(3)/Gamma(3+2delta)) { s_3 +
/// sum_{k>=3} (1/eta_{k+1}) ((2gamma/k)(-1)^k u_k + sigma^2_{k+1}) },
/// stopping once a conservative tail bound drops below `tolerance`.
SuperdiffusiveConstant superdiffusive_constant(const StepSet& steps, const MemoryParams& params,
                                               double tolerance);

/// E[X_{n+1} | Y_n = counts] via the one-step increment formula
/// (delta/n) S_n + (gamma/n)(-1)^n T_n + {(1-gamma)(-1)^n - (delta/n) 1_odd(n)} vbar.
Vec conditional_step_mean(const std::vector<std::int64_t>& counts, std::int64_t n,
                          const StepSet& steps, const MemoryParams& params);

/// Writes the moment trace CSV (header n,sigma2_n,s_n,t_n,u_n,eta_n,zeta_n,tau_n)
/// for n = 1..n_max, keeping every `every`-th row plus the final row.
void write_moments_csv(const std::string& path, std::int64_t n_max, const StepSet& steps,
                       const MemoryParams& params, std::int64_t every = 1);

}  // namespace erw

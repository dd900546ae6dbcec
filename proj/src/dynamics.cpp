#include "erw/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace erw {

StepLaw initial_step_law(int m) {
    StepLaw law;
    law.probs.assign(2 * m, 0.0);
    for (int i = 0; i < m; ++i) law.probs[i] = 1.0 / m;
    return law;
}

StepLaw step_law_from_counts(const std::vector<std::int64_t>& counts, std::int64_t n,
                             const MemoryParams& params) {
    const int m = static_cast<int>(counts.size()) / 2;
    if (n < 1) throw Error(ErrorCode::OutOfRange, "step law needs n >= 1");
    StepLaw law;
    law.probs.assign(2 * m, 0.0);
    const bool next_odd = ((n + 1) % 2) != 0;
    const int base = next_odd ? 0 : m;
    const int mirror = next_odd ? m : 0;
    // counts in the class of the candidates / in the opposite class
    std::int64_t same = 0, opp = 0;
    for (int i = 0; i < m; ++i) {
        same += counts[base + i];
        opp += counts[mirror + i];
    }
    const double cterm = (1.0 - params.alpha) * same + (1.0 - params.beta) * opp;
    const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(n));
    for (int i = 0; i < m; ++i) {
        const double w = m * (params.alpha * counts[base + i] + params.beta * counts[mirror + i]) +
                         cterm;
        law.probs[base + i] = w * scale;
    }
    return law;
}

StepLaw step_law(const WalkState& state, const MemoryParams& params) {
    return step_law_from_counts(state.counts, state.n, params);
}

WalkState walk_start(const StepSet& steps, double u) {
    require_disjoint(steps);
    const int m = steps.m();
    const int d = steps.dimension;
    WalkState st;
    st.counts.assign(2 * m, 0);
    st.position.assign(d, 0.0);
    st.auxiliary.assign(d, 0.0);
    st.martingale.assign(d, 0.0);
    st.compensator.assign(d, 0.0);
    st.anchor.assign(d, 0.0);
    int pick = static_cast<int>(u * m);
    pick = std::min(pick, m - 1);
    st.counts[pick] = 1;
    const Vec v = steps.step(pick);
    for (int c = 0; c < d; ++c) {
        st.position[c] = v[c];
        st.auxiliary[c] = v[c];  // T gains (-1)^0 X_1
    }
    st.n = 1;
    return st;
}

namespace detail {

void advance_core(WalkState& st, const double* flat, int m, int d, const MemoryParams& mp,
                  const double* vbar, double u, bool with_martingale) {
    const std::int64_t n = st.n;
    const bool next_odd = ((n + 1) & 1) != 0;  // n even
    const std::int64_t n_oddcls = (n + 1) / 2;
    const std::int64_t n_evencls = n / 2;
    const int base = next_odd ? 0 : m;
    const int mirror = next_odd ? m : 0;
    const double cterm = next_odd
                             ? (1.0 - mp.alpha) * n_oddcls + (1.0 - mp.beta) * n_evencls
                             : (1.0 - mp.alpha) * n_evencls + (1.0 - mp.beta) * n_oddcls;

    // Inverse CDF over the unnormalized weights w_i = m n * P(next = v_i),
    // scanned in fixed index order; sum of weights is exactly m n.
    const double threshold = u * (static_cast<double>(m) * static_cast<double>(n));
    int pick = base + m - 1;
    double cum = 0.0;
    for (int i = 0; i < m; ++i) {
        cum += m * (mp.alpha * st.counts[base + i] + mp.beta * st.counts[mirror + i]) + cterm;
        if (cum > threshold) {
            pick = base + i;
            break;
        }
    }

    const double sign = next_odd ? 1.0 : -1.0;  // (-1)^n
    double invz = 0.0;
    if (with_martingale && n >= 2) {
        // R_{n+1} = R_n + zeta_{n+1}^{-1} ( (gamma/n)(-1)^n T_n
        //            + { (1-gamma)(-1)^n - (delta/n) 1_odd(n) } vbar ),
        // evaluated before T_n and S_n are touched.
        const double inv_n = 1.0 / static_cast<double>(n);
        const double zeta_next = st.zeta * (1.0 + mp.delta * inv_n);
        invz = 1.0 / zeta_next;
        const double tcoef = invz * mp.gamma * inv_n * sign;
        const double vcoef =
            invz * ((1.0 - mp.gamma) * sign - (next_odd ? 0.0 : mp.delta * inv_n));
        for (int c = 0; c < d; ++c)
            st.compensator[c] += tcoef * st.auxiliary[c] + vcoef * vbar[c];
        st.zeta = zeta_next;
    }

    ++st.counts[pick];
    const double* v = flat + static_cast<size_t>(pick) * d;
    for (int c = 0; c < d; ++c) {
        st.position[c] += v[c];
        st.auxiliary[c] += sign * v[c];  // T gains (-1)^n X_{n+1}
    }
    st.n = n + 1;

    if (with_martingale) {
        if (st.n == 2) {
            st.zeta = 1.0;
            for (int c = 0; c < d; ++c) {
                st.compensator[c] = 0.0;
                st.anchor[c] = st.position[c];
                st.martingale[c] = 0.0;
            }
        } else if (st.n >= 3) {
            for (int c = 0; c < d; ++c)
                st.martingale[c] = invz * st.position[c] - st.compensator[c] - st.anchor[c];
        }
    }
}

}  // namespace detail

WalkState advance(const WalkState& state, const StepSet& steps, const MemoryParams& params,
                  double u) {
    require_disjoint(steps);
    WalkState st = state;
    const std::vector<double> flat = steps.flattened_steps();
    const Vec vbar = mean_odd_step(steps);
    detail::advance_core(st, flat.data(), steps.m(), steps.dimension, params, vbar.data(), u,
                         true);
    return st;
}

Walker::Walker(const StepSet& steps, const MemoryParams& params, bool track_martingale)
    : m_(steps.m()),
      d_(steps.dimension),
      params_(params),
      flat_(steps.flattened_steps()),
      vbar_(mean_odd_step(steps)),
      track_martingale_(track_martingale) {
    require_disjoint(steps);
    state_.counts.assign(2 * m_, 0);
    state_.position.assign(d_, 0.0);
    state_.auxiliary.assign(d_, 0.0);
    state_.martingale.assign(d_, 0.0);
    state_.compensator.assign(d_, 0.0);
    state_.anchor.assign(d_, 0.0);
}

void Walker::reset(std::uint64_t seed, std::uint64_t stream) {
    rng_ = make_stream(seed, stream);
    std::fill(state_.counts.begin(), state_.counts.end(), 0);
    std::fill(state_.position.begin(), state_.position.end(), 0.0);
    std::fill(state_.auxiliary.begin(), state_.auxiliary.end(), 0.0);
    std::fill(state_.martingale.begin(), state_.martingale.end(), 0.0);
    std::fill(state_.compensator.begin(), state_.compensator.end(), 0.0);
    std::fill(state_.anchor.begin(), state_.anchor.end(), 0.0);
    state_.zeta = 0.0;
    int pick = static_cast<int>(rng_.next_double() * m_);
    pick = std::min(pick, m_ - 1);
    state_.counts[pick] = 1;
    for (int c = 0; c < d_; ++c) {
        state_.position[c] = flat_[static_cast<size_t>(pick) * d_ + c];
        state_.auxiliary[c] = state_.position[c];
    }
    state_.n = 1;
}

void Walker::run_to(std::int64_t target_n) {
    while (state_.n < target_n)
        detail::advance_core(state_, flat_.data(), m_, d_, params_, vbar_.data(),
                             rng_.next_double(), track_martingale_);
}

std::vector<WalkState> run_walk(const StepSet& steps, const MemoryParams& params,
                                std::int64_t n_max, std::uint64_t seed, std::uint64_t stream,
                                const std::vector<std::int64_t>& checkpoints) {
    if (n_max < 2) throw Error(ErrorCode::TooShort, "run_walk needs n_max >= 2");
    std::vector<std::int64_t> schedule = checkpoints;
    if (schedule.empty()) schedule = pow2_checkpoints(n_max);
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

    Walker walker(steps, params, true);
    walker.reset(seed, stream);
    std::vector<WalkState> snaps;
    for (std::int64_t target : schedule) {
        if (target < 1 || target > n_max) continue;
        walker.run_to(target);
        snaps.push_back(walker.state());
    }
    return snaps;
}

std::vector<std::int64_t> pow2_checkpoints(std::int64_t n_max) {
    std::vector<std::int64_t> cps;
    for (std::int64_t n = 1; n < n_max && n > 0; n *= 2) cps.push_back(n);
    cps.push_back(n_max);
    return cps;
}

std::vector<std::int64_t> linear_checkpoints(std::int64_t n_max, int k) {
    if (k < 1) throw Error(ErrorCode::ConfigError, "linear checkpoint count must be >= 1");
    std::vector<std::int64_t> cps;
    for (int i = 1; i <= k; ++i) {
        std::int64_t n = static_cast<std::int64_t>(
            std::llround(static_cast<double>(i) * static_cast<double>(n_max) / k));
        if (n >= 1) cps.push_back(n);
    }
    cps.push_back(n_max);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

void write_trajectory_csv(const std::string& path, const std::vector<WalkState>& snapshots,
                          int dimension, int m) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorCode::ConfigError, "cannot open output file '" + path + "'");
    std::fprintf(f, "n");
    for (int c = 1; c <= dimension; ++c) std::fprintf(f, ",S_%d", c);
    for (int c = 1; c <= dimension; ++c) std::fprintf(f, ",T_%d", c);
    for (int c = 1; c <= dimension; ++c) std::fprintf(f, ",M_%d", c);
    for (int i = 1; i <= 2 * m; ++i) std::fprintf(f, ",Y_%d", i);
    std::fprintf(f, "\n");
    for (const WalkState& st : snapshots) {
        std::fprintf(f, "%lld", static_cast<long long>(st.n));
        for (int c = 0; c < dimension; ++c) std::fprintf(f, ",%.17g", st.position[c]);
        for (int c = 0; c < dimension; ++c) std::fprintf(f, ",%.17g", st.auxiliary[c]);
        for (int c = 0; c < dimension; ++c) std::fprintf(f, ",%.17g", st.martingale[c]);
        for (int i = 0; i < 2 * m; ++i)
            std::fprintf(f, ",%lld", static_cast<long long>(st.counts[i]));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace erw

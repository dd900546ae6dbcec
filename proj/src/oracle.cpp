#include "erw/oracle.hpp"

#include <cmath>

#include "erw/dynamics.hpp"

namespace erw {

double ExactLaw::total_mass() const {
    double mass = 0.0;
    for (const auto& [state, prob] : table) mass += prob;
    return mass;
}

ExactLaw exact_law(std::int64_t n, const StepSet& steps, const MemoryParams& params,
                   std::size_t max_states) {
    require_disjoint(steps);
    if (n < 1) throw Error(ErrorCode::OutOfRange, "exact_law needs n >= 1");
    const int m = steps.m();
    ExactLaw law;
    law.n = 1;
    for (int i = 0; i < m; ++i) {
        std::vector<std::int64_t> state(2 * m, 0);
        state[i] = 1;
        law.table[state] = 1.0 / m;
    }
    for (std::int64_t step = 1; step < n; ++step) {
        std::map<std::vector<std::int64_t>, double> next;
        for (const auto& [state, prob] : law.table) {
            const StepLaw sl = step_law_from_counts(state, step, params);
            for (int i = 0; i < 2 * m; ++i) {
                if (sl.probs[i] <= 0.0) continue;
                std::vector<std::int64_t> succ = state;
                ++succ[i];
                next[std::move(succ)] += prob * sl.probs[i];
            }
            if (next.size() > max_states)
                throw Error(ErrorCode::TooLarge,
                            "count-state table exceeds " + std::to_string(max_states));
        }
        law.table = std::move(next);
        law.n = step + 1;
    }
    return law;
}

LawMoments exact_moments_from_law(const ExactLaw& law, const StepSet& steps) {
    const int m = steps.m();
    const int d = steps.dimension;
    LawMoments out;
    out.mean_counts.assign(2 * m, 0.0);
    out.mean_position.assign(d, 0.0);
    Vec mean_aux(d, 0.0);
    std::vector<Vec> vs;
    for (int i = 0; i < 2 * m; ++i) vs.push_back(steps.step(i));

    auto position_of = [&](const std::vector<std::int64_t>& state, Vec& s, Vec& t) {
        std::fill(s.begin(), s.end(), 0.0);
        std::fill(t.begin(), t.end(), 0.0);
        for (int i = 0; i < 2 * m; ++i) {
            if (state[i] == 0) continue;
            const double w = static_cast<double>(state[i]);
            for (int c = 0; c < d; ++c) {
                s[c] += w * vs[i][c];
                t[c] += (i < m ? w : -w) * vs[i][c];
            }
        }
    };

    Vec s(d), t(d);
    for (const auto& [state, prob] : law.table) {
        for (int i = 0; i < 2 * m; ++i) out.mean_counts[i] += prob * state[i];
        position_of(state, s, t);
        for (int c = 0; c < d; ++c) {
            out.mean_position[c] += prob * s[c];
            mean_aux[c] += prob * t[c];
        }
    }
    for (const auto& [state, prob] : law.table) {
        position_of(state, s, t);
        for (int c = 0; c < d; ++c) {
            const double ds = s[c] - out.mean_position[c];
            const double dt = t[c] - mean_aux[c];
            out.s += prob * ds * ds;
            out.t += prob * dt * dt;
            out.u += prob * ds * dt;
        }
    }
    return out;
}

namespace {

// P(G_k(v_from) = v_to) for the parity class of step k.
double kernel_prob(bool k_odd, int from, int to, int m, const MemoryParams& params) {
    const bool to_odd = to < m;
    if (k_odd != to_odd) return 0.0;
    const bool from_same_class = (from < m) == k_odd;
    if (from_same_class) {
        // repeat class: p on the same direction
        return (from == to) ? params.p : (1.0 - params.p) / (m - 1);
    }
    // opposite class: q on the negation, which is the mirrored index
    const int mirrored = (from + m) % (2 * m);
    return (mirrored == to) ? params.q : (1.0 - params.q) / (m - 1);
}

void enumerate_histories(std::vector<int>& seq, double prob, std::int64_t n, int m,
                         const MemoryParams& params,
                         std::map<std::vector<std::int64_t>, double>& table) {
    if (static_cast<std::int64_t>(seq.size()) == n) {
        std::vector<std::int64_t> counts(2 * m, 0);
        for (int idx : seq) ++counts[idx];
        table[counts] += prob;
        return;
    }
    const std::int64_t k = static_cast<std::int64_t>(seq.size()) + 1;  // index of the next step
    const bool k_odd = (k % 2) != 0;
    for (int to = 0; to < 2 * m; ++to) {
        // average over the uniformly remembered past step
        double p_to = 0.0;
        for (int idx : seq) p_to += kernel_prob(k_odd, idx, to, m, params);
        p_to /= static_cast<double>(seq.size());
        if (p_to <= 0.0) continue;
        seq.push_back(to);
        enumerate_histories(seq, prob * p_to, n, m, params, table);
        seq.pop_back();
    }
}

}  // namespace

ExactLaw history_simulator_law(std::int64_t n, const StepSet& steps,
                               const MemoryParams& params) {
    require_disjoint(steps);
    if (n < 1) throw Error(ErrorCode::OutOfRange, "history_simulator_law needs n >= 1");
    if (n > 6)
        throw Error(ErrorCode::TooLarge,
                    "history enumeration is limited to n <= 6 (m (2m)^(n-1) sequences)");
    const int m = steps.m();
    ExactLaw law;
    law.n = n;
    std::vector<int> seq;
    for (int first = 0; first < m; ++first) {
        seq.assign(1, first);
        if (n == 1) {
            std::vector<std::int64_t> counts(2 * m, 0);
            counts[first] = 1;
            law.table[counts] += 1.0 / m;
        } else {
            enumerate_histories(seq, 1.0 / m, n, m, params, law.table);
        }
    }
    return law;
}

double total_variation(const ExactLaw& a, const ExactLaw& b) {
    double tv = 0.0;
    for (const auto& [state, prob] : a.table) {
        const auto it = b.table.find(state);
        tv += std::abs(prob - (it == b.table.end() ? 0.0 : it->second));
    }
    for (const auto& [state, prob] : b.table)
        if (a.table.find(state) == a.table.end()) tv += std::abs(prob);
    return 0.5 * tv;
}

}  // namespace erw

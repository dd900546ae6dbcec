#include "erw/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace erw {

namespace {

// Per-checkpoint running sums for one block of walks. x = S - E[S_n].
// Layout of buf: sum_x (d) | sum_xx (d*d) | sum_x3 (d) | sum_x4 (d) |
// sum_q4 (d*d, (x_i x_j)^2) | sum_r2 | sum_r4 | sum_Y (2m) | sum_Y2 (2m).
struct CkptAccum {
    std::int64_t count = 0;
    std::vector<double> buf;

    void init(int d, int m2) { buf.assign(3 * d + 2 * d * d + 2 + 2 * m2, 0.0); }

    void add(const CkptAccum& other) {
        count += other.count;
        for (size_t i = 0; i < buf.size(); ++i) buf[i] += other.buf[i];
    }
};

struct BlockAccum {
    std::vector<CkptAccum> per_ckpt;

    void init(int k, int d, int m2) {
        per_ckpt.resize(k);
        for (auto& a : per_ckpt) a.init(d, m2);
    }

    void add(const BlockAccum& other) {
        for (size_t i = 0; i < per_ckpt.size(); ++i) per_ckpt[i].add(other.per_ckpt[i]);
    }
};

void accumulate(CkptAccum& acc, const WalkState& st, const Vec& expected_s, int d, int m2) {
    double* sum_x = acc.buf.data();
    double* sum_xx = sum_x + d;
    double* sum_x3 = sum_xx + d * d;
    double* sum_x4 = sum_x3 + d;
    double* sum_q4 = sum_x4 + d;
    double* sum_r = sum_q4 + d * d;
    double* sum_y = sum_r + 2;
    double* sum_y2 = sum_y + m2;

    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
        const double x = st.position[c] - expected_s[c];
        sum_x[c] += x;
        const double x2 = x * x;
        sum_x3[c] += x2 * x;
        sum_x4[c] += x2 * x2;
        r2 += x2;
    }
    for (int i = 0; i < d; ++i) {
        const double xi = st.position[i] - expected_s[i];
        for (int j = 0; j < d; ++j) {
            const double prod = xi * (st.position[j] - expected_s[j]);
            sum_xx[i * d + j] += prod;
            sum_q4[i * d + j] += prod * prod;
        }
    }
    sum_r[0] += r2;
    sum_r[1] += r2 * r2;
    for (int i = 0; i < m2; ++i) {
        const double y = static_cast<double>(st.counts[i]);
        sum_y[i] += y;
        sum_y2[i] += y * y;
    }
    ++acc.count;
}

CheckpointStats finalize(const CkptAccum& acc, std::int64_t n, const Vec& expected_s, int d,
                         int m2) {
    const double* sum_x = acc.buf.data();
    const double* sum_xx = sum_x + d;
    const double* sum_x3 = sum_xx + d * d;
    const double* sum_x4 = sum_x3 + d;
    const double* sum_q4 = sum_x4 + d;
    const double* sum_r = sum_q4 + d * d;
    const double* sum_y = sum_r + 2;
    const double* sum_y2 = sum_y + m2;
    const double nn = static_cast<double>(acc.count);

    CheckpointStats st;
    st.n = n;
    st.walks = acc.count;
    st.mean_S.assign(d, 0.0);
    st.se_mean_S.assign(d, 0.0);
    st.cov_S = Mat(d, d);
    st.m2e = Mat(d, d);
    st.se_m2e = Mat(d, d);
    st.skewness.assign(d, 0.0);
    st.excess_kurtosis.assign(d, 0.0);
    Vec mean_x(d, 0.0);
    for (int c = 0; c < d; ++c) {
        mean_x[c] = sum_x[c] / nn;
        st.mean_S[c] = expected_s[c] + mean_x[c];
    }
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double mij = sum_xx[i * d + j] / nn;
            st.m2e(i, j) = mij;
            if (acc.count > 1)
                st.cov_S(i, j) = (sum_xx[i * d + j] - nn * mean_x[i] * mean_x[j]) / (nn - 1.0);
            const double var_q = std::max(0.0, sum_q4[i * d + j] / nn - mij * mij);
            st.se_m2e(i, j) = std::sqrt(var_q / nn);
        }
    }
    for (int c = 0; c < d; ++c) {
        const double m1 = mean_x[c];
        const double raw2 = sum_xx[c * d + c] / nn;
        const double raw3 = sum_x3[c] / nn;
        const double raw4 = sum_x4[c] / nn;
        const double c2 = std::max(0.0, raw2 - m1 * m1);
        st.se_mean_S[c] = std::sqrt(c2 / nn);
        const double c3 = raw3 - 3.0 * m1 * raw2 + 2.0 * m1 * m1 * m1;
        const double c4 = raw4 - 4.0 * m1 * raw3 + 6.0 * m1 * m1 * raw2 - 3.0 * m1 * m1 * m1 * m1;
        if (c2 > 0.0) {
            st.skewness[c] = c3 / std::pow(c2, 1.5);
            st.excess_kurtosis[c] = c4 / (c2 * c2) - 3.0;
        }
    }
    st.e2 = sum_r[0] / nn;
    st.se_e2 = std::sqrt(std::max(0.0, sum_r[1] / nn - st.e2 * st.e2) / nn);
    st.mean_counts.assign(m2, 0.0);
    st.se_mean_counts.assign(m2, 0.0);
    for (int i = 0; i < m2; ++i) {
        st.mean_counts[i] = sum_y[i] / nn;
        const double var = std::max(0.0, sum_y2[i] / nn - st.mean_counts[i] * st.mean_counts[i]);
        st.se_mean_counts[i] = std::sqrt(var / nn);
    }
    return st;
}

int resolve_workers(int hint) {
    int workers = hint > 0 ? hint : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* env = std::getenv("ERW_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < workers) workers = cap;
    }
    return workers;
}

constexpr std::int64_t kBlockSize = 1024;  // walks per block; fixed so the
                                           // reduction tree does not depend
                                           // on the worker count

}  // namespace

const CheckpointStats& EnsembleResult::at(std::int64_t n) const {
    for (const auto& st : stats)
        if (st.n == n) return st;
    throw Error(ErrorCode::ConfigError, "no checkpoint at n = " + std::to_string(n));
}

EnsembleResult run_ensemble(const EnsembleConfig& config, const StepSet& steps,
                            const MemoryParams& params) {
    if (config.walks < 1) throw Error(ErrorCode::ConfigError, "walks must be >= 1");
    if (config.n_max < 2) throw Error(ErrorCode::TooShort, "ensemble needs n_max >= 2");
    std::vector<std::int64_t> cps =
        config.checkpoints.empty() ? pow2_checkpoints(config.n_max) : config.checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    for (std::int64_t cp : cps)
        if (cp < 1 || cp > config.n_max)
            throw Error(ErrorCode::ConfigError, "checkpoint outside [1, n_max]");
    const int k = static_cast<int>(cps.size());
    const int d = steps.dimension;
    const int m2 = steps.directions();
    std::vector<Vec> expected_s(k);
    for (int i = 0; i < k; ++i) expected_s[i] = expected_position(cps[i], steps);

    const std::int64_t num_blocks = (config.walks + kBlockSize - 1) / kBlockSize;
    std::vector<BlockAccum> blocks(num_blocks);
    const int workers =
        static_cast<int>(std::min<std::int64_t>(resolve_workers(config.parallelism), num_blocks));

    EnsembleResult result;
    result.checkpoints = cps;
    result.dimension = d;
    result.workers = workers;
    if (config.collect_positions)
        result.positions.assign(static_cast<size_t>(config.walks) * k * d, 0.0);

    std::atomic<std::int64_t> next_block{0};
    const auto t0 = std::chrono::steady_clock::now();
    auto worker_fn = [&]() {
        Walker walker(steps, params, /*track_martingale=*/false);
        for (;;) {
            const std::int64_t b = next_block.fetch_add(1);
            if (b >= num_blocks) break;
            BlockAccum& accum = blocks[b];
            accum.init(k, d, m2);
            const std::int64_t lo = b * kBlockSize;
            const std::int64_t hi = std::min(config.walks, lo + kBlockSize);
            for (std::int64_t i = lo; i < hi; ++i) {
                walker.reset(config.seed, static_cast<std::uint64_t>(i));
                for (int c = 0; c < k; ++c) {
                    walker.run_to(cps[c]);
                    accumulate(accum.per_ckpt[c], walker.state(), expected_s[c], d, m2);
                    if (config.collect_positions) {
                        double* slot = result.positions.data() +
                                       (static_cast<size_t>(i) * k + c) * d;
                        for (int cc = 0; cc < d; ++cc) slot[cc] = walker.state().position[cc];
                    }
                }
            }
        }
    };
    if (workers == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(t1 - t0).count();
    result.steps_per_second =
        elapsed > 0 ? static_cast<double>(config.walks) * config.n_max / elapsed : 0.0;

    // Pairwise tree reduction over blocks; shape depends only on the block
    // count, never on scheduling.
    std::vector<BlockAccum>& layer = blocks;
    std::int64_t len = num_blocks;
    while (len > 1) {
        const std::int64_t half = len / 2;
        for (std::int64_t i = 0; i < half; ++i) layer[i].add(layer[len - 1 - i]);
        len = len - half;
    }

    for (int c = 0; c < k; ++c)
        result.stats.push_back(finalize(layer[0].per_ckpt[c], cps[c], expected_s[c], d, m2));
    return result;
}

CheckReport clt_check(const CheckpointStats& stats, const AsymptoticPrediction& prediction,
                      RegimeKind regime, double rel_band) {
    if (regime != prediction.regime)
        throw Error(ErrorCode::WrongRegime, "prediction was computed for a different regime");
    if (regime == RegimeKind::Superdiffusive)
        throw Error(ErrorCode::WrongRegime,
                    "no normal limit in the superdiffusive regime; use superdiffusive_check");
    if (rel_band < 0.0) rel_band = (regime == RegimeKind::Critical) ? 0.15 : 0.05;
    const double norm = (regime == RegimeKind::Critical)
                            ? static_cast<double>(stats.n) * std::log(static_cast<double>(stats.n))
                            : static_cast<double>(stats.n);
    const Mat expected = prediction.cov_limit();
    const int d = expected.rows;
    CheckReport rep;
    rep.check = regime == RegimeKind::Critical ? "clt_critical" : "clt_diffusive";
    nlohmann::json obs = nlohmann::json::array(), exp = nlohmann::json::array(),
                   tol = nlohmann::json::array();
    bool pass = true;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double o = stats.m2e(i, j) / norm;
            const double e = expected(i, j);
            const double t = std::max(rel_band * std::abs(e), 4.0 * stats.se_m2e(i, j) / norm);
            if (std::abs(o - e) > t) pass = false;
            obs.push_back(o);
            exp.push_back(e);
            tol.push_back(t);
        }
    }
    rep.pass = pass;
    rep.observed = obs;
    rep.expected = exp;
    rep.tolerance = tol;
    rep.details["n"] = stats.n;
    rep.details["walks"] = stats.walks;
    rep.details["normalization"] = norm;
    rep.details["rel_band"] = rel_band;
    rep.details["skewness"] = stats.skewness;
    rep.details["excess_kurtosis"] = stats.excess_kurtosis;
    return rep;
}

CheckReport superdiffusive_check(const EnsembleResult& result, const StepSet& steps,
                                 const MemoryParams& params, double c_alpha_beta,
                                 double rel_band, double min_decay) {
    if (!(params.delta > 0.5 && params.delta < 1.0))
        throw Error(ErrorCode::WrongRegime, "superdiffusive check requires 1/2 < delta < 1");
    if (result.positions.empty())
        throw Error(ErrorCode::ConfigError,
                    "superdiffusive_check needs an ensemble run with collect_positions");
    const double delta = params.delta;
    const int d = result.dimension;
    const CheckpointStats& last = result.stats.back();
    const double nd = std::pow(static_cast<double>(last.n), delta);

    CheckReport rep;
    rep.check = "superdiffusive_limit";
    bool mean_ok = true;
    nlohmann::json mean_obs = nlohmann::json::array(), mean_tol = nlohmann::json::array();
    for (int c = 0; c < d; ++c) {
        const double o = last.mean_S[c] / nd;
        const double t = 4.0 * last.se_mean_S[c] / nd;
        if (std::abs(o) > t) mean_ok = false;
        mean_obs.push_back(o);
        mean_tol.push_back(t);
    }

    // E|S_n/n^delta|^2 from the centered accumulators: |S|^2 = |x|^2 +
    // 2 x.ES + |ES|^2 with x = S - E[S_n].
    const Vec es = expected_position(last.n, steps);
    double second = last.e2;
    double se_second = last.se_e2;
    for (int c = 0; c < d; ++c) {
        second += 2.0 * (last.mean_S[c] - es[c]) * es[c] + es[c] * es[c];
        se_second += 2.0 * std::abs(es[c]) * last.se_mean_S[c];
    }
    second /= nd * nd;
    se_second /= nd * nd;
    const double second_tol = std::max(rel_band * c_alpha_beta, 4.0 * se_second);
    const bool second_ok = std::abs(second - c_alpha_beta) <= second_tol;

    // Doubling diagnostic over the last three base points n with 4n in the
    // schedule: median_i |S_{4n}^i/(4n)^delta - S_n^i/n^delta|.
    const auto& cps = result.checkpoints;
    const int k = static_cast<int>(cps.size());
    const std::int64_t walks = last.walks;
    std::vector<std::pair<std::int64_t, double>> medians;
    for (int c = k - 1; c >= 0 && medians.size() < 3; --c) {
        const std::int64_t base = cps[c];
        const auto it4 = std::find(cps.begin(), cps.end(), 4 * base);
        if (it4 == cps.end()) continue;
        const int c4 = static_cast<int>(it4 - cps.begin());
        const double scale_lo = std::pow(static_cast<double>(base), delta);
        const double scale_hi = std::pow(static_cast<double>(4 * base), delta);
        std::vector<double> diffs(walks, 0.0);
        for (std::int64_t i = 0; i < walks; ++i) {
            double norm2 = 0.0;
            for (int cc = 0; cc < d; ++cc) {
                const double lo = result.positions[(static_cast<size_t>(i) * k + c) * d + cc];
                const double hi = result.positions[(static_cast<size_t>(i) * k + c4) * d + cc];
                norm2 += sq(hi / scale_hi - lo / scale_lo);
            }
            diffs[i] = std::sqrt(norm2);
        }
        auto mid = diffs.begin() + diffs.size() / 2;
        std::nth_element(diffs.begin(), mid, diffs.end());
        medians.push_back({base, *mid});
    }
    std::reverse(medians.begin(), medians.end());  // increasing base n
    bool decay_ok = medians.size() >= 2;
    nlohmann::json med_json = nlohmann::json::array(), ratio_json = nlohmann::json::array();
    for (const auto& [base, med] : medians)
        med_json.push_back({{"n", base}, {"median", med}});
    for (size_t i = 0; i + 1 < medians.size(); ++i) {
        const double ratio = medians[i].second / medians[i + 1].second;
        ratio_json.push_back(ratio);
        if (!(ratio > min_decay)) decay_ok = false;
    }

    rep.pass = mean_ok && second_ok && decay_ok;
    rep.observed = {{"mean_scaled", mean_obs},
                    {"second_moment_scaled", second},
                    {"doubling_medians", med_json}};
    rep.expected = {{"mean_scaled", 0.0},
                    {"second_moment_scaled", c_alpha_beta},
                    {"doubling_medians", "decreasing"}};
    rep.tolerance = {{"mean_scaled", mean_tol},
                     {"second_moment_scaled", second_tol},
                     {"min_decay_ratio", min_decay}};
    rep.details["n"] = last.n;
    rep.details["walks"] = last.walks;
    rep.details["doubling_decay_ratios"] = ratio_json;
    rep.details["mean_ok"] = mean_ok;
    rep.details["second_moment_ok"] = second_ok;
    rep.details["doubling_ok"] = decay_ok;
    return rep;
}

CheckReport slln_check(const std::vector<WalkState>& snapshots, const StepSet& steps,
                       const MemoryParams& params, double max_count_dev) {
    if (snapshots.empty()) throw Error(ErrorCode::ConfigError, "no snapshots");
    const WalkState& last = snapshots.back();
    if (last.n < 1000000)
        throw Error(ErrorCode::TooShort, "the SLLN check is meaningful from n = 1e6 on");
    const int m2 = steps.directions();
    double max_dev = 0.0;
    for (int i = 0; i < m2; ++i)
        max_dev = std::max(max_dev, std::abs(static_cast<double>(last.counts[i]) /
                                                 static_cast<double>(last.n) -
                                             1.0 / m2));

    const RegimeKind regime = classify_regime(params).kind;
    auto statistic = [&](const WalkState& st) {
        const double n = static_cast<double>(st.n);
        double norm2 = 0.0;
        for (double x : st.position) norm2 += x * x;
        const double abs_s = std::sqrt(norm2);
        switch (regime) {
            case RegimeKind::Diffusive:
                return abs_s / std::sqrt(n * std::pow(std::log(n), 1.5));
            case RegimeKind::Critical:
                return abs_s / std::sqrt(n * std::log(n) * std::pow(std::log(std::log(n)), 1.5));
            case RegimeKind::Superdiffusive:
                return abs_s / n;
        }
        return 0.0;
    };

    // Informational decade diagnostic: the normalized statistic at the
    // snapshots nearest n_max/10^3, 10^2, 10^1 and n_max.
    nlohmann::json decades = nlohmann::json::array();
    std::vector<double> values;
    for (int exp10 = 3; exp10 >= 0; --exp10) {
        const double target = static_cast<double>(last.n) / std::pow(10.0, exp10);
        if (target < 16.0) continue;
        const WalkState* best = nullptr;
        for (const auto& st : snapshots)
            if (st.n >= 16 &&
                (!best || std::abs(std::log(static_cast<double>(st.n) / target)) <
                              std::abs(std::log(static_cast<double>(best->n) / target))))
                best = &st;
        if (!best) continue;
        if (!decades.empty() && decades.back()["n"] == best->n) continue;
        const double val = statistic(*best);
        decades.push_back({{"n", best->n}, {"statistic", val}});
        values.push_back(val);
    }
    bool decreased = values.size() >= 2 && values.back() < values.front();

    CheckReport rep;
    rep.check = "slln_counts";
    rep.pass = max_dev < max_count_dev;
    rep.observed = max_dev;
    rep.expected = 1.0 / m2;
    rep.tolerance = max_count_dev;
    rep.details["n"] = last.n;
    rep.details["regime"] = regime_name(regime);
    rep.details["path_statistic_decades"] = decades;
    rep.details["path_statistic_decreased"] = decreased;  // informational only
    return rep;
}

void write_ensemble_csv(const std::string& path, const EnsembleResult& result, int m) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorCode::ConfigError, "cannot open output file '" + path + "'");
    const int d = result.dimension;
    std::fprintf(f, "n");
    for (int c = 1; c <= d; ++c) std::fprintf(f, ",mean_S_%d", c);
    for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= d; ++j) std::fprintf(f, ",cov_S_%d%d", i, j);
    std::fprintf(f, ",e2,se_e2");
    for (int i = 1; i <= 2 * m; ++i) std::fprintf(f, ",meanY_%d", i);
    std::fprintf(f, "\n");
    for (const auto& st : result.stats) {
        std::fprintf(f, "%lld", static_cast<long long>(st.n));
        for (int c = 0; c < d; ++c) std::fprintf(f, ",%.17g", st.mean_S[c]);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) std::fprintf(f, ",%.17g", st.cov_S(i, j));
        std::fprintf(f, ",%.17g,%.17g", st.e2, st.se_e2);
        for (int i = 0; i < 2 * m; ++i) std::fprintf(f, ",%.17g", st.mean_counts[i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace erw

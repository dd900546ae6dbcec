#include "erw/validate.hpp"

#include <cmath>

#include "erw/dynamics.hpp"
#include "erw/lattice.hpp"
#include "erw/moments.hpp"
#include "erw/oracle.hpp"
#include "erw/urn.hpp"

namespace erw {

namespace {

const std::vector<double> kGrid = {0.2, 0.5, 0.9};

std::vector<StepSet> test_lattices() {
    return {builtin_lattice("two_step_line"), builtin_lattice("hexagonal")};
}

CheckReport oracle_law_equivalence() {
    CheckReport rep;
    rep.check = "oracle_law_equivalence";
    double worst = 0.0;
    for (const StepSet& steps : test_lattices()) {
        for (double p : kGrid) {
            for (double q : kGrid) {
                const MemoryParams params = derive_memory_params(p, q, steps.m());
                for (std::int64_t n = 1; n <= 6; ++n) {
                    const double tv = total_variation(exact_law(n, steps, params),
                                                      history_simulator_law(n, steps, params));
                    worst = std::max(worst, tv);
                }
            }
        }
    }
    rep.pass = worst < 1e-12;
    rep.observed = worst;
    rep.expected = 0.0;
    rep.tolerance = 1e-12;
    rep.details["comment"] = "max total variation, count DP vs literal history enumeration";
    return rep;
}

CheckReport oracle_moment_equivalence() {
    CheckReport rep;
    rep.check = "oracle_moment_equivalence";
    double worst = 0.0;
    for (const StepSet& steps : test_lattices()) {
        for (double p : kGrid) {
            for (double q : kGrid) {
                const MemoryParams params = derive_memory_params(p, q, steps.m());
                MomentEngine engine(steps, params);
                for (std::int64_t n = 1; n <= 8; ++n) {
                    if (n > 1) engine.step();
                    const LawMoments lm =
                        exact_moments_from_law(exact_law(n, steps, params), steps);
                    worst = std::max({worst, std::abs(lm.s - engine.s()),
                                      std::abs(lm.t - engine.t()), std::abs(lm.u - engine.u())});
                }
            }
        }
    }
    rep.pass = worst < 1e-10;
    rep.observed = worst;
    rep.expected = 0.0;
    rep.tolerance = 1e-10;
    rep.details["comment"] = "max |s,t,u| gap, recursion vs exhaustive law, n <= 8";
    return rep;
}

CheckReport spectral_identities(bool inject) {
    CheckReport rep;
    rep.check = "spectral_identities";
    double worst = 0.0;
    for (int m : {2, 3, 5}) {
        for (double p : kGrid) {
            for (double q : kGrid) {
                const MemoryParams params = derive_memory_params(p, q, m);
                GeneratorMatrices gen = build_generators(params, m);
                if (inject) gen.H(0, 0) += 1e-6;
                // column stochasticity
                for (const Mat* h : {&gen.H_odd, &gen.H_even, &gen.H}) {
                    for (int j = 0; j < 2 * m; ++j) {
                        double col = 0.0;
                        for (int i = 0; i < 2 * m; ++i) col += (*h)(i, j);
                        worst = std::max(worst, std::abs(col - 1.0));
                    }
                }
                // block forms of P^T H_odd P, P^T H_even P and the diagonal form
                const SpectralBasis basis = build_spectral_basis(m, params);
                const Mat podd = matmul(transpose(basis.P), matmul(gen.H_odd, basis.P));
                const Mat peven = matmul(transpose(basis.P), matmul(gen.H_even, basis.P));
                const Mat ph = matmul(transpose(basis.P), matmul(gen.H, basis.P));
                for (int i = 0; i < 2 * m; ++i) {
                    for (int j = 0; j < 2 * m; ++j) {
                        double want_odd = 0.0, want_even = 0.0, want_h = 0.0;
                        // P^T H_odd P = [[D1, D2], [D1, D2]],
                        // P^T H_even P = [[D1, -D2], [-D1, D2]],
                        // D1 = diag(1, gamma...), D2 = diag(0, delta...)
                        const int bi = i % m;
                        const bool i_top = i < m;
                        const int bj = j % m;
                        const bool j_top = j < m;
                        if (bi == bj) {
                            const double d1 = (bi == 0) ? 1.0 : params.gamma;
                            const double d2 = (bi == 0) ? 0.0 : params.delta;
                            want_odd = j_top ? d1 : d2;
                            if (j_top)
                                want_even = i_top ? d1 : -d1;
                            else
                                want_even = i_top ? -d2 : d2;
                            if (i == j) want_h = i_top ? d1 : d2;
                        }
                        worst = std::max({worst, std::abs(podd(i, j) - want_odd),
                                          std::abs(peven(i, j) - want_even),
                                          std::abs(ph(i, j) - want_h)});
                    }
                }
            }
        }
    }
    rep.pass = worst < 1e-12;
    rep.observed = worst;
    rep.expected = 0.0;
    rep.tolerance = 1e-12;
    rep.details["comment"] = "column sums and the P/Q diagonalization identities";
    return rep;
}

CheckReport martingale_zero_drift() {
    CheckReport rep;
    rep.check = "martingale_zero_drift";
    double worst = 0.0;
    for (const StepSet& steps : test_lattices()) {
        const int m = steps.m();
        const int d = steps.dimension;
        for (double p : kGrid) {
            for (double q : kGrid) {
                const MemoryParams params = derive_memory_params(p, q, m);
                for (std::int64_t n = 2; n <= 6; ++n) {
                    const double zeta_next = zeta_closed_form(n + 1, params.delta);
                    const ExactLaw law = exact_law(n, steps, params);
                    double law_level = 0.0;
                    for (const auto& [state, prob] : law.table) {
                        // E[Delta M | y] = zeta^{-1} (sum_w P(w) v_w - E[X|y])
                        const StepLaw sl = step_law_from_counts(state, n, params);
                        Vec mean_from_law(d, 0.0);
                        for (int i = 0; i < 2 * m; ++i) {
                            if (sl.probs[i] == 0.0) continue;
                            const Vec v = steps.step(i);
                            for (int c = 0; c < d; ++c) mean_from_law[c] += sl.probs[i] * v[c];
                        }
                        const Vec lemma_mean = conditional_step_mean(state, n, steps, params);
                        double norm2 = 0.0;
                        for (int c = 0; c < d; ++c)
                            norm2 += sq((mean_from_law[c] - lemma_mean[c]) / zeta_next);
                        const double drift = std::sqrt(norm2);
                        worst = std::max(worst, drift);
                        law_level += prob * drift;
                    }
                    worst = std::max(worst, law_level);
                }
            }
        }
    }
    rep.pass = worst < 1e-12;
    rep.observed = worst;
    rep.expected = 0.0;
    rep.tolerance = 1e-12;
    rep.details["comment"] = "max ||E[dM | y]|| over reachable states, n in 2..6";
    return rep;
}

CheckReport cross_engine_moments() {
    CheckReport rep;
    rep.check = "cross_engine_moments";
    double worst = 0.0;
    const std::vector<std::int64_t> checkpoints = {10, 100, 1000, 10000};
    for (const StepSet& steps : test_lattices()) {
        for (auto [p, q] : std::vector<std::pair<double, double>>{{0.8, 0.2}, {0.5, 0.5},
                                                                  {0.2, 0.9}}) {
            const MemoryParams params = derive_memory_params(p, q, steps.m());
            MomentEngine engine(steps, params);
            CountCovariance cov(steps, params);
            for (std::int64_t target : checkpoints) {
                while (engine.n() < target) {
                    engine.step();
                    cov.step();
                }
                const double rs = std::abs(cov.s_functional() - engine.s()) /
                                  std::max(1.0, std::abs(engine.s()));
                const double rt = std::abs(cov.t_functional() - engine.t()) /
                                  std::max(1.0, std::abs(engine.t()));
                const double ru = std::abs(cov.u_functional() - engine.u()) /
                                  std::max(1.0, std::abs(engine.u()));
                worst = std::max({worst, rs, rt, ru});
            }
        }
    }
    rep.pass = worst < 1e-9;
    rep.observed = worst;
    rep.expected = 0.0;
    rep.tolerance = 1e-9;
    rep.details["comment"] =
        "relative gap of s,t,u: scalar recursion vs count-covariance functionals, n <= 1e4";
    return rep;
}

}  // namespace

std::vector<CheckReport> run_validation(const ValidationOptions& options) {
    std::vector<CheckReport> reports;
    const std::string& scope = options.scope;
    const bool all = scope == "all";
    if (all || scope == "oracle") {
        reports.push_back(oracle_law_equivalence());
        reports.push_back(oracle_moment_equivalence());
    }
    if (all || scope == "spectral")
        reports.push_back(spectral_identities(options.inject_spectral_perturbation));
    if (all || scope == "martingale") reports.push_back(martingale_zero_drift());
    if (all || scope == "cross_engine") reports.push_back(cross_engine_moments());
    if (reports.empty())
        throw Error(ErrorCode::ConfigError, "unknown validation scope '" + scope + "'");
    return reports;
}

bool all_pass(const std::vector<CheckReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

}  // namespace erw

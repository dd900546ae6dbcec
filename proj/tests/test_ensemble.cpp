#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "erw/ensemble.hpp"
#include "erw/oracle.hpp"
#include "support/check_error.hpp"
#include "support/jacobi.hpp"

using namespace erw;

namespace {

EnsembleConfig small_config(std::int64_t walks, std::int64_t n_max, std::uint64_t seed) {
    EnsembleConfig cfg;
    cfg.walks = walks;
    cfg.n_max = n_max;
    cfg.seed = seed;
    return cfg;
}

bool stats_identical(const CheckpointStats& a, const CheckpointStats& b) {
    return a.n == b.n && a.walks == b.walks && a.mean_S == b.mean_S && a.cov_S.a == b.cov_S.a &&
           a.m2e.a == b.m2e.a && a.mean_counts == b.mean_counts && a.e2 == b.e2 &&
           a.se_e2 == b.se_e2 && a.skewness == b.skewness &&
           a.excess_kurtosis == b.excess_kurtosis;
}

}  // namespace

TEST_CASE("a single-walk ensemble reproduces run_walk") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(0.6, 0.5, 3);
    const EnsembleResult res = run_ensemble(small_config(1, 512, 321), steps, params);
    const auto snaps = run_walk(steps, params, 512, 321, 0, {});
    REQUIRE(res.stats.size() == snaps.size());
    for (size_t i = 0; i < snaps.size(); ++i) {
        CHECK(res.stats[i].n == snaps[i].n);
        for (int c = 0; c < 2; ++c)
            CHECK(res.stats[i].mean_S[c] == snaps[i].position[c]);  // bitwise
        for (int j = 0; j < 6; ++j)
            CHECK(res.stats[i].mean_counts[j] == static_cast<double>(snaps[i].counts[j]));
    }
}

TEST_CASE("ensemble is bitwise deterministic across worker counts") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.875, 0.125, 2);
    EnsembleConfig cfg = small_config(4100, 256, 99);  // a partial tail block
    cfg.parallelism = 1;
    const EnsembleResult r1 = run_ensemble(cfg, steps, params);
    cfg.parallelism = 4;
    const EnsembleResult r4 = run_ensemble(cfg, steps, params);
    cfg.parallelism = 16;
    const EnsembleResult r16 = run_ensemble(cfg, steps, params);
    REQUIRE(r1.stats.size() == r4.stats.size());
    REQUIRE(r1.stats.size() == r16.stats.size());
    for (size_t i = 0; i < r1.stats.size(); ++i) {
        CHECK(stats_identical(r1.stats[i], r4.stats[i]));
        CHECK(stats_identical(r1.stats[i], r16.stats[i]));
    }
}

TEST_CASE("ERW_THREADS caps the worker count") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.5, 0.5, 2);
    setenv("ERW_THREADS", "1", 1);
    const EnsembleResult res = run_ensemble(small_config(2048, 64, 5), steps, params);
    unsetenv("ERW_THREADS");
    CHECK(res.workers == 1);
}

TEST_CASE("memoryless mean counts sit on the closed form within 4 SE") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(1.0 / 3, 1.0 / 3, 3);
    const EnsembleResult res = run_ensemble(small_config(20000, 512, 2718), steps, params);
    const CheckpointStats& last = res.stats.back();
    const auto [a, b] = expected_counts(512, 3);  // a, b are E[Y_n(v)] themselves
    for (int i = 0; i < 6; ++i) {
        const double want = i < 3 ? a : b;
        CHECK(std::abs(last.mean_counts[i] - want) <= 4.0 * last.se_mean_counts[i] + 1e-12);
    }
}

TEST_CASE("e2 tracks the exact second moment in all three regimes") {
    // the single property that exercises the whole chain: sampler, H
    // matrices, moment recursions
    struct Case {
        const char* lattice;
        double p, q;
    };
    for (const Case& c : {Case{"hexagonal", 0.6, 0.5},        // diffusive
                          Case{"hexagonal", 0.9, 7.0 / 30},   // critical
                          Case{"two_step_line", 0.875, 0.125}})  // superdiffusive
    {
        const StepSet steps = builtin_lattice(c.lattice);
        const MemoryParams params = derive_memory_params(c.p, c.q, steps.m());
        EnsembleConfig cfg = small_config(20000, 10000, 137);
        cfg.checkpoints = {100, 1000, 10000};
        const EnsembleResult res = run_ensemble(cfg, steps, params);
        MomentEngine engine(steps, params);
        for (const CheckpointStats& st : res.stats) {
            while (engine.n() < st.n) engine.step();
            CHECK(std::abs(st.e2 - engine.s()) <= 4.0 * st.se_e2);
        }
    }
}

TEST_CASE("sample covariance is symmetric PSD") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(0.8, 0.2, 3);
    const EnsembleResult res = run_ensemble(small_config(5000, 512, 8), steps, params);
    for (const CheckpointStats& st : res.stats) {
        if (st.n < 2) continue;
        CHECK(st.cov_S(0, 1) == st.cov_S(1, 0));
        CHECK(testsupport::smallest_symmetric_eigenvalue(st.cov_S) >= -1e-10);
        CHECK(testsupport::smallest_symmetric_eigenvalue(st.m2e) >= -1e-10);
    }
}

TEST_CASE("mean position alternates between vbar and zero within 4 SE") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.7, 0.3, 2);
    EnsembleConfig cfg = small_config(20000, 1001, 4040);
    cfg.checkpoints = {1000, 1001};
    const EnsembleResult res = run_ensemble(cfg, steps, params);
    const double vbar = 1.5;
    CHECK(std::abs(res.at(1000).mean_S[0]) <= 4.0 * res.at(1000).se_mean_S[0]);
    CHECK(std::abs(res.at(1001).mean_S[0] - vbar) <= 4.0 * res.at(1001).se_mean_S[0]);
}

TEST_CASE("config guards") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.5, 0.5, 2);
    CHECK(testsupport::thrown_code([&] { run_ensemble(small_config(0, 64, 1), steps, params); }) ==
          ErrorCode::ConfigError);
    CHECK(testsupport::thrown_code([&] { run_ensemble(small_config(4, 1, 1), steps, params); }) ==
          ErrorCode::TooShort);
    EnsembleConfig cfg = small_config(4, 64, 1);
    cfg.checkpoints = {128};
    CHECK(testsupport::thrown_code([&] { run_ensemble(cfg, steps, params); }) ==
          ErrorCode::ConfigError);
}

TEST_CASE("diffusive clt check at moderate size") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(0.6, 0.5, 3);
    const AsymptoticPrediction pred = limit_constants(steps, params);
    const EnsembleResult res = run_ensemble(small_config(20000, 2048, 606), steps, params);
    const CheckReport rep = clt_check(res.at(2048), pred, RegimeKind::Diffusive);
    CHECK(rep.pass);
    CHECK(testsupport::thrown_code([&] {
              (void)clt_check(res.at(2048), pred, RegimeKind::Critical);
          }) == ErrorCode::WrongRegime);
}

TEST_CASE("memoryless clt normalizes to the bare covariance shape") {
    // delta = 0 means scale c = 1: cov((S_n - E S_n)/sqrt n) -> cov_base
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(1.0 / 3, 1.0 / 3, 3);
    const AsymptoticPrediction pred = limit_constants(steps, params);
    CHECK(pred.scale == 1.0);
    const EnsembleResult res = run_ensemble(small_config(20000, 1024, 777), steps, params);
    CHECK(clt_check(res.at(1024), pred, RegimeKind::Diffusive).pass);
}

TEST_CASE("superdiffusive check refuses out-of-regime parameters") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams gamma_one = derive_memory_params(1.0, 1.0, 3);  // delta = 0
    EnsembleConfig cfg = small_config(16, 64, 1);
    cfg.collect_positions = true;
    const EnsembleResult res = run_ensemble(cfg, steps, gamma_one);
    CHECK(testsupport::thrown_code([&] {
              (void)superdiffusive_check(res, steps, gamma_one, 1.0);
          }) == ErrorCode::WrongRegime);
}

TEST_CASE("superdiffusive check at moderate size") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.875, 0.125, 2);
    EnsembleConfig cfg = small_config(20000, 4096, 55);
    cfg.collect_positions = true;
    const EnsembleResult res = run_ensemble(cfg, steps, params);
    const double c_ab = superdiffusive_constant(steps, params, 1e-3).value;
    const CheckReport rep = superdiffusive_check(res, steps, params, c_ab);
    CHECK(rep.details["mean_ok"].get<bool>());
    CHECK(rep.details["second_moment_ok"].get<bool>());
    CHECK(rep.details["doubling_ok"].get<bool>());
    CHECK(rep.pass);
    // needs collected positions
    EnsembleConfig bare = small_config(64, 256, 55);
    const EnsembleResult res2 = run_ensemble(bare, steps, params);
    CHECK(testsupport::thrown_code([&] {
              (void)superdiffusive_check(res2, steps, params, c_ab);
          }) == ErrorCode::ConfigError);
}

TEST_CASE("slln check gates on the count deviation") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(1.0 / 3, 1.0 / 3, 3);
    const auto snaps = run_walk(steps, params, 1000000, 8, 0, {});
    const CheckReport rep = slln_check(snaps, steps, params);
    CHECK(rep.pass);
    CHECK(rep.observed.get<double>() < 0.01);
}

TEST_CASE("ensemble CSV header") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(0.6, 0.5, 3);
    const EnsembleResult res = run_ensemble(small_config(16, 32, 1), steps, params);
    const std::string path = "ens_tmp.csv";
    write_ensemble_csv(path, res, steps.m());
    std::FILE* f = std::fopen(path.c_str(), "r");
    REQUIRE(f);
    char line[512];
    REQUIRE(std::fgets(line, sizeof line, f));
    CHECK(std::string(line) ==
          "n,mean_S_1,mean_S_2,cov_S_11,cov_S_12,cov_S_21,cov_S_22,e2,se_e2,"
          "meanY_1,meanY_2,meanY_3,meanY_4,meanY_5,meanY_6\n");
    std::fclose(f);
    std::remove(path.c_str());
}

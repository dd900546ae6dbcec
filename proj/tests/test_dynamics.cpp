#include <doctest.h>

#include <cmath>

#include "erw/dynamics.hpp"
#include "erw/moments.hpp"
#include "erw/rng.hpp"

using namespace erw;

TEST_CASE("rng reference vectors") {
    SplitMix64 sm(0);
    CHECK(sm.next() == 0xE220A8397B1DCDAFULL);
    CHECK(sm.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(sm.next() == 0x06C45D188009454FULL);

    Xoshiro256pp gen(42);
    CHECK(gen.next_u64() == 0xD0764D4F4476689FULL);
    CHECK(gen.next_u64() == 0x519E4174576F3791ULL);
    CHECK(gen.next_u64() == 0xFBE07CFB0C24ED8CULL);
    CHECK(gen.next_u64() == 0xB37D9F600CD835B8ULL);

    CHECK(stream_key(0, 7) == 0x25399E454C9C5196ULL);
    Xoshiro256pp stream = make_stream(0, 7);
    CHECK(stream.next_u64() == 0xAA179BCCEB0FEA1AULL);
    CHECK(stream.next_u64() == 0x2A9751203251B36EULL);

    Xoshiro256pp u(123);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("initial step law") {
    const StepLaw law3 = initial_step_law(3);
    CHECK(law3.probs == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 0.0, 0.0});
    const StepLaw law2 = initial_step_law(2);
    CHECK(law2.probs == std::vector<double>{0.5, 0.5, 0.0, 0.0});
    double sum = 0.0;
    for (double x : law3.probs) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("step law after one step puts q on the reversal") {
    const int m = 3;
    const MemoryParams params = derive_memory_params(0.8, 0.2, m);
    const std::vector<std::int64_t> counts = {1, 0, 0, 0, 0, 0};
    const StepLaw law = step_law_from_counts(counts, 1, params);
    CHECK(law.probs[m + 0] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(law.probs[m + 1] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(law.probs[m + 2] == doctest::Approx(0.4).epsilon(1e-14));
    for (int i = 0; i < m; ++i) CHECK(law.probs[i] == 0.0);
}

TEST_CASE("step law equals the H matrix-vector product") {
    const int m = 3;
    const MemoryParams params = derive_memory_params(0.8, 0.2, m);
    const GeneratorMatrices gen = build_generators(params, m);
    // Y_2 = e_1 + e_{m+2}: next step is odd, law = H_odd Y / 2
    const std::vector<std::int64_t> counts = {1, 0, 0, 0, 1, 0};
    const StepLaw law = step_law_from_counts(counts, 2, params);
    Vec y(2 * m, 0.0);
    for (int i = 0; i < 2 * m; ++i) y[i] = static_cast<double>(counts[i]);
    const Vec hy = matvec(gen.H_odd, y);
    for (int i = 0; i < 2 * m; ++i)
        CHECK(law.probs[i] == doctest::Approx(hy[i] / 2.0).epsilon(1e-14));
}

TEST_CASE("memoryless parameters give the uniform parity law everywhere") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(1.0 / 3, 1.0 / 3, 3);
    Walker walker(steps, params);
    walker.reset(99, 0);
    for (std::int64_t n = 1; n <= 40; ++n) {
        walker.run_to(n);
        const StepLaw law = step_law(walker.state(), params);
        const bool next_odd = (n + 1) % 2 != 0;
        for (int i = 0; i < 6; ++i) {
            const bool odd_dir = i < 3;
            if (odd_dir == next_odd)
                CHECK(law.probs[i] == doctest::Approx(1.0 / 3).epsilon(1e-13));
            else
                CHECK(law.probs[i] == 0.0);
        }
    }
}

TEST_CASE("step law is a parity-supported probability vector along trajectories") {
    const StepSet steps = builtin_lattice("distorted_hexagonal");
    for (auto [p, q] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {1.0, 1.0},
                                                              {0.9, 0.05}}) {
        const MemoryParams params = derive_memory_params(p, q, steps.m());
        Walker walker(steps, params);
        walker.reset(7, 1);
        for (std::int64_t n = 1; n <= 200; ++n) {
            walker.run_to(n);
            const StepLaw law = step_law(walker.state(), params);
            double sum = 0.0;
            for (int i = 0; i < 6; ++i) {
                CHECK(law.probs[i] >= -1e-15);
                const bool odd_dir = i < 3;
                if (odd_dir != ((n + 1) % 2 != 0)) CHECK(law.probs[i] == 0.0);
                sum += law.probs[i];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("advance maintains count and parity invariants") {
    const StepSet steps = builtin_lattice("distorted_hexagonal");
    const MemoryParams params = derive_memory_params(0.7, 0.4, 3);
    WalkState st = walk_start(steps, 0.37);
    Xoshiro256pp rng(5);
    for (int k = 0; k < 300; ++k) {
        st = advance(st, steps, params, rng.next_double());
        std::int64_t total = 0, odd = 0;
        for (int i = 0; i < 6; ++i) {
            total += st.counts[i];
            if (i < 3) odd += st.counts[i];
        }
        CHECK(total == st.n);
        CHECK(odd - (total - odd) == (st.n % 2 != 0 ? 1 : 0));
    }
}

TEST_CASE("position and auxiliary vectors reconstruct from counts") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(0.6, 0.5, 3);
    Walker walker(steps, params);
    walker.reset(2024, 3);
    walker.run_to(1000000);
    const WalkState& st = walker.state();
    Vec s(2, 0.0), t(2, 0.0);
    for (int i = 0; i < 6; ++i) {
        const Vec v = steps.step(i);
        for (int c = 0; c < 2; ++c) {
            s[c] += static_cast<double>(st.counts[i]) * v[c];
            t[c] += (i < 3 ? 1.0 : -1.0) * static_cast<double>(st.counts[i]) * v[c];
        }
    }
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(s[c] - st.position[c]) <= 1e-9);
        CHECK(std::abs(t[c] - st.auxiliary[c]) <= 1e-9);
    }
}

TEST_CASE("gamma = 1 alternates the first step forever") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(1.0, 1.0, 3);
    for (std::uint64_t stream = 0; stream < 50; ++stream) {
        Walker walker(steps, params);
        walker.reset(11, stream);
        walker.run_to(1);
        int first = -1;
        for (int i = 0; i < 3; ++i)
            if (walker.state().counts[i] == 1) first = i;
        walker.run_to(101);
        const WalkState& st = walker.state();
        CHECK(st.counts[first] == 51);
        CHECK(st.counts[first + 3] == 50);
        for (int i = 0; i < 6; ++i)
            if (i != first && i != first + 3) CHECK(st.counts[i] == 0);
    }
}

TEST_CASE("m = 2, p = 1, q = 0 alternates two fixed directions") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(1.0, 0.0, 2);
    for (std::uint64_t stream = 0; stream < 50; ++stream) {
        Walker walker(steps, params);
        walker.reset(23, stream);
        walker.run_to(1);
        int first = -1;
        for (int i = 0; i < 2; ++i)
            if (walker.state().counts[i] == 1) first = i;
        // X_1 = v_first, then the walk repeats v_first, -v_other
        const int other = 1 - first;
        walker.run_to(100);
        CHECK(walker.state().counts[first] == 50);
        CHECK(walker.state().counts[2 + other] == 50);
        CHECK(walker.state().counts[other] == 0);
        CHECK(walker.state().counts[2 + first] == 0);
    }
}

TEST_CASE("the overlapping brick wall is refused by the walk dynamics") {
    const StepSet brick = builtin_lattice("brick_wall");
    const MemoryParams params = derive_memory_params(0.5, 0.5, 3);
    CHECK_THROWS_AS(walk_start(brick, 0.1), Error);
    CHECK_THROWS_AS(Walker(brick, params), Error);
    CHECK_THROWS_AS(run_walk(brick, params, 16, 0, 0, {}), Error);
}

TEST_CASE("run_walk determinism and guards") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.3, 0.8, 2);
    CHECK_THROWS_AS(run_walk(steps, params, 1, 0, 0, {}), Error);
    const auto a = run_walk(steps, params, 4096, 77, 5, {});
    const auto b = run_walk(steps, params, 4096, 77, 5, {});
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].n == b[i].n);
        CHECK(a[i].position == b[i].position);
        CHECK(a[i].counts == b[i].counts);
        CHECK(a[i].martingale == b[i].martingale);
    }
    const auto c = run_walk(steps, params, 4096, 78, 5, {});
    CHECK(c.back().counts != a.back().counts);
}

TEST_CASE("memoryless long walk visits all directions equally") {
    const StepSet steps = builtin_lattice("hexagonal");
    const MemoryParams params = derive_memory_params(1.0 / 3, 1.0 / 3, 3);
    Walker walker(steps, params, false);
    walker.reset(1, 0);
    walker.run_to(1000000);
    for (int i = 0; i < 6; ++i) {
        const double freq = static_cast<double>(walker.state().counts[i]) / 1000000.0;
        CHECK(std::abs(freq - 1.0 / 6) < 0.01);
    }
}

TEST_CASE("martingale fields match a direct recomputation") {
    const StepSet steps = builtin_lattice("distorted_hexagonal");
    const MemoryParams params = derive_memory_params(0.75, 0.25, 3);
    // replay the recurrences with scalar bookkeeping
    WalkState st = walk_start(steps, 0.9);
    Xoshiro256pp rng(31);
    const Vec vbar = mean_odd_step(steps);
    double zeta = 0.0;
    Vec r(2, 0.0), s2(2, 0.0);
    for (int k = 0; k < 200; ++k) {
        const std::int64_t n = st.n;
        if (n >= 2) {
            const double zeta_next = zeta * (1.0 + params.delta / n);
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            for (int c = 0; c < 2; ++c)
                r[c] += (params.gamma / n * sign * st.auxiliary[c] +
                         ((1.0 - params.gamma) * sign -
                          (n % 2 != 0 ? params.delta / n : 0.0)) *
                             vbar[c]) /
                        zeta_next;
            zeta = zeta_next;
        }
        st = advance(st, steps, params, rng.next_double());
        if (st.n == 2) {
            zeta = 1.0;
            r = {0.0, 0.0};
            s2 = st.position;
        }
        if (st.n >= 2) {
            CHECK(st.zeta == doctest::Approx(zeta).epsilon(1e-14));
            for (int c = 0; c < 2; ++c) {
                CHECK(st.compensator[c] == doctest::Approx(r[c]).epsilon(1e-12));
                const double m_want = st.position[c] / zeta - r[c] - s2[c];
                CHECK(st.martingale[c] == doctest::Approx(m_want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("trajectory CSV header") {
    const StepSet steps = builtin_lattice("two_step_line");
    const MemoryParams params = derive_memory_params(0.5, 0.5, 2);
    const auto snaps = run_walk(steps, params, 64, 0, 0, {});
    const std::string path = "traj_tmp.csv";
    write_trajectory_csv(path, snaps, steps.dimension, steps.m());
    std::FILE* f = std::fopen(path.c_str(), "r");
    REQUIRE(f);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, f));
    CHECK(std::string(line) == "n,S_1,T_1,M_1,Y_1,Y_2,Y_3,Y_4\n");
    std::fclose(f);
    std::remove(path.c_str());
}

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "erw/dynamics.hpp"
#include "erw/ensemble.hpp"
#include "erw/lattice.hpp"
#include "erw/moments.hpp"
#include "erw/oracle.hpp"
#include "erw/urn.hpp"
#include "erw/validate.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

int exit_code_for(const erw::Error& e) {
    switch (e.code()) {
        case erw::ErrorCode::DiagonalizationCheckFailed:
            return kExitCheckFailed;
        default:
            return kExitUsage;  // invalid input, config or parameters
    }
}

struct LatticeChoice {
    std::string name;
    std::string file;

    erw::StepSet resolve() const {
        if (!name.empty() && !file.empty())
            throw erw::Error(erw::ErrorCode::ConfigError,
                             "give either --lattice or --lattice-file, not both");
        if (!name.empty()) return erw::builtin_lattice(name);
        if (!file.empty()) return erw::load_step_set_json(file);
        throw erw::Error(erw::ErrorCode::ConfigError, "a lattice is required "
                                                      "(--lattice or --lattice-file)");
    }
};

void add_lattice_flags(CLI::App* cmd, LatticeChoice& choice) {
    cmd->add_option("--lattice", choice.name,
                    "built-in lattice: hexagonal, brick_wall, distorted_hexagonal, two_step_line");
    cmd->add_option("--lattice-file", choice.file,
                    "lattice spec JSON {\"dimension\": d, \"odd_steps\": [[...],...]}");
}

std::vector<std::int64_t> parse_checkpoints(const std::string& spec, std::int64_t n_max) {
    if (spec.empty() || spec == "pow2") return erw::pow2_checkpoints(n_max);
    if (spec.rfind("linear:", 0) == 0) {
        const int k = std::stoi(spec.substr(7));
        return erw::linear_checkpoints(n_max, k);
    }
    throw erw::Error(erw::ErrorCode::ConfigError,
                     "--checkpoints must be pow2 or linear:<k>, got '" + spec + "'");
}

json regime_json(const erw::MemoryParams& params) {
    const erw::Regime regime = erw::classify_regime(params);
    json j;
    j["p"] = params.p;
    j["q"] = params.q;
    j["m"] = params.m;
    j["alpha"] = params.alpha;
    j["beta"] = params.beta;
    j["gamma"] = params.gamma;
    j["delta"] = params.delta;
    j["regime"] = erw::regime_name(regime.kind);
    json flags = json::array();
    if (regime.gamma_is_one) flags.push_back("gamma_is_one");
    if (regime.delta_is_one) flags.push_back("delta_is_one");
    j["degenerate_flags"] = flags;
    // admissible range of (gamma, delta): both gamma+delta and gamma-delta
    // must lie in [-1/(m-1), 1]
    const double lo = -1.0 / (params.m - 1);
    j["admissible"] = params.gamma + params.delta >= lo - 1e-15 &&
                      params.gamma + params.delta <= 1.0 + 1e-15 &&
                      params.gamma - params.delta >= lo - 1e-15 &&
                      params.gamma - params.delta <= 1.0 + 1e-15;
    return j;
}

int cmd_regime(double p, double q, int m) {
    const erw::MemoryParams params = erw::derive_memory_params(p, q, m);
    std::cout << regime_json(params).dump() << "\n";
    return kExitOk;
}

int cmd_spectral(double p, double q, std::optional<int> m_flag, const LatticeChoice& lattice) {
    int m = 0;
    if (m_flag) {
        m = *m_flag;
    } else {
        m = lattice.resolve().m();
    }
    const erw::MemoryParams params = erw::derive_memory_params(p, q, m);
    erw::build_spectral_basis(m, params);  // runs the internal identity checks
    std::cout << erw::spectral_report_to_json(erw::spectral_report(params, m)) << "\n";
    return kExitOk;
}

int cmd_moments(const LatticeChoice& lattice, double p, double q, std::int64_t n_max,
                const std::string& out, std::int64_t every, std::optional<double> tolerance) {
    if (n_max < 1)
        throw erw::Error(erw::ErrorCode::ConfigError, "--steps must be >= 1");
    const erw::StepSet steps = lattice.resolve();
    const erw::MemoryParams params = erw::derive_memory_params(p, q, steps.m());
    const erw::Regime regime = erw::classify_regime(params);
    if (regime.degenerate())
        throw erw::Error(erw::ErrorCode::DegenerateParams,
                         "gamma = 1 or delta = 1: asymptotic moment columns are undefined");
    erw::write_moments_csv(out, n_max, steps, params, every);
    const erw::MomentRow row = erw::second_moment_recursion(n_max, steps, params);
    const erw::AsymptoticPrediction pred =
        erw::limit_constants(steps, params, std::nullopt,
                             tolerance.value_or(regime.kind == erw::RegimeKind::Superdiffusive
                                                    ? 1e-3
                                                    : 1e-6));
    json j;
    j["command"] = "moments";
    j["out"] = out;
    j["n_max"] = n_max;
    j["regime"] = erw::regime_name(regime.kind);
    j["sigma2"] = pred.sigma2;
    j["s_n"] = row.s;
    switch (regime.kind) {
        case erw::RegimeKind::Diffusive:
            j["normalized_ratio"] = row.s * (1.0 - 2.0 * params.delta) / (pred.sigma2 * n_max);
            j["normalization"] = "sigma2*n/(1-2*delta)";
            break;
        case erw::RegimeKind::Critical:
            j["normalized_ratio"] =
                row.s / (pred.sigma2 * n_max * std::log(static_cast<double>(n_max)));
            j["normalization"] = "sigma2*n*log(n)";
            break;
        case erw::RegimeKind::Superdiffusive: {
            const double ratio = row.s / std::pow(static_cast<double>(n_max), 2.0 * params.delta);
            j["normalized_ratio"] = ratio / *pred.c_alpha_beta;
            j["normalization"] = "C_{alpha,beta}*n^(2*delta)";
            j["c_alpha_beta"] = *pred.c_alpha_beta;
            break;
        }
    }
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int cmd_simulate(const LatticeChoice& lattice, double p, double q, std::int64_t n_max,
                 std::int64_t walks, std::uint64_t seed, const std::string& out,
                 const std::string& checkpoints_spec) {
    const erw::StepSet steps = lattice.resolve();
    const erw::MemoryParams params = erw::derive_memory_params(p, q, steps.m());
    const std::vector<std::int64_t> cps = parse_checkpoints(checkpoints_spec, n_max);
    json j;
    j["command"] = "simulate";
    j["walks"] = walks;
    j["n_max"] = n_max;
    j["seed"] = seed;
    j["out"] = out;
    if (walks == 1) {
        const auto snaps = erw::run_walk(steps, params, n_max, seed, 0, cps);
        erw::write_trajectory_csv(out, snaps, steps.dimension, steps.m());
        const erw::WalkState& last = snaps.back();
        j["final"] = {{"n", last.n}, {"S", last.position}, {"counts", last.counts}};
    } else {
        erw::EnsembleConfig config;
        config.walks = walks;
        config.n_max = n_max;
        config.checkpoints = cps;
        config.seed = seed;
        const erw::EnsembleResult result = erw::run_ensemble(config, steps, params);
        erw::write_ensemble_csv(out, result, steps.m());
        const erw::CheckpointStats& last = result.stats.back();
        const erw::MomentRow row = erw::second_moment_recursion(n_max, steps, params);
        j["final"] = {{"n", last.n},
                      {"e2", last.e2},
                      {"se_e2", last.se_e2},
                      {"s_n_exact", row.s},
                      {"mean_S", last.mean_S}};
        j["workers"] = result.workers;
        j["steps_per_second"] = result.steps_per_second;
    }
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& scope, bool inject) {
    erw::ValidationOptions options;
    options.scope = scope;
    options.inject_spectral_perturbation = inject;
    const auto reports = erw::run_validation(options);
    for (const auto& r : reports) std::cout << r.to_json().dump() << "\n";
    return erw::all_pass(reports) ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elephant random walks on coverings of dipole graphs"};
    app.require_subcommand(1);

    // regime
    auto* regime = app.add_subcommand("regime", "memory parameters and regime classification");
    double p = 0.5, q = 0.5;
    int m = 2;
    regime->add_option("--p", p, "repeat probability")->required();
    regime->add_option("--q", q, "reverse probability")->required();
    regime->add_option("--m", m, "number of odd directions")->required();

    // spectral
    auto* spectral = app.add_subcommand("spectral", "eigenvalues of the mean generating matrix");
    double sp = 0.5, sq = 0.5;
    std::optional<int> sm;
    LatticeChoice spectral_lattice;
    spectral->add_option("--p", sp)->required();
    spectral->add_option("--q", sq)->required();
    spectral->add_option("--m", sm, "number of odd directions (or give a lattice)");
    add_lattice_flags(spectral, spectral_lattice);

    // moments
    auto* moments = app.add_subcommand("moments", "deterministic moment trace CSV");
    LatticeChoice moments_lattice;
    double mp = 0.5, mq = 0.5;
    std::int64_t m_steps = 0, every = 1;
    std::string m_out = "moments.csv";
    std::optional<double> m_tol;
    add_lattice_flags(moments, moments_lattice);
    moments->add_option("--p", mp)->required();
    moments->add_option("--q", mq)->required();
    moments->add_option("--steps", m_steps, "n_max")->required();
    moments->add_option("--out", m_out, "output CSV path");
    moments->add_option("--every", every, "keep every k-th row (first and last always kept)");
    moments->add_option("--tolerance", m_tol, "tail tolerance for the superdiffusive series");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "single walk trajectory or ensemble stats");
    LatticeChoice sim_lattice;
    double xp = 0.5, xq = 0.5;
    std::int64_t x_steps = 0, x_walks = 1;
    std::uint64_t x_seed = 0;
    std::string x_out = "walk.csv";
    std::string x_cps = "pow2";
    add_lattice_flags(simulate, sim_lattice);
    simulate->add_option("--p", xp)->required();
    simulate->add_option("--q", xq)->required();
    simulate->add_option("--steps", x_steps, "n_max")->required();
    simulate->add_option("--walks", x_walks, "ensemble size (1 = trajectory mode)");
    simulate->add_option("--seed", x_seed, "ensemble seed");
    simulate->add_option("--out", x_out, "output CSV path");
    simulate->add_option("--checkpoints", x_cps, "pow2 (default) or linear:<k>");

    // validate
    auto* validate = app.add_subcommand("validate", "oracle, spectral, martingale and "
                                                    "cross-engine suites");
    std::string v_scope = "all";
    bool v_inject = false;
    validate->add_option("--scope", v_scope, "all | oracle | spectral | martingale | cross_engine");
    validate->add_flag("--inject-spectral-perturbation", v_inject)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (regime->parsed()) return cmd_regime(p, q, m);
        if (spectral->parsed()) return cmd_spectral(sp, sq, sm, spectral_lattice);
        if (moments->parsed())
            return cmd_moments(moments_lattice, mp, mq, m_steps, m_out, every, m_tol);
        if (simulate->parsed())
            return cmd_simulate(sim_lattice, xp, xq, x_steps, x_walks, x_seed, x_out, x_cps);
        if (validate->parsed()) return cmd_validate(v_scope, v_inject);
    } catch (const erw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}

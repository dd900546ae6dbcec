#include "erw/moments.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace erw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Unconditional law of X_n as a 2m vector.
Vec step_identity_law(std::int64_t n, int m, const GeneratorMatrices& gen) {
    if (n == 1) {
        Vec pi(2 * m, 0.0);
        for (int i = 0; i < m; ++i) pi[i] = 1.0 / m;
        return pi;
    }
    const auto [a, b] = expected_counts(n - 1, m);
    Vec ey(2 * m, 0.0);
    for (int i = 0; i < m; ++i) {
        ey[i] = a;
        ey[m + i] = b;
    }
    Vec pi = matvec(gen.H_at(n), ey);
    for (double& x : pi) x /= static_cast<double>(n - 1);
    return pi;
}

double variance_of_law(const Vec& pi, const std::vector<Vec>& step_vectors, int d) {
    double ex2 = 0.0;
    Vec ex(d, 0.0);
    for (size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] == 0.0) continue;
        const Vec& v = step_vectors[i];
        ex2 += pi[i] * dot(v, v);
        for (int c = 0; c < d; ++c) ex[c] += pi[i] * v[c];
    }
    return ex2 - dot(ex, ex);
}

std::vector<Vec> all_step_vectors(const StepSet& steps) {
    std::vector<Vec> vs;
    for (int i = 0; i < steps.directions(); ++i) vs.push_back(steps.step(i));
    return vs;
}

}  // namespace

std::pair<double, double> expected_counts(std::int64_t n, int m) {
    if (n < 0) throw Error(ErrorCode::OutOfRange, "n must be >= 0");
    const double a = static_cast<double>((n + 1) / 2) / m;
    const double b = static_cast<double>(n / 2) / m;
    return {a, b};
}

Vec expected_position(std::int64_t n, const StepSet& steps) {
    Vec vbar = mean_odd_step(steps);
    if (n % 2 == 0)
        for (double& x : vbar) x = 0.0;
    return vbar;
}

double step_variance(std::int64_t n, const StepSet& steps, const MemoryParams& params) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "step_variance needs n >= 1");
    const GeneratorMatrices gen = build_generators(params, steps.m());
    const Vec pi = step_identity_law(n, steps.m(), gen);
    return variance_of_law(pi, all_step_vectors(steps), steps.dimension);
}

MomentEngine::MomentEngine(const StepSet& steps, const MemoryParams& params)
    : params_(params),
      gen_(build_generators(params, steps.m())),
      step_vectors_(all_step_vectors(steps)) {
    sigma2_ = variance_of_law(step_identity_law(1, steps.m(), gen_), step_vectors_,
                              steps.dimension);
    s_ = t_ = u_ = sigma2_;  // Sbar_1 = Tbar_1 = Xbar_1
    eta_ = kNaN;
    zeta_ = kNaN;
    tau_ = 0.0;
}

double MomentEngine::sigma2_at(std::int64_t n) const {
    const int m = gen_.m;
    const int d = static_cast<int>(step_vectors_.front().size());
    return variance_of_law(step_identity_law(n, m, gen_), step_vectors_, d);
}

void MomentEngine::step() {
    const std::int64_t n = n_;
    const double sig2_next = sigma2_at(n + 1);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;  // (-1)^n
    const double inv_n = 1.0 / static_cast<double>(n);
    const double s_next = (1.0 + 2.0 * params_.delta * inv_n) * s_ +
                          2.0 * params_.gamma * inv_n * sign * u_ + sig2_next;
    const double t_next = (1.0 + 2.0 * params_.gamma * inv_n) * t_ +
                          2.0 * params_.delta * inv_n * sign * u_ + sig2_next;
    const double u_next = (1.0 + (params_.delta + params_.gamma) * inv_n) * u_ +
                          sign * inv_n * (params_.delta * s_ + params_.gamma * t_) +
                          sign * sig2_next;
    s_ = s_next;
    t_ = t_next;
    u_ = u_next;
    sigma2_ = sig2_next;
    if (n + 1 == 2)
        zeta_ = 1.0;
    else if (n >= 2)
        zeta_ *= 1.0 + params_.delta * inv_n;
    if (n + 1 == 3)
        eta_ = 1.0;
    else if (n >= 3)
        eta_ *= 1.0 + 2.0 * params_.delta * inv_n;
    if (n + 1 >= 3) tau_ += 1.0 / (zeta_ * zeta_);
    n_ = n + 1;
}

MomentRow second_moment_recursion(std::int64_t n_max, const StepSet& steps,
                                  const MemoryParams& params,
                                  const std::function<void(const MomentRow&)>& sink) {
    if (n_max < 1) throw Error(ErrorCode::OutOfRange, "n_max must be >= 1");
    MomentEngine engine(steps, params);
    if (sink) sink(engine.row());
    while (engine.n() < n_max) {
        engine.step();
        if (sink) sink(engine.row());
    }
    return engine.row();
}

namespace {

// lgamma(x + a) - lgamma(x) for |a| <= 2. The naive difference of lgamma
// calls loses ~1e-8 relative accuracy at x ~ 1e6 (both logs are ~1e7 while
// the difference is O(log x)), so for large x the difference is formed from
// the Stirling series, whose terms are evaluated at the scale of the result.
double lgamma_diff(double x, double a) {
    if (a == 0.0) return 0.0;
    if (x < 1000.0) return std::lgamma(x + a) - std::lgamma(x);
    const double y = x + a;
    double d = (x - 0.5) * std::log1p(a / x) + a * std::log(y) - a;
    d += (1.0 / y - 1.0 / x) / 12.0;
    d -= (1.0 / (y * y * y) - 1.0 / (x * x * x)) / 360.0;
    d += (1.0 / std::pow(y, 5) - 1.0 / std::pow(x, 5)) / 1260.0;
    return d;
}

}  // namespace

double zeta_closed_form(std::int64_t n, double delta) {
    // Gamma(n+delta) Gamma(2) / (Gamma(n) Gamma(2+delta))
    return std::exp(lgamma_diff(static_cast<double>(n), delta) + std::lgamma(2.0) -
                    std::lgamma(2.0 + delta));
}

double eta_closed_form(std::int64_t n, double delta) {
    // Gamma(n+2delta) Gamma(3) / (Gamma(3+2delta) Gamma(n))
    return std::exp(lgamma_diff(static_cast<double>(n), 2.0 * delta) + std::lgamma(3.0) -
                    std::lgamma(3.0 + 2.0 * delta));
}

double tau_asymptote(std::int64_t n, double delta) {
    if (delta >= 0.5) throw Error(ErrorCode::WrongRegime, "tau asymptote requires delta < 1/2");
    const double g = std::exp(std::lgamma(2.0 + delta));
    return g * g * std::pow(static_cast<double>(n), 1.0 - 2.0 * delta) / (1.0 - 2.0 * delta);
}

ScalingTriple scaling_sequences(std::int64_t n_max, const MemoryParams& params) {
    if (n_max < 3) throw Error(ErrorCode::OutOfRange, "scaling sequences start at n = 3");
    double zeta = 1.0;  // zeta_2
    double eta = kNaN;
    double tau = 0.0;
    for (std::int64_t n = 2; n < n_max; ++n) {
        zeta *= 1.0 + params.delta / static_cast<double>(n);
        if (n + 1 == 3)
            eta = 1.0;
        else if (n >= 3)
            eta *= 1.0 + 2.0 * params.delta / static_cast<double>(n);
        if (n + 1 >= 3) tau += 1.0 / (zeta * zeta);
    }
    return {eta, zeta, tau};
}

CountCovariance::CountCovariance(const StepSet& steps, const MemoryParams& params)
    : params_(params), gen_(build_generators(params, steps.m())) {
    const int m = steps.m();
    const int d = steps.dimension;
    v_map_ = Mat(d, 2 * m);
    w_map_ = Mat(d, 2 * m);
    for (int i = 0; i < 2 * m; ++i) {
        const Vec v = steps.step(i);
        for (int c = 0; c < d; ++c) {
            v_map_(c, i) = v[c];
            w_map_(c, i) = (i < m) ? v[c] : -v[c];
        }
    }
    const Vec pi1 = step_identity_law(1, m, gen_);
    cov_ = Mat(2 * m, 2 * m);
    for (int i = 0; i < 2 * m; ++i) {
        cov_(i, i) = pi1[i];
        for (int j = 0; j < 2 * m; ++j) cov_(i, j) -= pi1[i] * pi1[j];
    }
}

void CountCovariance::step() {
    const std::int64_t n = n_;
    const int dim = cov_.rows;
    const int m = gen_.m;
    const Mat& h = gen_.H_at(n + 1);
    const double inv_n = 1.0 / static_cast<double>(n);

    const auto [a, b] = expected_counts(n, m);
    Vec ey(dim, 0.0);
    for (int i = 0; i < m; ++i) {
        ey[i] = a;
        ey[m + i] = b;
    }
    Vec pi = matvec(h, ey);
    for (double& x : pi) x *= inv_n;

    // noise = diag(pi) - H E[Y Y^T] H^T / n^2 with E[YY^T] = cov + EY EY^T
    Mat yy = cov_;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) yy(i, j) += ey[i] * ey[j];
    Mat noise = matmul(matmul(h, yy), transpose(h));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) noise(i, j) = -noise(i, j) * inv_n * inv_n;
    for (int i = 0; i < dim; ++i) noise(i, i) += pi[i];

    Mat growth = h;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) growth(i, j) *= inv_n;
    for (int i = 0; i < dim; ++i) growth(i, i) += 1.0;

    Mat next = matmul(matmul(growth, cov_), transpose(growth));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) next(i, j) += noise(i, j);
    cov_ = std::move(next);
    n_ = n + 1;
}

namespace {
double quadratic_trace(const Mat& map_a, const Mat& cov, const Mat& map_b) {
    // trace(A C B^T) over the spatial coordinates
    const Mat tmp = matmul(map_a, matmul(cov, transpose(map_b)));
    double tr = 0.0;
    for (int c = 0; c < tmp.rows; ++c) tr += tmp(c, c);
    return tr;
}
}  // namespace

double CountCovariance::s_functional() const { return quadratic_trace(v_map_, cov_, v_map_); }
double CountCovariance::t_functional() const { return quadratic_trace(w_map_, cov_, w_map_); }
double CountCovariance::u_functional() const { return quadratic_trace(v_map_, cov_, w_map_); }

Mat count_covariance_recursion(std::int64_t n_max, const StepSet& steps,
                               const MemoryParams& params) {
    if (n_max < 1) throw Error(ErrorCode::OutOfRange, "n_max must be >= 1");
    CountCovariance rec(steps, params);
    while (rec.n() < n_max) rec.step();
    return rec.matrix();
}

Mat AsymptoticPrediction::cov_limit() const {
    Mat out = cov_base;
    for (double& x : out.a) x *= scale;
    return out;
}

AsymptoticPrediction limit_constants(const StepSet& steps, const MemoryParams& params,
                                     std::optional<RegimeKind> expect, double series_tolerance) {
    const Regime regime = classify_regime(params);
    if (regime.degenerate())
        throw Error(ErrorCode::DegenerateParams,
                    "gamma = 1 or delta = 1: the walk is deterministic after the first step and "
                    "the asymptotic constants are not defined");
    if (expect && *expect != regime.kind)
        throw Error(ErrorCode::WrongRegime, std::string("parameters are ") +
                                                regime_name(regime.kind) + ", requested " +
                                                regime_name(*expect));
    AsymptoticPrediction pred;
    pred.regime = regime.kind;
    const int m = steps.m();
    const int d = steps.dimension;
    const Vec vbar = mean_odd_step(steps);
    pred.cov_base = Mat(d, d);
    double sig2 = 0.0;
    for (const Vec& v : steps.odd_steps) {
        Vec w(d);
        for (int c = 0; c < d; ++c) w[c] = v[c] - vbar[c];
        sig2 += dot(w, w) / m;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) pred.cov_base(i, j) += w[i] * w[j] / m;
    }
    pred.sigma2 = sig2;
    switch (regime.kind) {
        case RegimeKind::Diffusive:
            pred.scale = 1.0 / (1.0 - 2.0 * params.delta);
            pred.normalization = "n";
            break;
        case RegimeKind::Critical:
            pred.scale = 1.0;
            pred.normalization = "n*log(n)";
            break;
        case RegimeKind::Superdiffusive:
            pred.scale = kNaN;
            pred.normalization = "n^(2*delta)";
            pred.c_alpha_beta = superdiffusive_constant(steps, params, series_tolerance).value;
            break;
    }
    return pred;
}

SuperdiffusiveConstant superdiffusive_constant(const StepSet& steps, const MemoryParams& params,
                                               double tolerance) {
    if (!(tolerance > 0.0))
        throw Error(ErrorCode::InvalidTolerance, "tolerance must be positive");
    if (!(params.delta > 0.5 && params.delta < 1.0))
        throw Error(ErrorCode::WrongRegime, "C_{alpha,beta} requires 1/2 < delta < 1");
    const double delta = params.delta;
    const double gamma = params.gamma;
    const double prefactor = std::exp(std::lgamma(3.0) - std::lgamma(3.0 + 2.0 * delta));

    MomentEngine engine(steps, params);
    while (engine.n() < 3) engine.step();
    double acc = engine.s();  // s_3
    double u_hat = 0.0;       // empirical constant in |u_k| <= u_hat k^(delta+1/2)
    double sig2_max = engine.sigma2();
    double tail = kNaN;
    std::int64_t k = 3;
    // Hard cap: near delta = 1/2 the tail decays like k^(1-2delta) and tiny
    // tolerances become unreachable; the achieved bound is reported either way.
    constexpr std::int64_t kMaxTerms = 100'000'000;
    while (k < kMaxTerms) {
        const double u_k = engine.u();
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        engine.step();  // now at k+1: eta_{k+1}, sigma^2_{k+1}
        const double sig2 = engine.sigma2();
        sig2_max = std::max(sig2_max, sig2);
        acc += (2.0 * gamma / k * sign * u_k + sig2) / engine.eta();
        u_hat = std::max(u_hat, std::abs(u_k) / std::pow(static_cast<double>(k), delta + 0.5));
        ++k;
        if (k >= 64) {
            // Tail of the series: |u_j| <= u_hat j^(delta+1/2) and
            // eta_j >= (2/Gamma(3+2delta)) j^(2delta) (the ratio decreases to
            // its limit for delta > 1/2) give, after the Gamma factors cancel
            // against the prefactor, the bound below; factor 2 covers the
            // empirical u_hat.
            const double kd = static_cast<double>(k);
            tail = 2.0 * (2.0 * std::abs(gamma) * u_hat * std::pow(kd, 0.5 - delta) /
                              (delta - 0.5) +
                          sig2_max * std::pow(kd, 1.0 - 2.0 * delta) / (2.0 * delta - 1.0));
            if (tail < tolerance) break;
        }
    }
    return {prefactor * acc, tail, k};
}

Vec conditional_step_mean(const std::vector<std::int64_t>& counts, std::int64_t n,
                          const StepSet& steps, const MemoryParams& params) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "conditional step mean needs n >= 1");
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (total != n) throw Error(ErrorCode::OutOfRange, "counts must sum to n");
    const int m = steps.m();
    const int d = steps.dimension;
    Vec s(d, 0.0), t(d, 0.0);
    for (int i = 0; i < 2 * m; ++i) {
        if (counts[i] == 0) continue;
        const Vec v = steps.step(i);
        const double w = static_cast<double>(counts[i]);
        for (int c = 0; c < d; ++c) {
            s[c] += w * v[c];
            t[c] += (i < m ? w : -w) * v[c];
        }
    }
    const Vec vbar = mean_odd_step(steps);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double vcoef = (1.0 - params.gamma) * sign -
                         (n % 2 != 0 ? params.delta / static_cast<double>(n) : 0.0);
    Vec out(d, 0.0);
    for (int c = 0; c < d; ++c)
        out[c] = params.delta / n * s[c] + params.gamma / n * sign * t[c] + vcoef * vbar[c];
    return out;
}

void write_moments_csv(const std::string& path, std::int64_t n_max, const StepSet& steps,
                       const MemoryParams& params, std::int64_t every) {
    if (every < 1) throw Error(ErrorCode::ConfigError, "row thinning must be >= 1");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorCode::ConfigError, "cannot open output file '" + path + "'");
    std::fprintf(f, "n,sigma2_n,s_n,t_n,u_n,eta_n,zeta_n,tau_n\n");
    second_moment_recursion(n_max, steps, params, [&](const MomentRow& r) {
        if (r.n % every != 0 && r.n != n_max && r.n != 1) return;
        std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     static_cast<long long>(r.n), r.sigma2, r.s, r.t, r.u, r.eta, r.zeta, r.tau);
    });
    std::fclose(f);
}

}  // namespace erw

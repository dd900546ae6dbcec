#include "erw/urn.hpp"

#include <cmath>

#include <json.hpp>

namespace erw {

namespace {

Mat mixing_matrix(double lambda, int m) {
    // lambda*I_m + (1-lambda)/m * ones(m,m); columns sum to 1.
    Mat a(m, m, (1.0 - lambda) / m);
    for (int i = 0; i < m; ++i) a(i, i) += lambda;
    return a;
}

}  // namespace

GeneratorMatrices build_generators(const MemoryParams& params, int m) {
    GeneratorMatrices g;
    g.m = m;
    g.A = mixing_matrix(params.alpha, m);
    g.B = mixing_matrix(params.beta, m);
    g.H_odd = Mat(2 * m, 2 * m);
    g.H_even = Mat(2 * m, 2 * m);
    g.H = Mat(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            g.H_odd(i, j) = g.A(i, j);
            g.H_odd(i, m + j) = g.B(i, j);
            g.H_even(m + i, j) = g.B(i, j);
            g.H_even(m + i, m + j) = g.A(i, j);
        }
    }
    for (int i = 0; i < 2 * m; ++i)
        for (int j = 0; j < 2 * m; ++j) g.H(i, j) = 0.5 * (g.H_odd(i, j) + g.H_even(i, j));
    return g;
}

SpectralBasis build_spectral_basis(int m, const MemoryParams& params) {
    if (m < 2) throw Error(ErrorCode::OutOfRange, "m must be >= 2");
    SpectralBasis basis;
    basis.m = m;
    Mat q(m, m);
    const double invsqm = 1.0 / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < m; ++i) q(i, 0) = invsqm;  // u = 1_m / sqrt(m)
    for (int r = 1; r < m; ++r) {
        // w_r = (1_r, -r, 0_{m-r-1}) / sqrt(r(r+1))
        const double norm = 1.0 / std::sqrt(static_cast<double>(r) * (r + 1));
        for (int i = 0; i < r; ++i) q(i, r) = norm;
        q(r, r) = -r * norm;
    }
    Mat p(2 * m, 2 * m);
    const double invsq2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            p(i, j) = invsq2 * q(i, j);
            p(i, m + j) = invsq2 * q(i, j);
            p(m + i, j) = invsq2 * q(i, j);
            p(m + i, m + j) = -invsq2 * q(i, j);
        }
    }
    basis.Q = std::move(q);
    basis.P = std::move(p);

    // Verify Q^T Q = I, Q^T A Q = diag(1, alpha...), and P^T H P diagonal.
    const double tol = 1e-12;
    const GeneratorMatrices g = build_generators(params, m);
    const Mat qtq = matmul(transpose(basis.Q), basis.Q);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)) > tol)
                throw Error(ErrorCode::DiagonalizationCheckFailed, "Q is not orthogonal");
    const Mat qtaq = matmul(transpose(basis.Q), matmul(g.A, basis.Q));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double want = (i != j) ? 0.0 : (i == 0 ? 1.0 : params.alpha);
            if (std::abs(qtaq(i, j) - want) > tol)
                throw Error(ErrorCode::DiagonalizationCheckFailed, "Q does not diagonalize A");
        }
    }
    const Mat pthp = matmul(transpose(basis.P), matmul(g.H, basis.P));
    for (int i = 0; i < 2 * m; ++i) {
        for (int j = 0; j < 2 * m; ++j) {
            double want = 0.0;
            if (i == j) {
                if (i == 0)
                    want = 1.0;
                else if (i < m)
                    want = params.gamma;
                else if (i == m)
                    want = 0.0;
                else
                    want = params.delta;
            }
            if (std::abs(pthp(i, j) - want) > tol)
                throw Error(ErrorCode::DiagonalizationCheckFailed, "P does not diagonalize H");
        }
    }
    return basis;
}

SpectralReport spectral_report(const MemoryParams& params, int m) {
    SpectralReport rep;
    rep.gamma = params.gamma;
    rep.delta = params.delta;
    rep.regime = classify_regime(params).kind;
    rep.eigenvalues.push_back(1.0);
    for (int r = 1; r < m; ++r) rep.eigenvalues.push_back(params.gamma);
    rep.eigenvalues.push_back(0.0);
    for (int r = 1; r < m; ++r) rep.eigenvalues.push_back(params.delta);
    if (params.gamma == 1.0) rep.boundary_flags.push_back("gamma_is_one");
    if (params.delta == 1.0) rep.boundary_flags.push_back("delta_is_one");
    // gamma = -1 or delta = -1 break primitivity of H (eigenvalue -1).
    if (params.gamma == -1.0) rep.boundary_flags.push_back("gamma_is_minus_one");
    if (params.delta == -1.0) rep.boundary_flags.push_back("delta_is_minus_one");
    return rep;
}

std::string spectral_report_to_json(const SpectralReport& report) {
    nlohmann::json j;
    j["eigenvalues"] = report.eigenvalues;
    j["gamma"] = report.gamma;
    j["delta"] = report.delta;
    j["regime"] = regime_name(report.regime);
    j["boundary_flags"] = report.boundary_flags;
    return j.dump();
}

}  // namespace erw

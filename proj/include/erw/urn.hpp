#pragma once

#include <string>
#include <vector>

#include "erw/common.hpp"
#include "erw/lattice.hpp"

namespace erw {

/// Periodic generating matrices of the 2m-color urn behind the counting
/// process: A and B act inside/across the two parity classes, H_odd and
/// H_even are the block forms active at odd/even times, H their average.
struct GeneratorMatrices {
    int m = 0;
    Mat A;       // alpha*I + (1-alpha)/m * ones
    Mat B;       // beta*I  + (1-beta)/m  * ones
    Mat H_odd;   // [[A, B], [0, 0]]
    Mat H_even;  // [[0, 0], [B, A]]
    Mat H;       // (H_odd + H_even)/2

    const Mat& H_at(std::int64_t n) const { return (n % 2 != 0) ? H_odd : H_even; }
};

/// Constructive orthogonal basis diagonalizing A, B and H:
/// Q = (u, w_1..w_{m-1}), P = (1/sqrt 2) [[Q, Q], [Q, -Q]].
struct SpectralBasis {
    int m = 0;
    Mat Q;  // m x m
    Mat P;  // 2m x 2m
};

struct SpectralReport {
    Vec eigenvalues;  // in basis order: 1, gamma x(m-1), 0, delta x(m-1)
    double gamma = 0.0;
    double delta = 0.0;
    RegimeKind regime = RegimeKind::Diffusive;
    std::vector<std::string> boundary_flags;
};

GeneratorMatrices build_generators(const MemoryParams& params, int m);

/// Builds Q and P and verifies the diagonalization identities internally
/// (throws DiagonalizationCheckFailed, which should be unreachable).
SpectralBasis build_spectral_basis(int m, const MemoryParams& params);

SpectralReport spectral_report(const MemoryParams& params, int m);

std::string spectral_report_to_json(const SpectralReport& report);

}  // namespace erw

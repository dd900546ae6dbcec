#pragma once

// Cyclic Jacobi eigensolver for small symmetric matrices. Test-only: the
// library itself verifies spectra through the constructive basis, and this
// provides the independent general-purpose route.

#include <algorithm>
#include <cmath>
#include <vector>

#include "erw/common.hpp"

namespace erw::testsupport {

inline std::vector<double> symmetric_eigenvalues(erw::Mat a, int sweeps = 60) {
    const int n = a.rows;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-28) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

/// Eigenvalues of the symmetrized part; used for PSD checks of matrices that
/// are symmetric up to rounding.
inline double smallest_symmetric_eigenvalue(const erw::Mat& a) {
    erw::Mat sym = a;
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) sym(i, j) = 0.5 * (a(i, j) + a(j, i));
    return symmetric_eigenvalues(sym).front();
}

}  // namespace erw::testsupport

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace erw {

using Vec = std::vector<double>;

enum class ErrorCode {
    EmptySet,
    ZeroVector,
    DuplicateVector,
    OverlapViolation,
    DimensionMismatch,
    OutOfRange,
    UnknownName,
    TooShort,
    TooLarge,
    WrongRegime,
    DegenerateParams,
    InvalidTolerance,
    DiagonalizationCheckFailed,
    ConfigError,
    ParseError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

// Dense row-major matrix. Sizes here are tiny (2m <= ~64, d <= ~3), so no
// sparse or external linear algebra is used.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

Mat matmul(const Mat& x, const Mat& y);
Mat transpose(const Mat& x);
Vec matvec(const Mat& x, const Vec& v);
Mat outer(const Vec& x, const Vec& y);
double dot(const Vec& x, const Vec& y);

inline double sq(double x) { return x * x; }

}  // namespace erw

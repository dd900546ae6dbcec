#include "erw/common.hpp"

#include <cassert>

namespace erw {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DuplicateVector: return "DuplicateVector";
        case ErrorCode::OverlapViolation: return "OverlapViolation";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::UnknownName: return "UnknownName";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::WrongRegime: return "WrongRegime";
        case ErrorCode::DegenerateParams: return "DegenerateParams";
        case ErrorCode::InvalidTolerance: return "InvalidTolerance";
        case ErrorCode::DiagonalizationCheckFailed: return "DiagonalizationCheckFailed";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "UnknownError";
}

Mat matmul(const Mat& x, const Mat& y) {
    assert(x.cols == y.rows);
    Mat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int k = 0; k < x.cols; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
        }
    }
    return z;
}

Mat transpose(const Mat& x) {
    Mat z(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) z(j, i) = x(i, j);
    return z;
}

Vec matvec(const Mat& x, const Vec& v) {
    assert(static_cast<size_t>(x.cols) == v.size());
    Vec z(x.rows, 0.0);
    for (int i = 0; i < x.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < x.cols; ++j) acc += x(i, j) * v[j];
        z[i] = acc;
    }
    return z;
}

Mat outer(const Vec& x, const Vec& y) {
    Mat z(static_cast<int>(x.size()), static_cast<int>(y.size()));
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j) z(static_cast<int>(i), static_cast<int>(j)) = x[i] * y[j];
    return z;
}

double dot(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

}  // namespace erw

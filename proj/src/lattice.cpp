#include "erw/lattice.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace erw {

namespace {

bool vec_equal(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return false;
    for (size_t c = 0; c < a.size(); ++c)
        if (std::abs(a[c] - b[c]) > kVectorTol) return false;
    return true;
}

bool vec_is_zero(const Vec& a) {
    for (double x : a)
        if (std::abs(x) > kVectorTol) return false;
    return true;
}

Vec negated(const Vec& a) {
    Vec b(a.size());
    for (size_t c = 0; c < a.size(); ++c) b[c] = -a[c];
    return b;
}

}  // namespace

const char* regime_name(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::Diffusive: return "diffusive";
        case RegimeKind::Critical: return "critical";
        case RegimeKind::Superdiffusive: return "superdiffusive";
    }
    return "?";
}

Vec StepSet::step(int i) const {
    const int mm = m();
    return i < mm ? odd_steps[i] : negated(odd_steps[i - mm]);
}

std::vector<double> StepSet::flattened_steps() const {
    std::vector<double> flat(static_cast<size_t>(directions()) * dimension);
    for (int i = 0; i < directions(); ++i) {
        const Vec v = step(i);
        for (int c = 0; c < dimension; ++c) flat[static_cast<size_t>(i) * dimension + c] = v[c];
    }
    return flat;
}

bool StepSet::is_disjoint() const {
    for (size_t i = 0; i < odd_steps.size(); ++i)
        for (size_t j = i; j < odd_steps.size(); ++j)
            if (vec_equal(odd_steps[i], negated(odd_steps[j]))) return false;
    return true;
}

void require_disjoint(const StepSet& steps) {
    if (!steps.is_disjoint())
        throw Error(ErrorCode::OverlapViolation,
                    "the step set is identical or partially overlapping; the walk dynamics are "
                    "defined only for disjoint V_odd and V_even");
}

namespace {

StepSet checked_step_set(const std::vector<Vec>& raw_vectors, bool reject_overlap) {
    if (raw_vectors.size() < 2)
        throw Error(ErrorCode::EmptySet, "need at least two odd-step vectors, got " +
                                             std::to_string(raw_vectors.size()));
    const size_t d = raw_vectors.front().size();
    if (d == 0) throw Error(ErrorCode::DimensionMismatch, "vectors must have dimension >= 1");
    for (const Vec& v : raw_vectors)
        if (v.size() != d)
            throw Error(ErrorCode::DimensionMismatch, "vectors of mixed dimension in step set");
    for (const Vec& v : raw_vectors)
        if (vec_is_zero(v)) throw Error(ErrorCode::ZeroVector, "step vectors must be nonzero");
    for (size_t i = 0; i < raw_vectors.size(); ++i)
        for (size_t j = i + 1; j < raw_vectors.size(); ++j)
            if (vec_equal(raw_vectors[i], raw_vectors[j]))
                throw Error(ErrorCode::DuplicateVector, "odd-step vectors must be pairwise distinct");
    StepSet s;
    s.dimension = static_cast<int>(d);
    s.odd_steps = raw_vectors;
    if (reject_overlap) {
        // Disjointness of V_odd and V_even = -V_odd: no v_i may equal -v_j.
        for (size_t i = 0; i < raw_vectors.size(); ++i)
            for (size_t j = i; j < raw_vectors.size(); ++j)
                if (vec_equal(raw_vectors[i], negated(raw_vectors[j])))
                    throw Error(ErrorCode::OverlapViolation,
                                "v_" + std::to_string(i + 1) + " = -v_" + std::to_string(j + 1) +
                                    "; identical or partially overlapping step sets are not "
                                    "supported");
    }
    return s;
}

}  // namespace

StepSet validate_step_set(const std::vector<Vec>& raw_vectors) {
    return checked_step_set(raw_vectors, true);
}

MemoryParams derive_memory_params(double p, double q, int m) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "p must lie in [0,1]");
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::OutOfRange, "q must lie in [0,1]");
    if (m < 2) throw Error(ErrorCode::OutOfRange, "m must be >= 2");
    MemoryParams mp;
    mp.p = p;
    mp.q = q;
    mp.m = m;
    mp.alpha = (m * p - 1.0) / (m - 1.0);
    mp.beta = (m * q - 1.0) / (m - 1.0);
    mp.gamma = 0.5 * (mp.alpha + mp.beta);
    mp.delta = 0.5 * (mp.alpha - mp.beta);
    return mp;
}

Regime classify_regime(const MemoryParams& params) {
    Regime r;
    if (params.delta < 0.5)
        r.kind = RegimeKind::Diffusive;
    else if (params.delta == 0.5)
        r.kind = RegimeKind::Critical;
    else
        r.kind = RegimeKind::Superdiffusive;
    r.gamma_is_one = (params.gamma == 1.0);
    r.delta_is_one = (params.delta == 1.0);
    return r;
}

Vec mean_odd_step(const StepSet& steps) {
    Vec vbar(steps.dimension, 0.0);
    for (const Vec& v : steps.odd_steps)
        for (int c = 0; c < steps.dimension; ++c) vbar[c] += v[c];
    for (int c = 0; c < steps.dimension; ++c) vbar[c] /= steps.m();
    return vbar;
}

StepSet builtin_lattice(const std::string& name) {
    const double h = std::sqrt(3.0) / 2.0;
    if (name == "hexagonal")
        return validate_step_set({{1.0, 0.0}, {-0.5, h}, {-0.5, -h}});
    if (name == "brick_wall")  // partially overlapping: geometry only
        return checked_step_set({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}}, false);
    if (name == "distorted_hexagonal")
        return validate_step_set({{1.0, 0.0}, {0.5, 1.0}, {0.0, 0.5}});
    if (name == "two_step_line")
        return validate_step_set({{1.0}, {2.0}});
    throw Error(ErrorCode::UnknownName, "no built-in lattice named '" + name + "'");
}

std::vector<std::string> builtin_lattice_names() {
    return {"hexagonal", "brick_wall", "distorted_hexagonal", "two_step_line"};
}

StepSet load_step_set_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open lattice file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "lattice spec must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "dimension" && it.key() != "odd_steps")
            throw Error(ErrorCode::ParseError, "unknown field '" + it.key() + "' in lattice spec");
    if (!j.contains("dimension") || !j.contains("odd_steps"))
        throw Error(ErrorCode::ParseError, "lattice spec needs 'dimension' and 'odd_steps'");
    if (!j["dimension"].is_number_integer())
        throw Error(ErrorCode::ParseError, "'dimension' must be an integer");
    const int d = j["dimension"].get<int>();
    if (!j["odd_steps"].is_array())
        throw Error(ErrorCode::ParseError, "'odd_steps' must be an array of vectors");
    std::vector<Vec> raw;
    for (const auto& row : j["odd_steps"]) {
        if (!row.is_array()) throw Error(ErrorCode::ParseError, "each odd step must be an array");
        Vec v;
        for (const auto& x : row) {
            if (!x.is_number()) throw Error(ErrorCode::ParseError, "step coordinates must be numbers");
            v.push_back(x.get<double>());
        }
        if (static_cast<int>(v.size()) != d)
            throw Error(ErrorCode::DimensionMismatch,
                        "step vector length does not match 'dimension'");
        raw.push_back(std::move(v));
    }
    return validate_step_set(raw);
}

std::string step_set_to_json(const StepSet& steps) {
    nlohmann::json j;
    j["dimension"] = steps.dimension;
    j["odd_steps"] = steps.odd_steps;
    return j.dump();
}

}  // namespace erw

#pragma once

#include <string>

#include <json.hpp>

namespace erw {

/// Machine-readable outcome of one statistical or structural check.
struct CheckReport {
    std::string check;
    bool pass = false;
    nlohmann::json observed;
    nlohmann::json expected;
    nlohmann::json tolerance;
    nlohmann::json details;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["check"] = check;
        j["pass"] = pass;
        j["observed"] = observed;
        j["expected"] = expected;
        j["tolerance"] = tolerance;
        if (!details.is_null()) j["details"] = details;
        return j;
    }
};

}  // namespace erw

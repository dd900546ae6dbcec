#pragma once

#include <string>
#include <vector>

#include "erw/report.hpp"

namespace erw {

struct ValidationOptions {
    std::string scope = "all";  // all | oracle | spectral | martingale | cross_engine
    // Test fixture: perturbs H before the spectral identities are checked,
    // to prove the check can fail.
    bool inject_spectral_perturbation = false;
};

/// Runs the deterministic validation suites: oracle law equivalence,
/// spectral identities, martingale zero drift, and the two-engine moment
/// cross-check.
std::vector<CheckReport> run_validation(const ValidationOptions& options);

bool all_pass(const std::vector<CheckReport>& reports);

}  // namespace erw

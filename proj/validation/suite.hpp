#pragma once

// Property suites that need no dataset. Shared by the acceptance test binary
// and `tpmoe validate`. The reference computations here are deliberately
// written against different numerical routes than the engine uses (explicit
// inverses, Boost distributions, quadrature).

#include <string>
#include <vector>

namespace tpmoe::validation
{

struct CriterionResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

CriterionResult check_nu_infinity_degeneracy();
CriterionResult check_scale_marginalization();
CriterionResult check_chain_rule();
CriterionResult check_minibatch_exactness();
CriterionResult check_incremental_niw_stats();
CriterionResult check_slice_nu_stationarity(std::size_t draws = 100000);
CriterionResult check_k0_squared_stationarity(std::size_t draws = 100000);
CriterionResult check_sigma2_stationarity(std::size_t draws = 100000);
CriterionResult check_ess_prior_recovery(std::size_t draws = 100000);
CriterionResult check_resampling_unbiased(std::size_t repetitions = 10000);
CriterionResult check_effective_sample_size_identities();
CriterionResult check_determinism();
CriterionResult check_complexity_flatness();

/// Every criterion above, in order. `quick` shrinks Monte Carlo sizes for
/// interactive use; the thresholds stay the same.
std::vector<CriterionResult> run_property_suite(bool quick = false);

}  // namespace tpmoe::validation

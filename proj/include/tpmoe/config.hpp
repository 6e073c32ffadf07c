#pragma once

#include "tpmoe/dataset.hpp"
#include "tpmoe/smc.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace tpmoe
{

enum class StandardizeMode
{
    offline,  ///< whole-series statistics
    prefix,   ///< statistics of the first `prefix_length` rows only
    none,
};

/// Everything a run needs. Serialized as a flat JSON object whose keys are
/// also the CLI flag names.
struct RunConfig
{
    std::string data;
    std::string dataset;  ///< display name; defaults to the file stem
    std::string out = "out";
    CsvSchema schema;

    std::size_t particles = 100;
    std::size_t batch = 50;
    double threshold = 0.5;
    std::uint64_t seed = 1;
    std::size_t repeats = 5;
    std::size_t mc_draws = 4000;
    int threads = 0;  ///< 0: OpenMP default
    std::size_t predict_budget = 50;

    StandardizeMode standardize = StandardizeMode::offline;
    std::size_t prefix_length = 10;
    bool record_timing = true;

    // Priors. nu0 unset means D + 2.
    double mu0 = 0.0;
    double lambda0 = 1.0;
    double psi0 = 1.0;
    std::optional<double> nu0;
    double a0 = 1.0;
    double b0 = 1.0;
    double m0 = 0.0;
    double s0_sq = 1.0;
    double nu_shape = 2.0;
    double nu_rate = 0.1;
    double slice_width = 1.0;
    int slice_max_step_out = 10;
    int slice_max_shrink = 100;

    /// Throws InputError on invalid settings.
    void validate() const;

    /// Engine configuration for inputs of dimension `dim`.
    PriorConfig prior_config(Eigen::Index dim) const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Build a config from defaults overlaid with `j`. Unknown keys and
/// mistyped values are InputErrors.
RunConfig config_from_json(const nlohmann::json& j);

/// Parse a CLI override string for `key` using the type of that key's
/// default value, and store it into `j`.
void apply_override(nlohmann::json& j, const std::string& key,
                    const std::string& value);

/// Read a flat JSON config file.
nlohmann::json load_config_file(const std::string& path);

}  // namespace tpmoe

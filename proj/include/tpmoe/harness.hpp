#pragma once

// Streaming one-step-ahead evaluation: for every observation after the
// first, predict at x_i, record the error against y_i, then reveal y_i.

#include "tpmoe/config.hpp"
#include "tpmoe/dataset.hpp"
#include "tpmoe/predictor.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace tpmoe
{

struct PointForecast
{
    double mean = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
};

struct UpdateInfo
{
    int cluster = -1;
    double n_eff = 0.0;
    bool resampled = false;
};

/// Anything that can be driven by the streaming protocol.
class OnlineModel
{
public:
    virtual ~OnlineModel() = default;

    virtual UpdateInfo start(const Eigen::Ref<const Vector>& x, double y) = 0;
    virtual PointForecast predict(const Eigen::Ref<const Vector>& x) = 0;
    virtual UpdateInfo update(const Eigen::Ref<const Vector>& x, double y) = 0;
};

/// The mixture-of-experts model behind the OnlineModel interface.
class TpMoeModel : public OnlineModel
{
public:
    TpMoeModel(const RunConfig& cfg, Eigen::Index dim);

    UpdateInfo start(const Eigen::Ref<const Vector>& x, double y) override;
    PointForecast predict(const Eigen::Ref<const Vector>& x) override;
    UpdateInfo update(const Eigen::Ref<const Vector>& x, double y) override;

    const ParticleEnsemble& ensemble() const noexcept { return ensemble_; }
    const PredictiveResult& last_prediction() const noexcept { return last_; }

private:
    ParticleEnsemble ensemble_;
    PredictOptions predict_opts_;
    PredictiveResult last_;
};

struct StepRecord
{
    std::size_t i = 0;  ///< 1-based observation index
    double x = 0.0;     ///< first input coordinate
    double y_true = 0.0;
    double pred_mean = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
    double sq_err = 0.0;
    int cluster = -1;
    double n_eff = 0.0;
    bool resampled = false;
    long long micros = 0;
};

struct RunSummary
{
    std::string dataset;
    std::size_t n = 0;
    std::optional<double> mse;
    std::optional<double> coverage95;
    std::uint64_t seed = 0;
    double runtime_s = 0.0;
};

struct RunResult
{
    std::vector<StepRecord> records;
    RunSummary summary;
};

/// Drive `model` over the dataset as given (no standardization here).
RunResult run_stream(const Dataset& ds, OnlineModel& model,
                     bool record_timing = true);

/// Standardize per cfg, build a TpMoeModel and stream the dataset.
RunResult run_stream(const Dataset& ds, const RunConfig& cfg);

/// Dataset after the configured standardization.
Dataset prepare_dataset(const Dataset& ds, const RunConfig& cfg);

/// steps.csv contents (header always present).
std::string format_steps_csv(const std::vector<StepRecord>& records);

nlohmann::json summary_json(const RunSummary& summary, const RunConfig& cfg);

/// Write steps.csv and summary.json into out_dir, creating it if needed.
void emit_results(const std::vector<StepRecord>& records,
                  const RunSummary& summary, const RunConfig& cfg,
                  const std::filesystem::path& out_dir);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace tpmoe

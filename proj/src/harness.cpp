#include "tpmoe/harness.hpp"

#include "tpmoe/errors.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

namespace tpmoe
{

TpMoeModel::TpMoeModel(const RunConfig& cfg, Eigen::Index dim)
    : ensemble_(cfg.prior_config(dim), cfg.seed, dim, cfg.threads),
      predict_opts_{cfg.mc_draws, cfg.predict_budget, cfg.seed, 0}
{}

UpdateInfo TpMoeModel::start(const Eigen::Ref<const Vector>& x, double y)
{
    const StepDiagnostics d = ensemble_.init_first_observation(x, y);
    return {d.map_cluster, d.n_eff, d.resampled};
}

PointForecast TpMoeModel::predict(const Eigen::Ref<const Vector>& x)
{
    PredictOptions opts = predict_opts_;
    opts.stream = static_cast<std::uint32_t>(ensemble_.observations().size());
    last_ = tpmoe::predict(ensemble_, x, opts);
    return {last_.mean, last_.lower95, last_.upper95};
}

UpdateInfo TpMoeModel::update(const Eigen::Ref<const Vector>& x, double y)
{
    const StepDiagnostics d = ensemble_.step(x, y);
    return {d.map_cluster, d.n_eff, d.resampled};
}

RunResult run_stream(const Dataset& ds, OnlineModel& model, bool record_timing)
{
    using clock = std::chrono::steady_clock;
    RunResult result;
    result.summary.dataset = ds.name;
    result.summary.n = static_cast<std::size_t>(ds.size());
    if (ds.size() == 0) return result;

    const auto begin = clock::now();
    model.start(ds.X.row(0).transpose(), ds.y(0));

    double sum_sq = 0.0;
    std::size_t covered = 0;
    for (Eigen::Index i = 1; i < ds.size(); ++i)
    {
        const Vector x = ds.X.row(i).transpose();
        const double y = ds.y(i);
        const auto t0 = clock::now();
        PointForecast f;
        UpdateInfo u;
        try
        {
            f = model.predict(x);
            u = model.update(x, y);
        }
        catch (const InputError& e)
        {
            throw InputError("step " + std::to_string(i + 1) + ": " + e.what());
        }
        catch (const NumericalError& e)
        {
            throw NumericalError("step " + std::to_string(i + 1) + ": "
                                 + e.what());
        }
        const auto t1 = clock::now();

        StepRecord r;
        r.i = static_cast<std::size_t>(i + 1);
        r.x = x(0);
        r.y_true = y;
        r.pred_mean = f.mean;
        r.lower95 = f.lower95;
        r.upper95 = f.upper95;
        r.sq_err = (f.mean - y) * (f.mean - y);
        r.cluster = u.cluster;
        r.n_eff = u.n_eff;
        r.resampled = u.resampled;
        r.micros = record_timing
                       ? std::chrono::duration_cast<std::chrono::microseconds>(
                             t1 - t0)
                             .count()
                       : 0;
        sum_sq += r.sq_err;
        if (y >= f.lower95 && y <= f.upper95) ++covered;
        result.records.push_back(r);
    }
    const auto end = clock::now();

    if (!result.records.empty())
    {
        const auto m = static_cast<double>(result.records.size());
        result.summary.mse = sum_sq / m;
        result.summary.coverage95 = static_cast<double>(covered) / m;
    }
    result.summary.runtime_s
        = std::chrono::duration<double>(end - begin).count();
    return result;
}

Dataset prepare_dataset(const Dataset& ds, const RunConfig& cfg)
{
    switch (cfg.standardize)
    {
    case StandardizeMode::offline: return standardize(ds);
    case StandardizeMode::prefix:
        return standardize_prefix(ds,
                                  static_cast<Eigen::Index>(cfg.prefix_length));
    case StandardizeMode::none: return ds;
    }
    return ds;
}

RunResult run_stream(const Dataset& ds, const RunConfig& cfg)
{
    cfg.validate();
    const Dataset prepared = prepare_dataset(ds, cfg);
    TpMoeModel model(cfg, prepared.dim());
    RunResult r = run_stream(prepared, model, cfg.record_timing);
    r.summary.seed = cfg.seed;
    if (!cfg.dataset.empty()) r.summary.dataset = cfg.dataset;
    return r;
}

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string format_steps_csv(const std::vector<StepRecord>& records)
{
    std::ostringstream out;
    out << "i,x,y_true,pred_mean,lower95,upper95,sq_err,cluster,n_eff,"
           "resampled,micros\n";
    for (const auto& r : records)
    {
        out << r.i << ',' << format_double(r.x) << ','
            << format_double(r.y_true) << ',' << format_double(r.pred_mean)
            << ',' << format_double(r.lower95) << ','
            << format_double(r.upper95) << ',' << format_double(r.sq_err)
            << ',' << r.cluster << ',' << format_double(r.n_eff) << ','
            << (r.resampled ? 1 : 0) << ',' << r.micros << '\n';
    }
    return out.str();
}

nlohmann::json summary_json(const RunSummary& s, const RunConfig& cfg)
{
    nlohmann::json j;
    j["dataset"] = s.dataset;
    j["n"] = s.n;
    j["mse"] = s.mse ? nlohmann::json(*s.mse) : nlohmann::json(nullptr);
    j["coverage95"]
        = s.coverage95 ? nlohmann::json(*s.coverage95) : nlohmann::json(nullptr);
    j["seed"] = s.seed;
    j["config"] = to_json(cfg);
    j["runtime_s"] = s.runtime_s;
    return j;
}

void emit_results(const std::vector<StepRecord>& records,
                  const RunSummary& summary, const RunConfig& cfg,
                  const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw InputError("cannot create output directory " + out_dir.string()
                         + ": " + ec.message());

    const auto steps_path = out_dir / "steps.csv";
    std::ofstream steps(steps_path, std::ios::binary);
    if (!steps) throw InputError("cannot write " + steps_path.string());
    steps << format_steps_csv(records);

    const auto summary_path = out_dir / "summary.json";
    std::ofstream js(summary_path, std::ios::binary);
    if (!js) throw InputError("cannot write " + summary_path.string());
    js << summary_json(summary, cfg).dump(2) << '\n';
    if (!steps || !js) throw InputError("failed writing results to " + out_dir.string());
}

}  // namespace tpmoe

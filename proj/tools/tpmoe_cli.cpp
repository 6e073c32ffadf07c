// tpmoe: streaming one-step-ahead evaluation of the student-t process
// mixture of experts.
//
//   tpmoe run      --data FILE [--config FILE] [--<key> VALUE ...]
//   tpmoe bench    --data FILE --repeats R [--<key> VALUE ...]
//   tpmoe validate [--quick]
//
// Every config key is accepted as a flag of the same name.

#include "tpmoe/config.hpp"
#include "tpmoe/errors.hpp"
#include "tpmoe/harness.hpp"
#include "validation/suite.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

namespace
{

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct ConfigFlags
{
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config_path, "flat JSON config file");
        const nlohmann::json defaults = tpmoe::to_json(tpmoe::RunConfig{});
        for (const auto& [key, value] : defaults.items())
        {
            std::string help = "config key '" + key + "'";
            if (key == "particles") help = "number of particles J";
            if (key == "batch") help = "minibatch size B";
            if (key == "threshold") help = "resample when N_eff < threshold * J";
            options[key] = app->add_option("--" + key, values[key], help);
        }
    }

    tpmoe::RunConfig resolve() const
    {
        nlohmann::json j = nlohmann::json::object();
        if (!config_path.empty()) j = tpmoe::load_config_file(config_path);
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) tpmoe::apply_override(j, key, values.at(key));
        tpmoe::RunConfig cfg = tpmoe::config_from_json(j);
        cfg.validate();
        return cfg;
    }
};

tpmoe::Dataset load(const tpmoe::RunConfig& cfg)
{
    if (cfg.data.empty()) throw tpmoe::InputError("--data is required");
    tpmoe::Dataset ds = tpmoe::load_csv(cfg.data, cfg.schema);
    if (!cfg.dataset.empty()) ds.name = cfg.dataset;
    return ds;
}

std::string fmt_opt(const std::optional<double>& v)
{
    return v ? tpmoe::format_double(*v) : std::string("null");
}

int cmd_run(const ConfigFlags& flags)
{
    const tpmoe::RunConfig cfg = flags.resolve();
    const tpmoe::Dataset ds = load(cfg);
    const tpmoe::RunResult r = tpmoe::run_stream(ds, cfg);
    tpmoe::emit_results(r.records, r.summary, cfg, cfg.out);
    std::cout << r.summary.dataset << ": n=" << r.summary.n
              << " mse=" << fmt_opt(r.summary.mse)
              << " coverage95=" << fmt_opt(r.summary.coverage95)
              << " runtime_s=" << r.summary.runtime_s << '\n';
    return 0;
}

int cmd_bench(const ConfigFlags& flags)
{
    const tpmoe::RunConfig base = flags.resolve();
    const tpmoe::Dataset ds = load(base);

    nlohmann::json runs = nlohmann::json::array();
    std::vector<double> mses;
    for (std::size_t r = 0; r < base.repeats; ++r)
    {
        tpmoe::RunConfig cfg = base;
        cfg.seed = base.seed + r;
        const tpmoe::RunResult res = tpmoe::run_stream(ds, cfg);
        const auto dir = std::filesystem::path(base.out)
                         / ("seed_" + std::to_string(cfg.seed));
        tpmoe::emit_results(res.records, res.summary, cfg, dir);
        if (res.summary.mse) mses.push_back(*res.summary.mse);
        runs.push_back(tpmoe::summary_json(res.summary, cfg));
        std::cout << "seed " << cfg.seed << ": mse=" << fmt_opt(res.summary.mse)
                  << " coverage95=" << fmt_opt(res.summary.coverage95)
                  << " runtime_s=" << res.summary.runtime_s << '\n';
    }

    nlohmann::json out;
    out["dataset"] = ds.name;
    out["repeats"] = base.repeats;
    out["runs"] = runs;
    if (!mses.empty())
    {
        const double n = static_cast<double>(mses.size());
        const double mean = std::accumulate(mses.begin(), mses.end(), 0.0) / n;
        double ss = 0.0;
        for (double m : mses) ss += (m - mean) * (m - mean);
        const double se = mses.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        out["mse_mean"] = mean;
        out["mse_se"] = se;
        std::cout << ds.name << ": mean mse " << mean << " (" << se << ")\n";
    }
    std::filesystem::create_directories(base.out);
    std::ofstream(std::filesystem::path(base.out) / "bench.json")
        << out.dump(2) << '\n';
    return 0;
}

int cmd_validate(bool quick)
{
    const auto results = tpmoe::validation::run_property_suite(quick);
    bool ok = true;
    for (const auto& r : results)
    {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail
                  << '\n';
        ok = ok && r.passed;
    }
    return ok ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Online student-t process mixture of experts"};
    app.require_subcommand(1);

    ConfigFlags run_flags, bench_flags;
    auto* run = app.add_subcommand("run", "stream one dataset with one config");
    run_flags.attach(run);
    auto* bench = app.add_subcommand("bench", "repeat a run over consecutive seeds");
    bench_flags.attach(bench);
    bool quick = false;
    auto* validate = app.add_subcommand("validate", "run the property suites");
    validate->add_flag("--quick", quick, "smaller sample sizes");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try
    {
        if (run->parsed()) return cmd_run(run_flags);
        if (bench->parsed()) return cmd_bench(bench_flags);
        if (validate->parsed()) return cmd_validate(quick);
    }
    catch (const tpmoe::InputError& e)
    {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    }
    catch (const tpmoe::NumericalError& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}

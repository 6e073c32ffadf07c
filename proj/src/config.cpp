#include "tpmoe/config.hpp"

#include "tpmoe/errors.hpp"

#include <fstream>

namespace tpmoe
{

namespace
{

std::string mode_name(StandardizeMode m)
{
    switch (m)
    {
    case StandardizeMode::offline: return "offline";
    case StandardizeMode::prefix: return "prefix";
    case StandardizeMode::none: return "none";
    }
    return "offline";
}

StandardizeMode parse_mode(const std::string& s)
{
    if (s == "offline") return StandardizeMode::offline;
    if (s == "prefix") return StandardizeMode::prefix;
    if (s == "none") return StandardizeMode::none;
    throw InputError("standardize must be one of offline, prefix, none");
}

}  // namespace

void RunConfig::validate() const
{
    if (particles < 1) throw InputError("particles must be >= 1");
    if (batch < 1) throw InputError("batch must be >= 1");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw InputError("threshold must lie in (0, 1]");
    if (repeats < 1) throw InputError("repeats must be >= 1");
    if (mc_draws < 2) throw InputError("mc_draws must be >= 2");
    if (threads < 0) throw InputError("threads must be >= 0");
    if (standardize == StandardizeMode::prefix && prefix_length < 2)
        throw InputError("prefix_length must be >= 2");
    prior_config(1).validate();
}

PriorConfig RunConfig::prior_config(Eigen::Index dim) const
{
    PriorConfig p;
    p.niw.mu0 = Vector::Constant(dim, mu0);
    p.niw.lambda0 = lambda0;
    p.niw.psi0 = psi0 * Matrix::Identity(dim, dim);
    p.niw.nu0 = nu0.value_or(static_cast<double>(dim) + 2.0);
    p.a0 = a0;
    p.b0 = b0;
    p.kernel = {m0, s0_sq};
    p.dof = {nu_shape, nu_rate};
    p.slice = {slice_width, slice_max_step_out, slice_max_shrink};
    p.particles = particles;
    p.batch = batch;
    p.resample_threshold = threshold;
    return p;
}

nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json j;
    j["data"] = c.data;
    j["dataset"] = c.dataset;
    j["out"] = c.out;
    j["time_column"] = c.schema.time_column;
    j["value_column"] = c.schema.value_column;
    j["particles"] = c.particles;
    j["batch"] = c.batch;
    j["threshold"] = c.threshold;
    j["seed"] = c.seed;
    j["repeats"] = c.repeats;
    j["mc_draws"] = c.mc_draws;
    j["threads"] = c.threads;
    j["predict_budget"] = c.predict_budget;
    j["standardize"] = mode_name(c.standardize);
    j["prefix_length"] = c.prefix_length;
    j["record_timing"] = c.record_timing;
    j["mu0"] = c.mu0;
    j["lambda0"] = c.lambda0;
    j["psi0"] = c.psi0;
    j["nu0"] = c.nu0 ? nlohmann::json(*c.nu0) : nlohmann::json(nullptr);
    j["a0"] = c.a0;
    j["b0"] = c.b0;
    j["m0"] = c.m0;
    j["s0_sq"] = c.s0_sq;
    j["nu_shape"] = c.nu_shape;
    j["nu_rate"] = c.nu_rate;
    j["slice_width"] = c.slice_width;
    j["slice_max_step_out"] = c.slice_max_step_out;
    j["slice_max_shrink"] = c.slice_max_shrink;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw InputError("config must be a JSON object");
    const nlohmann::json defaults = to_json(RunConfig{});
    for (const auto& [key, value] : j.items())
        if (!defaults.contains(key))
            throw InputError("unknown config key: " + key);

    nlohmann::json m = defaults;
    m.update(j);
    RunConfig c;
    try
    {
        c.data = m["data"].get<std::string>();
        c.dataset = m["dataset"].get<std::string>();
        c.out = m["out"].get<std::string>();
        c.schema.time_column = m["time_column"].get<std::string>();
        c.schema.value_column = m["value_column"].get<std::string>();
        c.particles = m["particles"].get<std::size_t>();
        c.batch = m["batch"].get<std::size_t>();
        c.threshold = m["threshold"].get<double>();
        c.seed = m["seed"].get<std::uint64_t>();
        c.repeats = m["repeats"].get<std::size_t>();
        c.mc_draws = m["mc_draws"].get<std::size_t>();
        c.threads = m["threads"].get<int>();
        c.predict_budget = m["predict_budget"].get<std::size_t>();
        c.standardize = parse_mode(m["standardize"].get<std::string>());
        c.prefix_length = m["prefix_length"].get<std::size_t>();
        c.record_timing = m["record_timing"].get<bool>();
        c.mu0 = m["mu0"].get<double>();
        c.lambda0 = m["lambda0"].get<double>();
        c.psi0 = m["psi0"].get<double>();
        if (!m["nu0"].is_null()) c.nu0 = m["nu0"].get<double>();
        c.a0 = m["a0"].get<double>();
        c.b0 = m["b0"].get<double>();
        c.m0 = m["m0"].get<double>();
        c.s0_sq = m["s0_sq"].get<double>();
        c.nu_shape = m["nu_shape"].get<double>();
        c.nu_rate = m["nu_rate"].get<double>();
        c.slice_width = m["slice_width"].get<double>();
        c.slice_max_step_out = m["slice_max_step_out"].get<int>();
        c.slice_max_shrink = m["slice_max_shrink"].get<int>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("config: ") + e.what());
    }
    return c;
}

void apply_override(nlohmann::json& j, const std::string& key,
                    const std::string& value)
{
    const nlohmann::json defaults = to_json(RunConfig{});
    if (!defaults.contains(key)) throw InputError("unknown config key: " + key);
    const nlohmann::json& like = defaults[key];
    try
    {
        if (like.is_string())
            j[key] = value;
        else if (like.is_boolean())
        {
            if (value == "true" || value == "1")
                j[key] = true;
            else if (value == "false" || value == "0")
                j[key] = false;
            else
                throw InputError("--" + key + " expects true or false");
        }
        else if (like.is_number_unsigned())
        {
            if (!value.empty() && value.front() == '-')
                throw InputError("--" + key + " must be non-negative");
            j[key] = std::stoull(value);
        }
        else if (like.is_number_integer())
            j[key] = std::stoll(value);
        else
            j[key] = std::stod(value);
    }
    catch (const std::logic_error&)
    {
        throw InputError("--" + key + ": cannot parse '" + value + "'");
    }
}

nlohmann::json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError("config file " + path + ": " + e.what());
    }
}

}  // namespace tpmoe

#include <json.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace
{

const fs::path kCli = TPMOE_CLI_PATH;
const fs::path kFixtures = TPMOE_FIXTURE_DIR;

int run(const std::string& args)
{
    const std::string cmd = kCli.string() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tpmoe_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string small_run(const fs::path& out)
{
    return "run --data " + (kFixtures / "synthetic.csv").string() + " --config "
           + (kFixtures / "small_config.json").string() + " --out " + out.string();
}

}  // namespace

TEST(Cli, RunWritesOutputs)
{
    const fs::path out = scratch("run");
    ASSERT_EQ(run(small_run(out) + " --particles 5 --threshold 0.4"), 0);
    const std::string csv = slurp(out / "steps.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "i,x,y_true,pred_mean,lower95,upper95,sq_err,cluster,n_eff,resampled,micros");
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(j["n"], 60);
    EXPECT_EQ(j["config"]["particles"], 5);
    EXPECT_EQ(j["config"]["batch"], 10);
    EXPECT_EQ(j["config"]["threshold"], 0.4);
    EXPECT_EQ(j["seed"], 3);
    fs::remove_all(out);
}

TEST(Cli, DeterministicAcrossThreads)
{
    const fs::path a = scratch("t1"), b = scratch("t3");
    ASSERT_EQ(run(small_run(a) + " --record_timing false --threads 1"), 0);
    ASSERT_EQ(run(small_run(b) + " --record_timing false --threads 3"), 0);
    EXPECT_EQ(slurp(a / "steps.csv"), slurp(b / "steps.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, BenchRepeats)
{
    const fs::path out = scratch("bench");
    ASSERT_EQ(run("bench --data " + (kFixtures / "synthetic.csv").string() + " --config "
                  + (kFixtures / "small_config.json").string() + " --repeats 2 --out "
                  + out.string()),
              0);
    const auto j = nlohmann::json::parse(slurp(out / "bench.json"));
    EXPECT_TRUE(j.contains("mse_mean"));
    EXPECT_TRUE(j.contains("mse_se"));
    EXPECT_TRUE(fs::exists(out / "seed_3" / "steps.csv"));
    EXPECT_TRUE(fs::exists(out / "seed_4" / "steps.csv"));
    fs::remove_all(out);
}

TEST(Cli, InputErrorsExitOne)
{
    const fs::path out = scratch("bad");
    EXPECT_EQ(run("run --data /nonexistent.csv --out " + out.string()), 1);
    EXPECT_EQ(run(small_run(out) + " --particles 0"), 1);
    EXPECT_EQ(run(small_run(out) + " --batch nope"), 1);
    const fs::path bad = scratch("bad.csv");
    std::ofstream(bad) << "t,y\n1,\n2,3\n";
    EXPECT_EQ(run("run --data " + bad.string() + " --out " + out.string()), 1);
    const fs::path cfg = scratch("bad.json");
    std::ofstream(cfg) << "{\"unknown_key\": 1}";
    EXPECT_EQ(run("run --data " + (kFixtures / "synthetic.csv").string() + " --config "
                  + cfg.string() + " --out " + out.string()),
              1);
    fs::remove_all(out);
    fs::remove_all(bad);
    fs::remove_all(cfg);
}

TEST(Cli, ValidateQuickPasses) { EXPECT_EQ(run("validate --quick"), 0); }

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "globenv/io.hpp"

using namespace globenv;
namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;

    Workspace() {
        dir = fs::temp_directory_path() / ("globenv_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        std::mt19937_64 rng(101);
        write_curve_set_csv(dir / "set.csv", fixtures::random_set(rng, 50, 12, 1));
        write_curve_set_csv(dir / "second.csv", fixtures::random_set(rng, 50, 7, 1));
        const fixtures::ImagePanel panel = fixtures::image_panel(102, 4, 4, 24, 3.0);
        write_curve_set_csv(dir / "images.csv", panel.images);
        write_curve_set_csv(dir / "noise.csv",
                            CurveSet(panel.images.grid(), fixtures::random_set(rng, 24, 16, 1).values(), 1));
        std::ofstream factors(dir / "factors.csv");
        factors << "Group,Age\n";
        for (std::size_t i = 0; i < 24; ++i)
            factors << panel.factors.find("Group")->groups.names[static_cast<std::size_t>(
                           panel.factors.find("Group")->groups.labels[i])]
                    << "," << format_double(panel.factors.find("Age")->values[i]) << "\n";
        std::ofstream groups(dir / "groups.csv");
        groups << "g\n";
        for (std::size_t i = 0; i < 24; ++i) groups << (i % 3 == 0 ? "a" : i % 3 == 1 ? "b" : "c") << "\n";
        std::ofstream samples(dir / "samples.csv");
        samples << "x,y\n";
        std::normal_distribution<double> normal;
        for (int i = 0; i < 30; ++i) samples << format_double(normal(rng)) << "," << (i < 25 ? format_double(normal(rng)) : "") << "\n";
        fs::create_directories(dir / "stages");
        for (int i = 0; i < 20; ++i)
            write_curve_set_csv(dir / "stages" / ("c" + std::to_string(10 + i) + ".csv"), fixtures::random_set(rng, 39, 6, 1));
        std::ofstream bad(dir / "bad.csv");
        bad << "r,obs_1,sim_1\n1,2,oops\n";
    }
    ~Workspace() { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

const Workspace& workspace() {
    static const Workspace w;
    return w;
}

int run(const std::string& args, const std::string& json_out = "") {
    std::string cmd = std::string(GLOBENV_CLI_PATH) + " " + args;
    if (!json_out.empty()) cmd += " --json " + json_out;
    cmd += " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    const Workspace& w = workspace();
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("order --type nosuch " + w.path("set.csv")) == 1);
    CHECK(run("order " + w.path("missing.csv")) == 1);
    CHECK(run("fanova --groups " + w.path("groups.csv") + " " + w.path("images.csv")) == 1);
    CHECK(run("flm --seed 1 --nsim 19 --alpha 0.1 --factors " + w.path("factors.csv") +
              " --full 'Y ~ Group + Sex' --reduced 'Y ~ Group' " + w.path("images.csv")) == 1);
}

TEST_CASE("data and infeasibility errors") {
    const Workspace& w = workspace();
    CHECK(run("order " + w.path("bad.csv")) == 2);
    CHECK(run("envelope-test --alpha 0.001 " + w.path("set.csv")) == 3);
    CHECK(run("order --type qdir --beta 1 " + w.path("set.csv")) == 3);
}

TEST_CASE("subcommands run and write JSON") {
    const Workspace& w = workspace();
    const std::string out = w.path("out.json");
    const std::string svg = w.path("out.svg");
    const std::string cmds[] = {
        "order --type area " + w.path("set.csv"),
        "order --type erl --nstep 2 " + w.path("set.csv") + " " + w.path("second.csv"),
        "central-region --type area --coverage 0.5 " + w.path("set.csv"),
        "envelope-test --type erl --alpha 0.1 " + w.path("set.csv") + " " + w.path("second.csv"),
        "fboxplot " + w.path("set.csv"),
        "fanova --seed 3 --nsim 39 --alpha 0.1 --contrasts --groups " + w.path("groups.csv") + " " + w.path("images.csv"),
        "fanova --seed 3 --nsim 39 --alpha 0.1 --method frank --groups " + w.path("groups.csv") + " " +
            w.path("images.csv"),
        "flm --seed 4 --nsim 39 --alpha 0.1 --factors " + w.path("factors.csv") +
            " --full 'Y ~ Group + Age' --reduced 'Y ~ Age' " + w.path("images.csv"),
        "flm --seed 4 --nsim 39 --alpha 0.1 --method frank --factors " + w.path("factors.csv") +
            " --full 'Y ~ Group + Age + Z' --reduced 'Y ~ Age + Z' --varying Z=" + w.path("noise.csv") + " " +
            w.path("images.csv"),
        "necdf --seed 5 --nsim 99 " + w.path("samples.csv"),
        "composite --alpha 0.1 " + w.path("stages"),
        "demo-normality --seed 6 --s 19 --s2 19 --alpha 0.1 --grid-size 20",
        "demo-polynomial --seed 7 --bootstrap 99 --coverage 0.9",
    };
    for (const std::string& cmd : cmds) {
        CAPTURE(cmd);
        fs::remove(out);
        fs::remove(svg);
        REQUIRE(run(cmd + " --svg " + svg, out) == 0);
        const nlohmann::json j = nlohmann::json::parse(slurp(out));
        CHECK(j.is_object());
        if (cmd.rfind("order", 0) != 0) CHECK(slurp(svg).rfind("<svg", 0) == 0);
    }
    REQUIRE(run("order --type rank " + w.path("set.csv"), out) == 0);
    CHECK(nlohmann::json::parse(slurp(out))["order"].size() == 50);
}

TEST_CASE("output is byte-identical across runs and thread counts") {
    const Workspace& w = workspace();
    const std::string cmds[] = {
        "envelope-test --type erl --alpha 0.05 --seed 7 " + w.path("set.csv"),
        "fanova --seed 3 --nsim 99 --alpha 0.1 --groups " + w.path("groups.csv") + " " + w.path("images.csv"),
        "necdf --seed 5 --nsim 99 " + w.path("samples.csv"),
        "demo-normality --seed 6 --s 19 --s2 19 --alpha 0.1 --grid-size 20",
    };
    for (const std::string& cmd : cmds) {
        CAPTURE(cmd);
        REQUIRE(run(cmd + " --threads 1", w.path("a.json")) == 0);
        REQUIRE(run(cmd + " --threads 1", w.path("b.json")) == 0);
        REQUIRE(run(cmd + " --threads 4", w.path("c.json")) == 0);
        CHECK(slurp(w.path("a.json")) == slurp(w.path("b.json")));
        CHECK(slurp(w.path("a.json")) == slurp(w.path("c.json")));
    }
}

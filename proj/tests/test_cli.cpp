#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "json.hpp"

namespace {

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(FLATCHECK_BIN) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    int status = pclose(pipe);
    return RunResult{WEXITSTATUS(status), out};
}

std::string data(const std::string& name) { return std::string(FLATNESS_DATA_DIR) + "/" + name; }

} // namespace

TEST_CASE("validate") {
    CHECK(run("validate " + data("example1.json")).code == 0);

    auto bad = run("validate " + data("does_not_exist.json"));
    CHECK(bad.code == 1);

    // drift-only system: exit 2 and a message naming the violated rank
    std::string drift = "/tmp/flatcheck_drift.json";
    std::FILE* f = std::fopen(drift.c_str(), "w");
    std::fputs(R"({"name":"d","states":["x1"],"inputs":["u1"],"f":["x1"]})", f);
    std::fclose(f);
    std::string cmd = std::string(FLATCHECK_BIN) + " validate " + drift + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(out.find("input rank") != std::string::npos);

    // malformed JSON: exit 1, message carries a position
    std::string broken = "/tmp/flatcheck_broken.json";
    f = std::fopen(broken.c_str(), "w");
    std::fputs("{\"name\": ", f);
    std::fclose(f);
    CHECK(run("validate " + broken).code == 1);
}

TEST_CASE("test command verdicts and exit codes") {
    auto both = run("test " + data("example1.json") + " --mode both --json");
    CHECK(both.code == 0);
    auto j = nlohmann::json::parse(both.out);
    CHECK(j.at("forward").at("verdict") == "not-forward-flat");
    CHECK(j.at("backward").at("verdict") == "backward-flat");

    auto fwd_only = run("test " + data("example1.json") + " --mode forward --json");
    CHECK(fwd_only.code == 2);
    CHECK(!nlohmann::json::parse(fwd_only.out).contains("backward"));

    auto integ = run("test " + data("integrator.json") + " --mode both --json");
    CHECK(integ.code == 0);
    auto ji = nlohmann::json::parse(integ.out);
    CHECK(ji.at("forward").at("verdict") == "forward-flat");
    CHECK(ji.at("backward").at("verdict") == "backward-flat");

    auto unc = run("test " + data("uncontrollable.json") + " --mode both --json");
    CHECK(unc.code == 2);
    auto ju = nlohmann::json::parse(unc.out);
    CHECK(ju.at("forward").at("verdict") == "not-forward-flat");
    CHECK(ju.at("backward").at("verdict") == "not-backward-flat");

    CHECK(run("test " + data("uncontrollable.json") + " --mode backward --json").code == 2);
}

TEST_CASE("test --derive reports the derived output and rank table") {
    auto r = run("test " + data("example1.json") + " --mode both --derive --json");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("derived_output").at("outputs")[0] == "u1");
    CHECK(j.at("verification").at("status") == "certified");
    CHECK(j.at("verification").at("parameterization").at("R1") == nlohmann::json({3, 2}));
    CHECK(j.at("ranks").at("backward_pattern") == true);
    CHECK(j.at("trajectory").at("correspondence").at("pass") == true);
    CHECK(j.at("trajectory").at("roundtrip").at("pass") == true);
}

TEST_CASE("verify command") {
    auto good = run("verify " + data("example1.json") + " --output " + data("example1_output.json") +
                    " --json");
    CHECK(good.code == 0);
    auto j = nlohmann::json::parse(good.out);
    CHECK(j.at("verification").at("status") == "certified");
    CHECK(j.at("verification").at("parameterization").at("R1") == nlohmann::json({3, 2}));
    CHECK(j.at("verification").at("parameterization").at("R2") == nlohmann::json({0, 0}));
    CHECK(j.at("ranks").at("rank_d_y_minus_R1_Fx") == 1);
    CHECK(j.at("ranks").at("rank_d_y_R2_Fu") == 2);

    auto wrong = run("verify " + data("example1.json") + " --output " +
                     data("example1_wrong_output.json") + " --json");
    CHECK((wrong.code == 2 || wrong.code == 3));

    auto trivial = run("verify " + data("integrator.json") + " --output " +
                       data("integrator_output_x.json") + " --json");
    CHECK(trivial.code == 0);
}

TEST_CASE("associated output is loadable and involutive") {
    auto r = run("associated " + data("example1.json"));
    CHECK(r.code == 0);
    std::string tmp = "/tmp/flatcheck_assoc.json";
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    std::fputs(r.out.c_str(), f);
    std::fclose(f);
    CHECK(run("validate " + tmp).code == 0);
    auto rr = run("associated " + tmp);
    CHECK(rr.code == 0);
    auto j = nlohmann::json::parse(rr.out);
    // double association reproduces the original equations under renaming
    CHECK(j.at("f")[0] == "z4");
    CHECK(j.at("f")[1] == "v2");
    CHECK(j.at("f")[3] == "v1");
}

TEST_CASE("simcheck") {
    CHECK(run("simcheck " + data("example1.json") + " --horizon 10 --seeds 20").code == 0);
    CHECK(run("simcheck " + data("integrator.json")).code == 0);
}

TEST_CASE("reports are byte-identical for a fixed seed") {
    std::string args = "test " + data("example1.json") + " --mode both --derive --json --seed 7";
    auto a = run(args);
    auto b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
}

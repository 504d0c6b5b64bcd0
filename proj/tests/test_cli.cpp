#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef FIFM_CLI_PATH
#define FIFM_CLI_PATH "fifm"
#endif

namespace {

int run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " + std::string(FIFM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("cli: usage and schema errors exit with 2") {
    CHECK(run("") == 2);
    CHECK(run("simulate") == 2); // missing --space
    spit("bad_space.json", "{\"kind\":\"pyramid\"}");
    CHECK(run("simulate --space bad_space.json --t-end 1") == 2);
    spit("notjson.json", "{{{");
    CHECK(run("simulate --space notjson.json --t-end 1") == 2);
}

TEST_CASE("cli: simulate is byte-identical across reruns") {
    spit("space_i5.json", "{\"kind\":\"interval\",\"length\":5.0}");
    CHECK(run("simulate --space space_i5.json --t-end 20 --seed 42 --log log_a.jsonl "
              "--stats stats_a.csv") == 0);
    CHECK(run("simulate --space space_i5.json --t-end 20 --seed 42 --log log_b.jsonl "
              "--stats stats_b.csv") == 0);
    CHECK(slurp("log_a.jsonl") == slurp("log_b.jsonl"));
    CHECK(slurp("stats_a.csv") == slurp("stats_b.csv"));
    CHECK(!slurp("log_a.jsonl").empty());
    CHECK(slurp("stats_a.csv").rfind("time,total,reds,blues", 0) == 0);
}

TEST_CASE("cli: density evaluates a config file") {
    spit("space_i3.json", "{\"kind\":\"interval\",\"length\":3.0}");
    spit("cfg_one.json", R"([{"pos":1.5,"color":"R","birth":0.0,"patience":1.0,"id":1}])");
    CHECK(run("density --space space_i3.json --mu 1 --config cfg_one.json") == 0);
    CHECK(run("density --space space_i3.json --mu 1 --config cfg_one.json "
              "--form janossy --boundary red") == 0);
}

TEST_CASE("cli: solve writes a CSV and verify passes on the single edge") {
    spit("graph_edge.json", R"({"customers":["c"],"servers":["s"],
                                "edges":[["c","s"]],"weights":{"c":1.0,"s":1.0}})");
    CHECK(run("solve --graph graph_edge.json --mu 1 --max-len 6 --out pi.csv") == 0);
    CHECK(slurp("pi.csv").rfind("state,probability,product_form", 0) == 0);
    CHECK(run("verify local-balance --graph graph_edge.json --mu 1 --max-len 4") == 0);
    CHECK(run("verify product-form --graph graph_edge.json --mu 1 --max-len 6") == 0);
}

TEST_CASE("cli: worker count does not change the artifacts") {
    spit("space_c15.json", "{\"kind\":\"circle\",\"length\":1.5}");
    CHECK(run("cftp-sample --space space_c15.json --mu 1 --replicas 400 --seed 11 "
              "--out s1.jsonl",
              "FIFM_WORKERS=1") == 0);
    CHECK(run("cftp-sample --space space_c15.json --mu 1 --replicas 400 --seed 11 "
              "--out s2.jsonl",
              "FIFM_WORKERS=2") == 0);
    CHECK(slurp("s1.jsonl") == slurp("s2.jsonl"));
}

TEST_CASE("cli: quick verification commands") {
    CHECK(run("verify lemma-aux") == 0);
    spit("space_c2.json", "{\"kind\":\"circle\",\"length\":2.0}");
    CHECK(run("regen --space space_c2.json --mu 2 --trials 4000 --seed 3") == 0);
    CHECK(run("cftp-sample --space space_c2.json --mu 1 --replicas 50 --seed 7 "
              "--out samples.jsonl") == 0);
    CHECK(!slurp("samples.jsonl").empty());
}

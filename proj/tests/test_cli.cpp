#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr, interleaved
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(RIGIDKIT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.output.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/rigidkit-cli-test-" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return text;
}

const char* kRigidInstance = R"({
  "d": 3,
  "vertices": ["v1", "v2", "v3", "v4"],
  "hyperedges": [
    {"vertices": ["v1"]},
    {"vertices": ["v2"]},
    {"vertices": ["v1", "v3"]},
    {"vertices": ["v2", "v4"]},
    {"vertices": ["v3", "v4"], "weight": 2}
  ]
})";

const char* kFlexibleInstance = R"({
  "d": 3,
  "vertices": ["v1", "v2", "v3", "v4"],
  "hyperedges": [
    {"vertices": ["v1"]},
    {"vertices": ["v2"]},
    {"vertices": ["v1", "v3"]},
    {"vertices": ["v2", "v4"]},
    {"vertices": ["v3", "v4"]}
  ]
})";

} // namespace

TEST_CASE("check: minimally rigid instance exits 0 with agreeing oracles") {
    const auto path = write_temp("rigid.json", kRigidInstance);
    const auto res = run("check " + path);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("minimally-rigid") != std::string::npos);
    CHECK(res.output.find("8/8") != std::string::npos);
    CHECK(res.output.find("oracles agree: yes") != std::string::npos);
}

TEST_CASE("check: flexible instance exits 1") {
    const auto path = write_temp("flex.json", kFlexibleInstance);
    const auto res = run("check " + path);
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("flexible") != std::string::npos);
}

TEST_CASE("malformed input exits 2 with a diagnostic") {
    const auto path = write_temp("bad.json", "{\"vertices\": []}");
    const auto res = run("check " + path);
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("error:") != std::string::npos);
    CHECK(run("check /nonexistent/file.json").exit_code == 2);
    CHECK(run("frobnicate").exit_code == 2);
}

TEST_CASE("sparsity and decompose on the reference instance") {
    const auto path = write_temp("rigid.json", kRigidInstance);
    const auto sp = run("sparsity " + path + " --json");
    CHECK(sp.exit_code == 0);
    CHECK(sp.output.find("\"tight\": true") != std::string::npos);
    const auto de = run("decompose " + path);
    CHECK(de.exit_code == 0);
    CHECK(de.output.find("2-map decomposition") != std::string::npos);

    const auto flex = write_temp("flex.json", kFlexibleInstance);
    CHECK(run("decompose " + flex).exit_code == 2);  // not tight
}

TEST_CASE("drplan emits a rooted plan") {
    const auto path = write_temp("rigid.json", kRigidInstance);
    const auto res = run("drplan " + path + " --json");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("\"max_fan_in\"") != std::string::npos);
    const auto flex = write_temp("flex.json", kFlexibleInstance);
    CHECK(run("drplan " + flex).exit_code == 2);
}

TEST_CASE("gen and learn round trip, byte-identical per seed") {
    const std::string data = "/tmp/rigidkit-cli-test-data.json";
    const std::string data2 = "/tmp/rigidkit-cli-test-data2.json";
    CHECK(run("gen --d 3 --s 2 --m 24 --seed 7 -o " + data).exit_code == 0);
    CHECK(run("gen --d 3 --s 2 --m 24 --seed 7 -o " + data2).exit_code == 0);
    CHECK(read_file(data) == read_file(data2));
    CHECK(!read_file(data + ".dict").empty());  // hidden dictionary sidecar
    const auto diff = run("gen --d 3 --s 2 --m 24 --seed 8 -o " + data2);
    CHECK(diff.exit_code == 0);
    CHECK(read_file(data) != read_file(data2));

    const std::string dict = "/tmp/rigidkit-cli-test-dict.json";
    const std::string learn_cmd = "learn " + data + " --mode fitted --restarts 32 -o " + dict;
    const auto learn = run(learn_cmd);
    CHECK(learn.exit_code == 0);
    CHECK(learn.output.find("verification: pass") != std::string::npos);
    const std::string dict_text = read_file(dict);
    CHECK(run(learn_cmd).exit_code == 0);
    CHECK(read_file(dict) == dict_text);
}

TEST_CASE("gen below the construction minimum names the minimum") {
    const auto res = run("gen --d 3 --s 2 --m 4 -o /tmp/rigidkit-cli-test-small.json");
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("10") != std::string::npos);
}

TEST_CASE("learn random mode on delimited uniform data") {
    const std::string data = "/tmp/rigidkit-cli-test-uniform.txt";
    std::ofstream out(data);
    // a few unit-ish vectors; learn normalizes nothing, just fits spans
    CHECK(run("gen --d 3 --s 2 --m 10 --kind uniform -o " + data).exit_code == 0);
    const auto res = run("learn " + data + " --s 2 --mode random");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("dictionary size: 5") != std::string::npos);
}

TEST_CASE("solve realizes a pinned instance and reports points") {
    const auto path = write_temp("rigid.json", kRigidInstance);
    // instance above has no pins: solve must reject it as input error
    CHECK(run("solve " + path).exit_code == 2);

    // consistent with the realization v1=(0,0), v2=(4,0), v3=(1,2), v4=(3,2)
    const char* pinned = R"({
  "d": 3,
  "vertices": ["v1", "v2", "v3", "v4"],
  "hyperedges": [
    {"vertices": ["v1"], "pins": [[0.0, 0.0]]},
    {"vertices": ["v2"], "pins": [[4.0, 0.0]]},
    {"vertices": ["v1", "v3"], "pins": [[0.5, 1.0]]},
    {"vertices": ["v2", "v4"], "pins": [[3.5, 1.0]]},
    {"vertices": ["v3", "v4"], "weight": 2, "pins": [[1.5, 2.0], [2.5, 2.0]]}
  ]
})";
    const auto ppath = write_temp("pinned.json", pinned);
    const auto res = run("solve " + ppath + " --restarts 32 --json");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("\"converged\": true") != std::string::npos);
    // deterministic: same seed, same document
    const auto res2 = run("solve " + ppath + " --restarts 32 --json");
    CHECK(res2.output == res.output);
}

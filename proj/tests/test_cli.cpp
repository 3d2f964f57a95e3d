#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vranfair/models.hpp"

using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(VRANFAIR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1 || !WIFEXITED(rc)) return -1;
    return WEXITSTATUS(rc);
}

// Unique scratch directory, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("vranfair_cli_test_" + std::to_string(++counter) + "_" +
                std::to_string(static_cast<long>(::getpid())));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

long count_lines(const std::string& text) {
    long n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::string last_line(const std::string& text) {
    size_t end = text.size();
    while (end > 0 && text[end - 1] == '\n') --end;
    const size_t start = text.rfind('\n', end == 0 ? 0 : end - 1);
    return text.substr(start == std::string::npos ? 0 : start + 1,
                       end - (start == std::string::npos ? 0 : start + 1));
}

}  // namespace

TEST_CASE("no subcommand fails, help succeeds") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("run --help") == 0);
    CHECK(run_cli("bogus-subcommand") == 1);
}

TEST_CASE("run emits one regret row per slot plus provenance trailer") {
    TempDir dir;
    const int rc = run_cli("run --scenario assignment-1 --T 1000 --seeds 7 --out " +
                           dir.path.string());
    REQUIRE(rc == 0);

    const std::string regret = slurp(dir.file("assignment-1_alg1_none_seed7_regret.csv"));
    CHECK(count_lines(regret) == 1002);  // header + 1000 rows + provenance comment
    CHECK(regret.rfind("t,policy,seed,regret,avg_fair_utility,avg_fair_saving,clip_count\n", 0) ==
          0);
    CHECK(last_line(regret).rfind("# provenance:", 0) == 0);

    // assignment trace: one row per (slot, vbs, server); defaults I=5, J=4
    const std::string trace = slurp(dir.file("assignment-1_alg1_none_seed7_trace.csv"));
    CHECK(count_lines(trace) == 2 + 1000 * 5 * 4);
    CHECK(trace.rfind("t,vbs,server,share\n", 0) == 0);
    CHECK(last_line(trace).rfind("# provenance:", 0) == 0);

    const json summary = json::parse(slurp(dir.file("assignment-1_alg1_none_summary.json")));
    REQUIRE(summary.contains("policies"));
    const json& agg = summary["policies"]["alg1"];
    REQUIRE(agg["runs"].size() == 1);
    CHECK(agg["runs"][0]["seed"] == 7);
    CHECK(agg["runs"][0]["final_regret"].is_number());
    CHECK(agg["final_regret_mean"].is_number());
    CHECK(summary["provenance"]["scenario"]["kind"] == "assignment-1");
    CHECK(summary["provenance"]["policy"] == "alg1");
}

TEST_CASE("rerunning the same configuration is byte-identical") {
    TempDir a, b;
    const std::string args = "run --scenario mintb-1 --T 40 --seeds 3,4 --out ";
    REQUIRE(run_cli(args + a.path.string()) == 0);
    REQUIRE(run_cli(args + b.path.string()) == 0);

    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(a.path))
        names.push_back(entry.path().filename().string());
    REQUIRE(names.size() == 5);  // 2 regret + 2 trace + 1 summary
    for (const std::string& name : names) CHECK(slurp(a.file(name)) == slurp(b.file(name)));
}

TEST_CASE("config file keys override command-line flags") {
    TempDir dir;
    write_text(dir.file("cfg.json"), "{\"alpha\": 2.0}\n");
    const int rc = run_cli("run --scenario mintb-1 --T 20 --seeds 1 --alpha 5 --config " +
                           dir.file("cfg.json") + " --out " + dir.path.string());
    REQUIRE(rc == 0);
    const json summary = json::parse(slurp(dir.file("mintb-1_alg2_none_summary.json")));
    CHECK(summary["provenance"]["scenario"]["overrides"]["alpha"] == 2.0);
    CHECK(summary["provenance"]["scenario"]["overrides"]["alpha"] != 5.0);
}

TEST_CASE("invalid inputs exit with code 1") {
    TempDir dir;
    write_text(dir.file("unknown.json"), "{\"bogus\": 1}\n");
    write_text(dir.file("broken.json"), "{not json\n");

    CHECK(run_cli("run --scenario assignment-1 --T 5 --config " + dir.file("unknown.json")) == 1);
    CHECK(run_cli("run --scenario assignment-1 --T 5 --config " + dir.file("broken.json")) == 1);
    CHECK(run_cli("run --scenario " + dir.file("missing.json")) == 1);
    CHECK(run_cli("run --scenario mintb-1 --policy alg1 --T 5") == 1);       // kind mismatch
    CHECK(run_cli("run --scenario assignment-1 --policy alg2 --T 5") == 1);  // kind mismatch
    CHECK(run_cli("run --scenario assignment-1 --policy nope --T 5") == 1);
    CHECK(run_cli("run --scenario assignment-1 --pred noisy:bad --T 5") == 1);
    CHECK(run_cli("run --scenario assignment-1 --seeds '' --T 5") == 1);
    CHECK(run_cli("fit --measurements " + dir.file("missing.csv") + " --out " +
                  dir.file("p.json")) == 1);
    CHECK(run_cli("sweep --scenario mintb-1 --T 5 --axis nope --values 1,2") == 1);
}

TEST_CASE("write failure exits with code 2") {
    TempDir dir;
    // a directory squatting on the regret CSV path makes the write fail
    std::filesystem::create_directories(dir.file("assignment-1_alg1_none_seed1_regret.csv"));
    CHECK(run_cli("run --scenario assignment-1 --T 5 --seeds 1 --out " + dir.path.string()) == 2);
}

TEST_CASE("inline scenario JSON is accepted") {
    TempDir dir;
    const int rc =
        run_cli("run --scenario '{\"kind\":\"mintb-1\",\"I\":3,\"T\":12,\"seed\":4}' --out " +
                dir.path.string());
    REQUIRE(rc == 0);
    const std::string regret = slurp(dir.file("mintb-1_alg2_none_seed1_regret.csv"));
    CHECK(count_lines(regret) == 14);  // header + 12 rows + provenance comment
    const std::string trace = slurp(dir.file("mintb-1_alg2_none_seed1_trace.csv"));
    CHECK(count_lines(trace) == 2 + 12 * 3);
}

TEST_CASE("fit recovers exact linear measurements and round-trips") {
    TempDir dir;
    std::string csv = "pu_id,snr_db,tb_size_bits,proc_time_s,energy_j\n";
    // cpu0: proc = 2e-9*tb + 1e-4 at snr 10, 1e-9*tb + 9e-5 at snr 20
    csv += "cpu0,10,10000,1.2e-4,2.3e-4\n";
    csv += "cpu0,10,30000,1.6e-4,2.9e-4\n";
    csv += "cpu0,20,10000,1.0e-4,2.15e-4\n";
    csv += "cpu0,20,30000,1.2e-4,2.45e-4\n";
    // pool-ha: near-flat accelerator
    csv += "pool-ha,10,10000,3.0e-4,2.8e-3\n";
    csv += "pool-ha,10,30000,3.0e-4,2.8e-3\n";
    csv += "pool-ha,20,10000,2.9e-4,2.7e-3\n";
    csv += "pool-ha,20,30000,2.9e-4,2.7e-3\n";
    write_text(dir.file("meas.csv"), csv);

    const int rc = run_cli("fit --measurements " + dir.file("meas.csv") + " --out " +
                           dir.file("profiles.json"));
    REQUIRE(rc == 0);

    // the emitted document (provenance wrapper included) loads back to the
    // exact profiles the library fits from the same rows
    std::istringstream in(csv);
    const auto expected = vranfair::fit_linear_profiles(vranfair::load_measurements(in));
    const auto loaded = vranfair::profiles_from_json(slurp(dir.file("profiles.json")));
    REQUIRE(loaded.size() == expected.size());
    for (size_t p = 0; p < loaded.size(); ++p) {
        CHECK(loaded[p].id == expected[p].id);
        CHECK(loaded[p].kind == expected[p].kind);
        REQUIRE(loaded[p].snr_grid == expected[p].snr_grid);
        REQUIRE(loaded[p].coeffs.size() == expected[p].coeffs.size());
        for (size_t s = 0; s < loaded[p].coeffs.size(); ++s) {
            CHECK(loaded[p].coeffs[s].zeta == expected[p].coeffs[s].zeta);
            CHECK(loaded[p].coeffs[s].o == expected[p].coeffs[s].o);
            CHECK(loaded[p].coeffs[s].delta == expected[p].coeffs[s].delta);
            CHECK(loaded[p].coeffs[s].gamma == expected[p].coeffs[s].gamma);
        }
    }

    // exact linear data: the cpu0 snr-10 slope/intercept come back exactly
    REQUIRE(loaded[0].id == "cpu0");
    CHECK(loaded[0].kind == vranfair::ServerKind::kCpu);
    CHECK(loaded[0].coeffs[0].zeta == doctest::Approx(2e-9).epsilon(1e-9));
    CHECK(loaded[0].coeffs[0].o == doctest::Approx(1e-4).epsilon(1e-9));
    REQUIRE(loaded[1].id == "pool-ha");
    CHECK(loaded[1].kind == vranfair::ServerKind::kHa);
}

TEST_CASE("sweep merges one summary row per axis value") {
    TempDir dir;
    const int rc = run_cli("sweep --scenario mintb-1 --T 25 --seeds 1 --axis phi "
                           "--values 0,50 --out " +
                           dir.path.string());
    REQUIRE(rc == 0);
    const std::string sweep = slurp(dir.file("sweep_phi.csv"));
    CHECK(count_lines(sweep) == 4);  // header + 2 rows + provenance comment
    CHECK(sweep.rfind("axis,value,policy,pred,num_seeds,final_regret_mean,", 0) == 0);
    CHECK(sweep.find("\nphi,0,") != std::string::npos);
    CHECK(sweep.find("\nphi,50,") != std::string::npos);
    CHECK(last_line(sweep).rfind("# provenance:", 0) == 0);
}

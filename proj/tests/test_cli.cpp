#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinport/cli.hpp"
#include "spinport/dsl.hpp"
#include "spinport/mc/program.hpp"

using spinport::cli::run_cli;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult cli(std::initializer_list<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::vector<std::string>(args), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream file(path, std::ios::binary);
    file << contents;
    return path;
}

}  // namespace

TEST_CASE("run with a builtin writes a schema-tagged report") {
    const auto result =
        cli({"run", "--builtin", "atom_to_light", "--r", "1.0", "--engine", "analytic"});
    REQUIRE(result.code == 0);
    const auto j = nlohmann::json::parse(result.out);
    CHECK(j["schema"] == "spinport-report/1");
    CHECK(j["protocol"] == "atom_to_light");
    CHECK(j["engine"] == "analytic");
    const double fidelity = j["fidelity_coherent"].get<double>();
    CHECK(fidelity == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-6));
    CHECK(fidelity == doctest::Approx(0.88080).epsilon(1e-4));
}

TEST_CASE("run writes to a file when asked") {
    const auto out_path = std::filesystem::temp_directory_path() / "spinport_rep.json";
    std::filesystem::remove(out_path);
    const auto result = cli({"run", "--builtin", "swap", "--r", "20", "--out",
                             out_path.string()});
    REQUIRE(result.code == 0);
    std::ifstream file(out_path);
    REQUIRE(file.good());
    nlohmann::json j;
    file >> j;
    // Ideal swap: the partner's mean arrives with both signs flipped.
    const auto& outputs = j["outputs"];
    CHECK(outputs[0]["label"] == "a");
    CHECK(outputs[0]["gain"][0][2].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(outputs[0]["gain"][1][3].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(outputs[1]["gain"][0][0].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("run with exactly one source") {
    CHECK(cli({"run"}).code == 2);
    CHECK(cli({"run", "--builtin", "swap", "--script", "x.qp"}).code == 2);
    CHECK(cli({"run", "--builtin", "does_not_exist"}).code == 2);
    CHECK(cli({"run", "--script", "/nonexistent/file.qp"}).code == 2);
}

TEST_CASE("monte carlo needs a seed") {
    unsetenv("SPINPORT_SEED");
    const auto result = cli({"run", "--builtin", "atom_to_light", "--engine",
                             "monte_carlo", "--shots", "1000"});
    CHECK(result.code == 2);
    CHECK(result.err.find("SEED_REQUIRED") != std::string::npos);

    SUBCASE("the environment variable fills in") {
        setenv("SPINPORT_SEED", "321", 1);
        const auto seeded = cli({"run", "--builtin", "atom_to_light", "--engine",
                                 "monte_carlo", "--shots", "1000"});
        unsetenv("SPINPORT_SEED");
        CHECK(seeded.code == 0);
        const auto j = nlohmann::json::parse(seeded.out);
        CHECK(j["config"]["seed"] == 321);
    }
}

TEST_CASE("reports are byte-identical across reruns and thread counts") {
    const auto once = cli({"run", "--builtin", "atom_to_atom", "--engine", "monte_carlo",
                           "--shots", "20000", "--seed", "9", "--threads", "1"});
    const auto twice = cli({"run", "--builtin", "atom_to_atom", "--engine", "monte_carlo",
                            "--shots", "20000", "--seed", "9", "--threads", "2"});
    REQUIRE(once.code == 0);
    REQUIRE(twice.code == 0);
    CHECK(once.out == twice.out);
}

TEST_CASE("script files run like builtins") {
    spinport::protocols::ProtocolConfig cfg;
    cfg.r = 0.8;
    const std::string script = spinport::dsl::builtin_script("atom_to_light", cfg);
    const auto path = temp_file("atom_to_light.qp", script);
    const auto from_script = cli({"run", "--script", path.string(), "--r", "0.8"});
    const auto from_builtin = cli({"run", "--builtin", "atom_to_light", "--r", "0.8"});
    REQUIRE(from_script.code == 0);
    REQUIRE(from_builtin.code == 0);
    CHECK(from_script.out == from_builtin.out);
}

TEST_CASE("script diagnostics include positions and codes") {
    const auto path = temp_file("broken.qp", "mode a vacuum\nqnd a c k=1\n");
    const auto result = cli({"run", "--script", path.string()});
    CHECK(result.code == 2);
    CHECK(result.err.find("UNDECLARED_MODE") != std::string::npos);
    CHECK(result.err.find(":2:") != std::string::npos);
}

TEST_CASE("sweep produces the documented CSV") {
    const auto result = cli({"sweep", "--builtin", "atom_to_light", "--grid", "0:2:0.5"});
    REQUIRE(result.code == 0);
    std::istringstream lines(result.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "r,added_noise_x,added_noise_p,fidelity_coherent,engine,shots,seed");
    std::vector<std::string> rows;
    while (std::getline(lines, line))
        if (!line.empty()) rows.push_back(line);
    REQUIRE(rows.size() == 5);
    CHECK(rows.front().rfind("0,", 0) == 0);

    // Fidelity column strictly increases down the file.
    double previous = -1.0;
    for (const auto& row : rows) {
        std::istringstream fields(row);
        std::string field;
        for (int i = 0; i < 4; ++i) std::getline(fields, field, ',');
        const double fidelity = std::stod(field);
        CHECK(fidelity > previous);
        previous = fidelity;
    }
    // Row r=0 carries the classical bound.
    {
        std::istringstream fields(rows.front());
        std::string field;
        for (int i = 0; i < 4; ++i) std::getline(fields, field, ',');
        CHECK(std::stod(field) == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("malformed grids are rejected") {
    const auto reversed = cli({"sweep", "--builtin", "swap", "--grid", "2:0:0.5"});
    CHECK(reversed.code == 2);
    CHECK(reversed.err.find("BAD_GRID") != std::string::npos);
    CHECK(cli({"sweep", "--builtin", "swap", "--grid", "0:1:0"}).code == 2);
    CHECK(cli({"sweep", "--builtin", "swap", "--grid", "zebra"}).code == 2);
}

TEST_CASE("feasibility subcommand") {
    const std::string data_dir = SPINPORT_DATA_DIR;
    SUBCASE("cesium file") {
        const auto result = cli({"feasibility", "--params", data_dir + "/cs_design.toml"});
        REQUIRE(result.code == 0);
        const auto j = nlohmann::json::parse(result.out);
        CHECK(j["n_required"].get<double>() == 800000.0);
        CHECK(j["gamma_over_delta"].get<double>() == doctest::Approx(0.00625).epsilon(1e-12));
        bool found = false;
        for (const auto& check : j["checks"]) {
            if (check["name"] == "gamma_over_delta") {
                CHECK(check["status"] == "pass");
                found = true;
            }
        }
        CHECK(found);
    }
    SUBCASE("missing fields are named and exit 2") {
        const auto path = temp_file("partial.toml", "area = 1e-6\ngamma = 5e6\n");
        const auto result = cli({"feasibility", "--params", path.string()});
        CHECK(result.code == 2);
        CHECK(result.err.find("delta") != std::string::npos);
    }
    SUBCASE("warnings do not change the exit code") {
        const auto path = temp_file(
            "warny.toml",
            "sigma = 7e-9\narea = 1e-6\ngamma = 5e6\ndelta = 8e8\nalpha_v = -0.5\n"
            "F = 4\nN = 1e5\nn = 1e5\n");  // n far from 2 F N
        const auto result = cli({"feasibility", "--params", path.string()});
        CHECK(result.code == 0);
        CHECK(result.err.find("unity_photon_number") != std::string::npos);
    }
}

TEST_CASE("validate cross-checks the three engines") {
    // A light grid keeps the unit test quick; the full grid runs in the
    // acceptance suite.
    const auto result = cli({"validate", "--builtin", "atom_to_light", "--r-grid",
                             "0:1:0.5", "--ratio", "100", "--shots", "20000", "--seed",
                             "4"});
    REQUIRE(result.code == 0);
    CHECK(result.out.find("ok atom_to_light") != std::string::npos);

    SUBCASE("an injected gain error trips the oracle comparison") {
        const auto broken =
            cli({"validate", "--builtin", "atom_to_light", "--r-grid", "0:1:0.5",
                 "--ratio", "100", "--shots", "5000", "--seed", "4",
                 "--inject-gain-error", "1e-3"});
        CHECK(broken.code == 1);
        CHECK(broken.out.find("MISMATCH") != std::string::npos);
    }
    SUBCASE("oracle table dump") {
        const auto dump_path =
            std::filesystem::temp_directory_path() / "oracle_table.json";
        std::filesystem::remove(dump_path);
        const auto dumped = cli({"validate", "--builtin", "swap", "--r-grid", "1:1:1",
                                 "--ratio", "100", "--shots", "2000", "--seed", "4",
                                 "--dump-oracle", dump_path.string()});
        REQUIRE(dumped.code == 0);
        std::ifstream file(dump_path);
        REQUIRE(file.good());
        nlohmann::json j;
        file >> j;
        CHECK(j["schema"] == "spinport-oracle/1");
        CHECK(j["final_operators"].contains("x(a)"));
        CHECK(j["outcomes"].contains("d1"));
    }
}

TEST_CASE("monte carlo sweep fills the shots and seed columns") {
    const auto result = cli({"sweep", "--builtin", "swap", "--grid", "0:1:0.5",
                             "--engine", "monte_carlo", "--shots", "4000", "--seed",
                             "21"});
    REQUIRE(result.code == 0);
    std::istringstream lines(result.out);
    std::string line;
    std::getline(lines, line);  // header
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(line.find(",monte_carlo,4000,21") != std::string::npos);
    }
    CHECK(rows == 3);
}

TEST_CASE("a single-shot run reports one trajectory without variances") {
    const auto result = cli({"run", "--builtin", "swap", "--engine", "monte_carlo",
                             "--shots", "1", "--seed", "5"});
    REQUIRE(result.code == 0);
    const auto j = nlohmann::json::parse(result.out);
    CHECK(j["config"]["shots"] == 1);
    for (const auto& m : j["measurements"]) CHECK(m["variance"].is_null());
    for (const auto& out : j["outputs"]) CHECK_FALSE(out.contains("var_se"));
}

TEST_CASE("kernel override yields identical reports") {
    const std::vector<std::string> args = {"run",     "--builtin", "atom_to_light",
                                           "--engine", "monte_carlo", "--shots",
                                           "20000",   "--seed",    "77"};
    setenv("SPINPORT_KERNEL", "scalar", 1);
    std::ostringstream out_scalar, err_scalar;
    const int code_scalar = run_cli(args, out_scalar, err_scalar);
    unsetenv("SPINPORT_KERNEL");
    REQUIRE(code_scalar == 0);

    if (spinport::mc::avx2_kernel() != nullptr) {
        setenv("SPINPORT_KERNEL", "avx2", 1);
        std::ostringstream out_avx2, err_avx2;
        const int code_avx2 = run_cli(args, out_avx2, err_avx2);
        unsetenv("SPINPORT_KERNEL");
        REQUIRE(code_avx2 == 0);
        CHECK(out_scalar.str() == out_avx2.str());
    }

    setenv("SPINPORT_KERNEL", "quantum", 1);
    std::ostringstream out_bad, err_bad;
    const int code_bad = run_cli(args, out_bad, err_bad);
    unsetenv("SPINPORT_KERNEL");
    CHECK(code_bad == 3);
}

TEST_CASE("the shipped example script runs") {
    const std::string path = std::string(SPINPORT_DATA_DIR) + "/epr_readout.qp";
    const auto result = cli({"run", "--script", path});
    REQUIRE(result.code == 0);
    const auto j = nlohmann::json::parse(result.out);
    CHECK(j["protocol"] == "epr_readout");
    // The conditional displacement squeezes the kept arm's x below vacuum.
    bool found = false;
    for (const auto& out : j["outputs"]) {
        if (out["label"] == "keep") {
            CHECK(out["cov"][0][0].get<double>() < 0.5);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("help exits cleanly") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 2);
}

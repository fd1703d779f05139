#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slef/config.hpp"
#include "slef/run.hpp"

using namespace slef;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("slef_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string summary_value(const RunManifest& m, const std::string& key) {
    for (const auto& [k, v] : m.summary)
        if (k == key) return v;
    return "";
}

ConfigErrorKind error_kind(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.kind;
    }
    FAIL("config accepted: " << text);
    return ConfigErrorKind::syntax;
}

const char* kSpectral =
    "experiment = spectral\n"
    "[domain]\nshape = sector\ntheta = 1.5707963\n"
    "[equation]\ngamma = 0.3333\n";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("numbers") {
        CHECK(parse_number("2*pi/3") == doctest::Approx(2 * M_PI / 3));
        CHECK(parse_number("2^-10") == std::ldexp(1.0, -10));
        CHECK(parse_number("1e-3") == 1e-3);
        CHECK(parse_number("pi") == M_PI);
        CHECK_THROWS_AS(parse_number("2**3"), ConfigError);
        CHECK_THROWS_AS(parse_number("abc"), ConfigError);
    }

    TEST_CASE("config validation") {
        const auto c = parse_config(kSpectral);
        CHECK(c.experiment == "spectral");
        CHECK(c.num("domain", "theta") == doctest::Approx(1.5707963));

        CHECK(error_kind("experiment = spectral\n[domain]\nshape = sector\ntheta = 1\n[equation]\ngamma = -1\n") ==
              ConfigErrorKind::range);
        try {
            parse_config("experiment = spectral\n[domain]\nshape = sector\ntheta = 1\n[equation]\ngama = 0.5\n");
            FAIL("misspelled key accepted");
        } catch (const ConfigError& e) {
            CHECK(e.kind == ConfigErrorKind::unknown_key);
            CHECK(std::string(e.what()).find("gama") != std::string::npos);
            CHECK(e.line == 6);
        }
        CHECK(error_kind("experiment = spectral\n[domain\n") == ConfigErrorKind::syntax);
        CHECK(error_kind("experiment = spectral\n[domain]\nshape = sector\n[equation]\ngamma = 0.5\n") ==
              ConfigErrorKind::missing);
        CHECK(error_kind("experiment = nonsense\n") == ConfigErrorKind::range);
        CHECK(error_kind("[equation]\ngamma = 0.5\n") == ConfigErrorKind::missing);
    }

    TEST_CASE("spectral runs are deterministic") {
        const auto cfg = parse_config(kSpectral);
        const auto dir_a = scratch("det_a");
        const auto a = run(cfg, dir_a);
        const auto b = run(cfg, scratch("det_b"));
        REQUIRE(a.exit_code == 0);
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].sha256 == b.files[i].sha256);
        CHECK(summary_value(a, "class") == "subcritical");
        CHECK(slurp(dir_a / "spectral.csv")
                  .rfind("shape,param,lambda,phi,gamma,class,margin\n", 0) == 0);
        // the echoed config reproduces the hashes
        const auto again = run(parse_config(a.config_echo), scratch("det_c"));
        CHECK(again.files[0].sha256 == a.files[0].sha256);
    }

    TEST_CASE("sha256 against a known digest") {
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("solve with a coarse eps_min warns and succeeds") {
        const auto cfg = parse_config(
            "experiment = solve\n[domain]\nshape = disk\n[equation]\ngamma = 0.5\n[mesh]\nh = 1/16\n"
            "[solver]\neps_min = 0.05\n");
        const auto dir = scratch("trunc");
        const auto m = run(cfg, dir);
        CHECK(m.exit_code == 0);
        CHECK(m.status == "ok");
        REQUIRE_FALSE(m.warnings.empty());
        CHECK(slurp(dir / "manifest.txt").find("truncation") != std::string::npos);
        CHECK(fs::exists(dir / "solution.csv"));
        CHECK(fs::exists(dir / "report.txt"));
    }

    TEST_CASE("convergence failure exits with 2 and still writes the manifest") {
        const auto cfg = parse_config(
            "experiment = solve\n[domain]\nshape = disk\n[equation]\ngamma = 2\n[mesh]\nh = 1/16\n"
            "[solver]\nmax_newton = 1\n");
        const auto dir = scratch("conv");
        const auto m = run(cfg, dir);
        CHECK(m.exit_code == 2);
        CHECK(m.status == "convergence_failure");
        CHECK(slurp(dir / "manifest.txt").find("status: convergence_failure") != std::string::npos);
    }

    TEST_CASE("theta sweep classifies sub, critical and super") {
        auto cfg = parse_config(
            "experiment = spectral\n[domain]\nshape = sector\ntheta = 1\n[equation]\ngamma = 1/3\n"
            "[sweep]\nkey = domain.theta\nvalues = pi/2, 2*pi/3, 3*pi/2\n");
        const auto dir = scratch("sweep");
        const auto m = sweep(cfg, dir, 1);
        REQUIRE(m.exit_code == 0);
        const auto csv = slurp(dir / "sweep.csv");
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        std::vector<std::string> rows;
        while (std::getline(in, line)) rows.push_back(line);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].find(",subcritical,") != std::string::npos);
        CHECK(rows[1].find(",critical,") != std::string::npos);
        CHECK(rows[2].find(",supercritical,") != std::string::npos);
        for (int i = 0; i < 3; ++i) CHECK(fs::exists(dir / ("run_" + std::to_string(i)) / "manifest.txt"));
    }

    TEST_CASE("gamma sweep of the A_k limits is monotone") {
        auto cfg = parse_config(
            "experiment = recursion\n[recursion]\nkind = ak\na1 = 10\nk_max = 100000\n[equation]\ngamma = 1\n"
            "[sweep]\nkey = equation.gamma\nvalues = 1/3, 1/2, 1, 2\n");
        const auto dir = scratch("gsweep");
        const auto m = sweep(cfg, dir, 2);
        REQUIRE(m.exit_code == 0);
        std::vector<double> lim;
        for (int i = 0; i < 4; ++i) {
            const auto s = slurp(dir / ("run_" + std::to_string(i)) / "summary.txt");
            const auto p = s.find("predicted_limit: ");
            REQUIRE(p != std::string::npos);
            lim.push_back(std::stod(s.substr(p + 17)));
        }
        const bool up = lim[1] > lim[0] && lim[2] > lim[1] && lim[3] > lim[2];
        const bool down = lim[1] < lim[0] && lim[2] < lim[1] && lim[3] < lim[2];
        CHECK((up || down));
    }

    TEST_CASE("empty sweep axis is an error") {
        CHECK_THROWS_AS(parse_config(std::string(kSpectral) + "[sweep]\nkey = domain.theta\nvalues = \n"), ConfigError);
        auto cfg = parse_config(std::string(kSpectral) + "[sweep]\nkey = domain.theta\nvalues = 1\n");
        cfg.entries["sweep"]["values"].text = " , ";
        const auto m = sweep(cfg, scratch("empty"), 1);
        CHECK(m.exit_code == 3);
        CHECK(m.error.find("empty") != std::string::npos);
    }

    TEST_CASE("counterexample manifest lists traces and the separation") {
        const auto cfg = parse_config(
            "experiment = counterexample\n[counterexample]\nh = 1/64\nrefine = false\ndepths = 1/8, 1/16\n");
        const auto dir = scratch("cex");
        const auto m = run(cfg, dir);
        REQUIRE(m.exit_code == 0);
        const auto man = slurp(dir / "manifest.txt");
        CHECK(man.find("file: midline.csv") != std::string::npos);
        CHECK(man.find("file: apex.csv") != std::string::npos);
        CHECK_FALSE(summary_value(m, "separation").empty());
    }

    TEST_CASE("command line exit codes and output override") {
        const auto dir = scratch("exe");
        fs::create_directories(dir);
        {
            std::ofstream(dir / "ok.cfg") << kSpectral;
            std::ofstream(dir / "bad.cfg") << "experiment = spectral\n[equation]\ngama = 1\n";
        }
        const std::string exe = SLEF_LAB_EXE;
        auto code = [](const std::string& cmd) {
            const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
            return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
        };
        CHECK(code(exe + " spectral --config " + (dir / "ok.cfg").string() + " --out " + (dir / "o1").string()) == 0);
        CHECK(fs::exists(dir / "o1" / "spectral.csv"));
        CHECK(code(exe + " spectral --config " + (dir / "bad.cfg").string() + " --out " + (dir / "o2").string()) == 3);
        CHECK(slurp(dir / "o2" / "manifest.txt").find("invalid_config") != std::string::npos);
        // subcommand must match the config
        CHECK(code(exe + " solve --config " + (dir / "ok.cfg").string() + " --out " + (dir / "o3").string()) == 3);
        CHECK(code("SLEF_LAB_OUT=" + (dir / "env").string() + " " + exe + " spectral --config " + (dir / "ok.cfg").string()) ==
              0);
        CHECK(fs::exists(dir / "env" / "manifest.txt"));
    }
}

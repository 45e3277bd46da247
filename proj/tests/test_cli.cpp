#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef _WIN32
#include <sys/wait.h>
#endif

namespace {

const std::string cli = DIVSTAT_CLI_PATH;
const std::string data_dir = DIVSTAT_DATA_DIR;

struct cli_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

cli_result run_cli(const std::string& args) {
    static int counter = 0;
    ++counter;
    const std::string out_path = "cli_out_" + std::to_string(counter) + ".tmp";
    const std::string err_path = "cli_err_" + std::to_string(counter) + ".tmp";
    const std::string cmd = cli + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    cli_result r;
#ifdef _WIN32
    r.exit_code = status;
#else
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::ofstream out(name, std::ios::binary);
    out << content;
    return name;
}

} // namespace

TEST_CASE("analyze emits a parseable report") {
    const auto r = run_cli("analyze --cohort " + data_dir + "/cohort31.csv");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.contains("metadata"));
    REQUIRE(j.contains("figure1"));
    REQUIRE(j.contains("scores"));
    REQUIRE(j["figure1"]["n"] == 31);
    REQUIRE(j["metadata"]["library"] == "divstat");
}

TEST_CASE("analyze adds the collapsed section") {
    const auto r = run_cli("analyze --cohort " + data_dir + "/cohort31.csv --collapse " +
                           data_dir + "/collapse25.json");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["collapsed"]["n"] == 25);
    REQUIRE(j["collapsed"]["figure1"]["n"] == 25);
}

TEST_CASE("analyze report is reproducible byte for byte") {
    const std::string args = "analyze --cohort " + data_dir + "/cohort31.csv --collapse " +
                             data_dir + "/collapse25.json --radiation " + data_dir +
                             "/radiation9.csv --turnovers " + data_dir + "/turnovers31.csv";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE_FALSE(a.out.empty());
}

TEST_CASE("missing input file exits with the io code and names the path") {
    const auto r = run_cli("analyze --cohort /nonexistent/cohort.csv");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err.find("/nonexistent/cohort.csv") != std::string::npos);
    REQUIRE(r.out.empty());
}

TEST_CASE("malformed input exits with the validation code") {
    const auto path = write_temp("cli_bad_cohort.tmp",
                                 "name,lifetime_risk,lscd\nA,2.0,1e9\nB,0.1,1e10\n");
    const auto r = run_cli("analyze --cohort " + path);
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.err.find("error:") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("help is available at every level") {
    const auto top = run_cli("--help");
    REQUIRE(top.exit_code == 0);
    REQUIRE(top.out.find("analyze") != std::string::npos);
    REQUIRE(top.out.find("simulate") != std::string::npos);
    for (const std::string sub :
         {"analyze", "scores", "cluster", "radiation", "predict", "simulate", "plot"}) {
        const auto r = run_cli(sub + " --help");
        REQUIRE(r.exit_code == 0);
        REQUIRE(r.out.find("--") != std::string::npos);
    }
}

TEST_CASE("version flag reports the library version") {
    const auto r = run_cli("--version");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("divstat") != std::string::npos);
}

TEST_CASE("unknown subcommand fails cleanly") {
    const auto r = run_cli("frobnicate");
    REQUIRE(r.exit_code == 1);
    const auto none = run_cli("");
    REQUIRE(none.exit_code == 1);
}

TEST_CASE("scores writes the documented CSV") {
    const auto r = run_cli("scores --cohort " + data_dir + "/cohort31.csv");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.rfind("name,ers,rbers,cluster_kmeans,cluster_ward\n", 0) == 0);
    REQUIRE(count_occurrences(r.out, "\n") == 32); // header plus 31 rows
}

TEST_CASE("scores emits JSON on request") {
    const auto r = run_cli("scores --cohort " + data_dir + "/cohort31.csv --json");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 31);
    REQUIRE(j[0].contains("ers"));
    REQUIRE(j[0].contains("cluster_ward"));
}

TEST_CASE("cluster writes label rows") {
    const auto r = run_cli("cluster --cohort " + data_dir + "/cohort31.csv --collapse " +
                           data_dir + "/collapse25.json");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.rfind("name,ers,cluster_kmeans,cluster_ward\n", 0) == 0);
    REQUIRE(count_occurrences(r.out, "\n") == 26);
}

TEST_CASE("radiation reports all six correlations") {
    const auto r = run_cli("radiation --file " + data_dir + "/radiation9.csv");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["n"] == 9);
    for (const std::string key : {"ear_vs_lscd", "err_vs_lscd", "ear_vs_s", "err_vs_s",
                                  "ear_vs_sd_product", "err_vs_sd_product"}) {
        REQUIRE(j.contains(key));
        REQUIRE(j[key].contains("coefficient"));
        REQUIRE(j[key].contains("p_value"));
    }
}

TEST_CASE("predict writes one row per tissue") {
    const auto r = run_cli("predict --cohort " + data_dir + "/cohort31.csv --turnovers " +
                           data_dir + "/turnovers31.csv");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.rfind("name,predicted_risk,observed_risk,log10_ratio,n,turnovers\n", 0) == 0);
    REQUIRE(count_occurrences(r.out, "\n") == 32);
}

TEST_CASE("simulate output is deterministic and carries provenance") {
    const std::string args =
        "simulate --u 1e-3,1e-3 --n 2 --lineages 5000 --divisions 200 --seed 7 --grid 50,100,200";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.out.find("# generator=splitmix64") != std::string::npos);
    REQUIRE(a.out.find("# seed=7") != std::string::npos);
    REQUIRE(a.out.find("# u=0.001,0.001") != std::string::npos);
    REQUIRE(a.out.find("t,cumulative_fraction,stderr,events") != std::string::npos);

    const auto c = run_cli(args + " --workers 4");
    REQUIRE(c.out == a.out);
}

TEST_CASE("simulate honors boundary mutation probabilities") {
    const auto zero = run_cli("simulate --u 0 --lineages 100 --divisions 10 --grid 5,10");
    REQUIRE(zero.exit_code == 0);
    REQUIRE(zero.out.find("\n5,0,0,0\n") != std::string::npos);
    REQUIRE(zero.out.find("\n10,0,0,0\n") != std::string::npos);

    const auto unit = run_cli("simulate --u 1,1 --n 2 --lineages 100 --divisions 3 --grid 1,2,3");
    REQUIRE(unit.exit_code == 0);
    REQUIRE(unit.out.find("\n1,0,0,0\n") != std::string::npos);
    REQUIRE(unit.out.find("\n2,1,0,100\n") != std::string::npos);
}

TEST_CASE("plot renders the documented element inventory") {
    const std::string args = "plot --data " + data_dir +
                             "/cohort31.csv --x log10_lscd --y log10_risk --overlay regression_line";
    const auto r = run_cli(args);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("<svg") != std::string::npos);
    REQUIRE(count_occurrences(r.out, "<circle") == 31);
    REQUIRE(count_occurrences(r.out, "<line ") == 1);
    const auto again = run_cli(args);
    REQUIRE(again.out == r.out);
}

TEST_CASE("plot draws one polyline per contour level") {
    const auto r = run_cli("plot --data " + data_dir +
                           "/cohort31.csv --x log10_lscd --y log10_risk "
                           "--overlay ers_contours --levels -5,-15,-25");
    REQUIRE(r.exit_code == 0);
    REQUIRE(count_occurrences(r.out, "<polyline") == 3);
}

TEST_CASE("plot rejects axes the data cannot supply") {
    const auto r = run_cli("plot --data " + data_dir +
                           "/radiation9.csv --x log10_lscd --y log10_risk");
    REQUIRE(r.exit_code == 1);
    const auto same = run_cli("plot --data " + data_dir +
                              "/cohort31.csv --x log10_lscd --y log10_lscd");
    REQUIRE(same.exit_code == 1);
    const auto axis = run_cli("plot --data " + data_dir +
                              "/cohort31.csv --x log10_lscd --y nonsense");
    REQUIRE(axis.exit_code == 1);
}

TEST_CASE("output lands in the requested file") {
    const std::string path = "cli_report.tmp";
    const auto r = run_cli("scores --cohort " + data_dir + "/cohort31.csv --out " + path);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.empty());
    const std::string content = slurp(path);
    REQUIRE(content.rfind("name,ers,", 0) == 0);
    std::remove(path.c_str());
}

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include <divstat/divstat.hpp>

using namespace divstat;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string data_dir = DIVSTAT_DATA_DIR;

cohort_dataset collinear_dataset(std::size_t n, double slope, double intercept) {
    cohort_dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        tissue_record r;
        r.name = "T" + std::to_string(i);
        r.lscd = std::pow(10.0, 5.0 + static_cast<double>(i));
        r.lifetime_risk = std::pow(10.0, slope * std::log10(r.lscd) + intercept);
        ds.records.push_back(r);
    }
    return ds;
}

} // namespace

TEST_CASE("figure1 analysis of collinear data reports perfect association") {
    const auto ds = collinear_dataset(6, 0.5, -7.0);
    const auto rep = analyze_figure1(ds);
    REQUIRE(rep.n == 6);
    REQUIRE(rep.pearson_loglog.coefficient == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.spearman_loglog.coefficient == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.explained_loglog == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.fit.slope == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(rep.fit.intercept == Catch::Approx(-7.0).margin(1e-9));
    REQUIRE(rep.intercept_risk == Catch::Approx(1e-7).epsilon(1e-9));
    REQUIRE(rep.weighted_explained == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("figure1 analysis does not depend on record order") {
    auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    const auto base = analyze_figure1(ds);

    std::reverse(ds.records.begin(), ds.records.end());
    const auto rev = analyze_figure1(ds);
    REQUIRE(rev.pearson_loglog.coefficient ==
            Catch::Approx(base.pearson_loglog.coefficient).margin(1e-12));
    REQUIRE(rev.spearman_loglog.coefficient ==
            Catch::Approx(base.spearman_loglog.coefficient).margin(1e-12));
    REQUIRE(rev.fit.slope == Catch::Approx(base.fit.slope).margin(1e-12));
    REQUIRE(rev.fit.intercept == Catch::Approx(base.fit.intercept).margin(1e-12));
    REQUIRE(rev.weighted_explained == Catch::Approx(base.weighted_explained).margin(1e-12));
}

TEST_CASE("explained variation equals the squared coefficient") {
    const auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    const auto rep = analyze_figure1(ds);
    REQUIRE(rep.explained_loglog ==
            rep.pearson_loglog.coefficient * rep.pearson_loglog.coefficient);
    REQUIRE(rep.explained_raw == rep.pearson_raw.coefficient * rep.pearson_raw.coefficient);
}

TEST_CASE("score table residuals are the fit residuals") {
    const auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    const auto rep = analyze_figure1(ds);
    const auto table = score_table(ds, rep.fit);
    REQUIRE(table.size() == rep.fit.residuals.size());
    for (std::size_t i = 0; i < table.size(); ++i)
        REQUIRE(table[i].rbers == rep.fit.residuals[i]);
}

TEST_CASE("figure1 analysis requires enough records") {
    REQUIRE_THROWS_AS(analyze_figure1(collinear_dataset(3, 0.5, -7.0)), validation_error);
}

TEST_CASE("radiation analysis recovers monotone association") {
    std::vector<radiation_record> recs;
    for (int i = 1; i <= 6; ++i) {
        radiation_record r;
        r.name = "organ" + std::to_string(i);
        r.lscd = std::pow(10.0, i);
        r.ear = 0.1 * i;
        r.err = 1.0 / i;
        r.s = 1e7 * i;
        r.sd_product = r.s * 3.0;
        recs.push_back(r);
    }
    const auto rep = analyze_radiation(recs);
    REQUIRE(rep.n == 6);
    REQUIRE(rep.ear_lscd.coefficient == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.err_lscd.coefficient == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(rep.ear_s.coefficient == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.ear_lscd.method == corr_method::spearman);
    REQUIRE(rep.ear_lscd.p_kind == p_method::exact_permutation);
}

TEST_CASE("radiation analysis rejects degenerate input") {
    std::vector<radiation_record> recs(5);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].name = "organ" + std::to_string(i);
        recs[i].lscd = 1e9; // constant column
        recs[i].ear = 0.1 * static_cast<double>(i + 1);
        recs[i].err = 0.2;
        recs[i].s = 1e7;
        recs[i].sd_product = 3e7;
    }
    REQUIRE_THROWS_AS(analyze_radiation(recs), validation_error);
    REQUIRE_THROWS_AS(analyze_radiation({recs[0], recs[1]}), validation_error);
}

TEST_CASE("default stage counts follow the tumor-type patterns") {
    const auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    const auto m = default_n_map(ds);
    REQUIRE(m.size() == ds.records.size());
    REQUIRE(m.at("Osteosarcoma") == 2);
    REQUIRE(m.at("Osteosarcoma of the pelvis") == 2);
    REQUIRE(m.at("Glioblastoma") == 2);
    REQUIRE(m.at("Medulloblastoma") == 2);
    REQUIRE(m.at("Gallbladder non-papillary adenocarcinoma") == 2);
    REQUIRE(m.at("Thyroid medullary carcinoma") == 2);
    REQUIRE(m.at("Thyroid papillary/follicular carcinoma") == 2);
    REQUIRE(m.at("Ovarian germ cell") == 2);
    REQUIRE(m.at("Colorectal adenocarcinoma") == 3);
    REQUIRE(m.at("Melanoma") == 3);
    int twos = 0;
    for (const auto& [name, n] : m)
        if (n == 2) ++twos;
    REQUIRE(twos == 11); // five osteosarcoma records plus six other matches
}

TEST_CASE("turnover parsing validates its table") {
    const auto m = parse_turnovers("name,turnovers\nA,100\nB,2.5e3\n");
    REQUIRE(m.size() == 2);
    REQUIRE(m.at("B") == Catch::Approx(2500.0));
    REQUIRE_THROWS_AS(parse_turnovers("name,turnovers\nA,0\n"), validation_error);
    REQUIRE_THROWS_AS(parse_turnovers("name,turnovers\nA,-5\n"), validation_error);
    REQUIRE_THROWS_AS(parse_turnovers("name,turnovers\nA,10\nA,20\n"), validation_error);
    REQUIRE_THROWS_AS(parse_turnovers("name,count\nA,10\n"), validation_error);
    REQUIRE_THROWS_AS(parse_turnovers("name,turnovers\n"), validation_error);
}

TEST_CASE("predictions derive the stem-cell count from the division total") {
    const auto ds = parse_cohort("name,lifetime_risk,lscd\nA,0.05,1.17e12\nB,0.001,1e10\n");
    std::map<std::string, double> turn{{"A", 5840.0}, {"B", 1000.0}};
    std::map<std::string, int> n_map{{"A", 3}, {"B", 2}};
    const auto rep = predict_tr2(ds, turn, 1e-7, n_map);
    REQUIRE(rep.entries.size() == 2);
    REQUIRE(rep.entries[0].s == Catch::Approx(1.17e12 / 5840.0).epsilon(1e-12));
    REQUIRE(rep.entries[0].n == 3);
    const double expect_a =
        (1.17e12 / 5840.0) * std::pow(1e-7 * 5840.0, 3) / 6.0;
    REQUIRE(rep.entries[0].predicted_risk == Catch::Approx(expect_a).epsilon(1e-12));
    REQUIRE(rep.entries[0].log10_ratio ==
            Catch::Approx(std::log10(expect_a) - std::log10(0.05)).margin(1e-12));
}

TEST_CASE("predictions report the within-tenfold tally") {
    const auto ds = parse_cohort("name,lifetime_risk,lscd\nA,0.01,1e10\nB,0.5,1e10\n");
    std::map<std::string, double> turn{{"A", 1000.0}, {"B", 1000.0}};
    std::map<std::string, int> n_map{{"A", 1}, {"B", 1}};
    // n=1: risk = s u T = lscd * u = 1e10 * 1e-9 = 10 -> clamps to 1.
    const auto rep = predict_tr2(ds, turn, 1e-9, n_map);
    REQUIRE(rep.entries[0].clamped);
    // |log10(1/0.01)| = 2 misses, |log10(1/0.5)| = 0.3 hits
    REQUIRE(rep.within_one_log10 == 1);
}

TEST_CASE("predictions handle a zero mutation probability") {
    const auto ds = parse_cohort("name,lifetime_risk,lscd\nA,0.01,1e10\n");
    std::map<std::string, double> turn{{"A", 1000.0}};
    const auto rep = predict_tr2(ds, turn, 0.0, default_n_map(ds));
    REQUIRE(rep.entries[0].out_of_domain);
    REQUIRE(rep.entries[0].predicted_risk == 0.0);
    REQUIRE(std::isinf(rep.entries[0].log10_ratio));
    REQUIRE(rep.within_one_log10 == 0);
}

TEST_CASE("predictions require a turnover entry per record") {
    const auto ds = parse_cohort("name,lifetime_risk,lscd\nA,0.01,1e10\nB,0.1,1e11\n");
    std::map<std::string, double> turn{{"A", 1000.0}};
    REQUIRE_THROWS_WITH(predict_tr2(ds, turn, 1e-7, default_n_map(ds)),
                        Catch::Matchers::ContainsSubstring("B"));
}

TEST_CASE("prediction CSV lists every record") {
    const auto ds = parse_cohort("name,lifetime_risk,lscd\nA,0.01,1e10\n");
    std::map<std::string, double> turn{{"A", 1000.0}};
    std::map<std::string, int> n_map{{"A", 2}};
    const auto rep = predict_tr2(ds, turn, 1e-7, n_map);
    const std::string text = serialize_predictions(rep);
    REQUIRE(text.rfind("name,predicted_risk,observed_risk,log10_ratio,n,turnovers\n", 0) == 0);
    REQUIRE(text.find("\nA,") != std::string::npos);
    REQUIRE(text.find(",2,") != std::string::npos);
}

TEST_CASE("full report is reproducible byte for byte") {
    const auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    report_options opt;
    opt.collapse = parse_grouping(slurp(data_dir + "/collapse25.json"));
    const auto radiation = parse_radiation(slurp(data_dir + "/radiation9.csv"));
    const std::string a = full_report(ds, radiation, opt);
    const std::string b = full_report(ds, radiation, opt);
    REQUIRE(a == b);
}

TEST_CASE("full report carries metadata and section structure") {
    const auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    report_options opt;
    opt.collapse = parse_grouping(slurp(data_dir + "/collapse25.json"));
    opt.turnovers = parse_turnovers(slurp(data_dir + "/turnovers31.csv"));
    const auto radiation = parse_radiation(slurp(data_dir + "/radiation9.csv"));
    const std::string text = full_report(ds, radiation, opt);

    const auto j = nlohmann::json::parse(text);
    REQUIRE(j["metadata"]["library"] == "divstat");
    REQUIRE(j["metadata"]["generator"] == "splitmix64");
    REQUIRE(j["metadata"]["n_records"] == 31);
    REQUIRE(j["metadata"]["unit_label"] == "lifespan");
    REQUIRE(j["metadata"]["dataset_hash"].get<std::string>().size() == 16);
    REQUIRE(j["figure1"]["n"] == 31);
    REQUIRE(j["figure1"]["pearson_loglog"].contains("ci_low"));
    REQUIRE(j["scores"].size() == 31);
    REQUIRE(j["collapsed"]["n"] == 25);
    REQUIRE(j["collapsed"]["figure1"]["n"] == 25);
    REQUIRE(j["collapsed"]["dataset_hash"] != j["metadata"]["dataset_hash"]);
    REQUIRE(j["radiation"]["n"] == 9);
    REQUIRE(j["radiation"].contains("ear_vs_lscd"));
    REQUIRE(j["radiation"].contains("err_vs_sd_product"));
    REQUIRE(j["predictions"]["entries"].size() == 31);

    // The top-level scores must come from the same fit as figure1.
    const double slope = j["figure1"]["fit"]["slope"].get<double>();
    const auto rep = analyze_figure1(ds);
    REQUIRE(slope == rep.fit.slope);
    REQUIRE(j["scores"][0]["rbers"].get<double>() == rep.fit.residuals[0]);
}

TEST_CASE("full report omits sections whose inputs are absent") {
    const auto ds = parse_cohort(slurp(data_dir + "/cohort31.csv"));
    report_options opt;
    const std::string text = full_report(ds, std::nullopt, opt);
    const auto j = nlohmann::json::parse(text);
    REQUIRE_FALSE(j.contains("radiation"));
    REQUIRE_FALSE(j.contains("collapsed"));
    REQUIRE_FALSE(j.contains("predictions"));
    REQUIRE(j.contains("figure1"));
    REQUIRE(j.contains("scores"));
}

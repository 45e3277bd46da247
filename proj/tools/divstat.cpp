#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <divstat/divstat.hpp>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw divstat::io_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw divstat::io_error("read failed: " + path);
    return ss.str();
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw divstat::io_error("cannot write file: " + out_path);
    out << content;
    if (!out) throw divstat::io_error("write failed: " + out_path);
}

divstat::cohort_dataset load_cohort(const std::string& cohort_path,
                                    const std::string& collapse_path) {
    divstat::cohort_dataset ds = divstat::parse_cohort(read_file(cohort_path));
    if (!collapse_path.empty())
        ds = divstat::collapse_subgroups(ds, divstat::parse_grouping(read_file(collapse_path)));
    return ds;
}

const std::map<std::string, divstat::plot_axis> axis_names{
    {"log10_lscd", divstat::plot_axis::log10_lscd},
    {"log10_risk", divstat::plot_axis::log10_risk},
    {"predicted_risk", divstat::plot_axis::predicted_risk},
    {"observed_risk", divstat::plot_axis::observed_risk},
    {"ear", divstat::plot_axis::ear},
    {"err", divstat::plot_axis::err_axis},
    {"s", divstat::plot_axis::s_axis},
    {"sd_product", divstat::plot_axis::sd_product}};

const std::map<std::string, divstat::plot_overlay> overlay_names{
    {"regression_line", divstat::plot_overlay::regression_line},
    {"identity_line", divstat::plot_overlay::identity_line},
    {"ers_contours", divstat::plot_overlay::ers_contours}};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Statistical toolkit for division-count cancer-risk analyses"};
    app.set_version_flag("--version",
                         std::string(divstat::library_name) + " " + divstat::library_version);
    app.require_subcommand(1);

    // analyze: the full JSON report.
    auto* analyze = app.add_subcommand("analyze", "Correlations, fits, scores, full JSON report");
    std::string an_cohort, an_collapse, an_radiation, an_turnovers, an_out;
    double an_u = 5e-7;
    std::uint64_t an_seed = 0;
    analyze->add_option("--cohort", an_cohort, "Cohort CSV (name,lifetime_risk,lscd,...)")
        ->required();
    analyze->add_option("--collapse", an_collapse, "Grouping spec JSON for subgroup collapsing");
    analyze->add_option("--radiation", an_radiation, "Radiation CSV (name,ear,err,lscd,s,sd_product)");
    analyze->add_option("--turnovers", an_turnovers, "Turnover CSV (name,turnovers) for predictions");
    analyze->add_option("--u", an_u, "Driver mutation probability per division")
        ->capture_default_str();
    analyze->add_option("--seed", an_seed, "Seed recorded in report metadata")
        ->capture_default_str();
    analyze->add_option("--out", an_out, "Output file (default: stdout)");
    analyze->callback([&] {
        divstat::cohort_dataset ds = divstat::parse_cohort(read_file(an_cohort));
        divstat::report_options opt;
        opt.u = an_u;
        opt.seed = an_seed;
        if (!an_collapse.empty())
            opt.collapse = divstat::parse_grouping(read_file(an_collapse));
        if (!an_turnovers.empty())
            opt.turnovers = divstat::parse_turnovers(read_file(an_turnovers));
        std::optional<std::vector<divstat::radiation_record>> rad;
        if (!an_radiation.empty()) rad = divstat::parse_radiation(read_file(an_radiation));
        write_output(an_out, divstat::full_report(ds, rad, opt));
    });

    // scores: ERS/RBERS table with cluster labels.
    auto* scores = app.add_subcommand("scores", "ERS/RBERS score table with D/R cluster labels");
    std::string sc_cohort, sc_collapse, sc_out;
    bool sc_json = false;
    scores->add_option("--cohort", sc_cohort, "Cohort CSV")->required();
    scores->add_option("--collapse", sc_collapse, "Grouping spec JSON applied before scoring");
    scores->add_flag("--json", sc_json, "Emit JSON instead of CSV");
    scores->add_option("--out", sc_out, "Output file (default: stdout)");
    scores->callback([&] {
        const divstat::cohort_dataset ds = load_cohort(sc_cohort, sc_collapse);
        const auto [lx, ly] = divstat::log_pairs(ds);
        const auto table = divstat::score_table(ds, divstat::ols(lx, ly));
        if (sc_json)
            write_output(sc_out, divstat::report_json::scores(table).dump());
        else
            write_output(sc_out, divstat::serialize_scores(table));
    });

    // cluster: labels only, no regression involved.
    auto* cluster = app.add_subcommand("cluster", "Two-cluster D/R assignment of ERS values");
    std::string cl_cohort, cl_collapse, cl_out;
    cluster->add_option("--cohort", cl_cohort, "Cohort CSV")->required();
    cluster->add_option("--collapse", cl_collapse, "Grouping spec JSON applied before clustering");
    cluster->add_option("--out", cl_out, "Output file (default: stdout)");
    cluster->callback([&] {
        const divstat::cohort_dataset ds = load_cohort(cl_cohort, cl_collapse);
        std::vector<double> ers_values;
        for (const auto& rec : ds.records)
            ers_values.push_back(divstat::ers(rec.lifetime_risk, rec.lscd));
        const auto km = divstat::kmeans2_1d(ers_values);
        const auto wd = divstat::ward2(ers_values);
        std::string out = "name,ers,cluster_kmeans,cluster_ward\n";
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            out += ds.records[i].name;
            out += ',';
            out += divstat::csv::format_real17(ers_values[i]);
            out += ',';
            out += divstat::to_string(km[i]);
            out += ',';
            out += divstat::to_string(wd[i]);
            out += '\n';
        }
        write_output(cl_out, out);
    });

    // radiation: the six Spearman tests as JSON.
    auto* radiation = app.add_subcommand("radiation", "EAR/ERR vs division-count correlations");
    std::string ra_file, ra_out;
    radiation->add_option("--file", ra_file, "Radiation CSV (name,ear,err,lscd,s,sd_product)")
        ->required();
    radiation->add_option("--out", ra_out, "Output file (default: stdout)");
    radiation->callback([&] {
        const auto records = divstat::parse_radiation(read_file(ra_file));
        write_output(ra_out,
                     divstat::report_json::radiation(divstat::analyze_radiation(records)).dump());
    });

    // predict: theoretical lifetime risks from turnover counts.
    auto* predict = app.add_subcommand("predict", "Multistage lifetime-risk predictions");
    std::string pr_cohort, pr_turnovers, pr_out;
    double pr_u = 5e-7;
    bool pr_json = false;
    predict->add_option("--cohort", pr_cohort, "Cohort CSV")->required();
    predict->add_option("--turnovers", pr_turnovers, "Turnover CSV (name,turnovers)")->required();
    predict->add_option("--u", pr_u, "Driver mutation probability per division")
        ->capture_default_str();
    predict->add_flag("--json", pr_json, "Emit JSON instead of CSV");
    predict->add_option("--out", pr_out, "Output file (default: stdout)");
    predict->callback([&] {
        const divstat::cohort_dataset ds = divstat::parse_cohort(read_file(pr_cohort));
        const auto turn = divstat::parse_turnovers(read_file(pr_turnovers));
        const auto rep = divstat::predict_tr2(ds, turn, pr_u, divstat::default_n_map(ds));
        for (const auto& e : rep.entries)
            if (e.regime_warning)
                std::cerr << "warning: u*turnovers above 0.1 for '" << e.name
                          << "', closed form is outside its regime\n";
        if (pr_json)
            write_output(pr_out, divstat::report_json::predictions(rep).dump());
        else
            write_output(pr_out, divstat::serialize_predictions(rep));
    });

    // simulate: Monte Carlo lineage cohort.
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo driver-accumulation simulator");
    std::vector<double> si_u;
    int si_n = 1;
    std::uint64_t si_lineages = 10000, si_divisions = 100, si_seed = 0;
    std::vector<std::uint64_t> si_grid;
    unsigned si_workers = 1;
    bool si_control = false;
    std::string si_out;
    simulate->add_option("--u", si_u, "Driver probabilities per division (comma separated)")
        ->required()
        ->delimiter(',');
    simulate->add_option("--n", si_n, "Drivers required for transformation")->capture_default_str();
    simulate->add_option("--lineages", si_lineages, "Independent stem-cell lineages")
        ->capture_default_str();
    simulate->add_option("--divisions", si_divisions, "Time horizon in divisions")
        ->capture_default_str();
    simulate->add_option("--seed", si_seed, "RNG seed")->capture_default_str();
    simulate->add_option("--grid", si_grid, "Recording times (comma separated; default: 20 even)")
        ->delimiter(',');
    simulate->add_option("--workers", si_workers, "Worker threads (0 = hardware)")
        ->capture_default_str();
    simulate->add_flag("--control", si_control, "Require n+1 drivers (control group)");
    simulate->add_option("--out", si_out, "Output file (default: stdout)");
    simulate->callback([&] {
        divstat::multistage_params p;
        p.u = si_u;
        p.n = si_n;
        divstat::sim_config cfg;
        cfg.lineages = si_lineages;
        cfg.divisions = si_divisions;
        cfg.seed = si_seed;
        cfg.control_group = si_control;
        if (si_grid.empty()) {
            std::uint64_t prev = 0;
            for (int i = 1; i <= 20; ++i) {
                const std::uint64_t t = si_divisions * static_cast<std::uint64_t>(i) / 20;
                if (t > prev) {
                    cfg.record_grid.push_back(t);
                    prev = t;
                }
            }
        } else {
            cfg.record_grid = si_grid;
        }
        const divstat::sim_curve curve = divstat::simulate_cohort(p, cfg, si_workers);
        std::string out;
        out += "# generator=" + std::string(divstat::generator_name) + "\n";
        out += "# seed=" + std::to_string(cfg.seed) + "\n";
        out += "# lineages=" + std::to_string(cfg.lineages) + "\n";
        out += "# divisions=" + std::to_string(cfg.divisions) + "\n";
        out += "# n=" + std::to_string(p.n) + "\n";
        std::string ulist;
        for (std::size_t i = 0; i < p.u.size(); ++i) {
            if (i) ulist += ',';
            ulist += divstat::csv::format_real17(p.u[i]);
        }
        out += "# u=" + ulist + "\n";
        out += "# control=" + std::string(si_control ? "true" : "false") + "\n";
        out += divstat::serialize_curve(curve);
        write_output(si_out, out);
    });

    // plot: standalone SVG scatter.
    auto* plot = app.add_subcommand("plot", "SVG scatter plot with optional overlay");
    std::string pl_data, pl_out;
    divstat::plot_spec pl_spec;
    std::string pl_overlay;
    std::vector<double> pl_levels;
    plot->add_option("--data", pl_data, "CSV whose columns cover the chosen axes")->required();
    plot->add_option("--x", pl_spec.x_axis, "X axis")
        ->required()
        ->transform(CLI::CheckedTransformer(axis_names, CLI::ignore_case));
    plot->add_option("--y", pl_spec.y_axis, "Y axis")
        ->required()
        ->transform(CLI::CheckedTransformer(axis_names, CLI::ignore_case));
    plot->add_option("--overlay", pl_overlay,
                     "Overlay: regression_line, identity_line, or ers_contours");
    plot->add_option("--levels", pl_levels, "ERS contour levels (comma separated)")
        ->delimiter(',');
    plot->add_option("--width", pl_spec.width, "Width in pixels")->capture_default_str();
    plot->add_option("--height", pl_spec.height, "Height in pixels")->capture_default_str();
    plot->add_flag("--labels", pl_spec.point_labels, "Label points with the name column");
    plot->add_option("--out", pl_out, "Output file (default: stdout)");
    plot->callback([&] {
        if (!pl_overlay.empty()) {
            const auto it = overlay_names.find(pl_overlay);
            if (it == overlay_names.end())
                throw divstat::validation_error("plot: unknown overlay '" + pl_overlay + "'");
            pl_spec.overlay = it->second;
        }
        pl_spec.contour_levels =
            pl_levels.empty() ? std::vector<double>{-5, -10, -15, -20, -25, -30} : pl_levels;
        const divstat::csv::table t = divstat::csv::parse(read_file(pl_data));
        write_output(pl_out, divstat::render_scatter(t, pl_spec));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const divstat::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const divstat::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

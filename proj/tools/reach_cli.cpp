// Command-line driver: run one scenario, compare strategies, ingest recorded
// joint angles, calibrate lambda0 or export the default model.

#include "reach/mocap.hpp"
#include "reach/outputs.hpp"
#include "reach/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct Common {
    std::string config;
    std::string out;
    std::string preset;
    int max_iter = -1;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
    auto* opt = cmd->add_option("-c,--config", c.config, "scenario file (YAML)")->check(CLI::ExistingFile);
    if (need_config) opt->required();
    cmd->add_option("-o,--out", c.out, "output directory (overrides the scenario)");
    cmd->add_option("-p,--preset", c.preset, "active DoF set: full, all-dof or planar-6dof");
    cmd->add_option("--max-iter", c.max_iter, "optimizer iteration cap")->check(CLI::NonNegativeNumber);
    cmd->add_option("-j,--threads", c.threads, "threads for Jacobian probes")->check(CLI::PositiveNumber);
}

reach::ScenarioConfig load(const Common& c) {
    reach::ScenarioConfig cfg = reach::load_scenario(c.config);
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (!c.preset.empty()) cfg.preset = c.preset;
    if (c.max_iter >= 0) cfg.optimizer.max_iterations = c.max_iter;
    if (c.threads > 0) cfg.optimizer.threads = c.threads;
    cfg.check();
    return cfg;
}

void print_summary(const reach::SimulationResult& r) {
    const auto& s = r.summary;
    std::printf("%s  strategy=%s  termination=%s  iterations=%d  wall=%.2fs\n", r.config.name.c_str(),
                std::string(reach::to_string(r.config.strategy)).c_str(),
                std::string(reach::to_string(r.optimization.reason)).c_str(), r.optimization.iterations,
                r.optimization.wall_time);
    std::printf("  final error      %.9g m\n", s.final_error);
    std::printf("  power squared    %.9g J^2\n", s.total_power_squared);
    std::printf("  final COM sq.    %.9g m^2\n", s.final_com_squared);
    std::printf("  total energy     %.9g J\n", s.total_energy);
}

int cmd_run(const Common& c, const std::string& strategy) {
    auto cfg = load(c);
    if (!strategy.empty()) cfg.strategy = reach::parse_strategy(strategy);
    auto r = reach::run_scenario(cfg);
    reach::emit_outputs(r, cfg.output_dir);
    print_summary(r);
    std::printf("  outputs in %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_compare(const Common& c, const std::vector<std::string>& strategies, const std::vector<double>& flexions) {
    auto base = load(c);
    std::vector<reach::ScenarioConfig> targets;
    if (flexions.empty()) {
        targets.push_back(base);
    } else {
        for (double f : flexions) {
            auto t = base;
            t.target_position.reset();
            t.trunk_flexion = f;
            t.duration.reset();
            t.name = reach::target_label(f);
            targets.push_back(t);
        }
    }
    std::vector<reach::Strategy> list;
    for (const auto& s : strategies) list.push_back(reach::parse_strategy(s));
    if (list.empty()) list.assign(reach::kAllStrategies.begin(), reach::kAllStrategies.end());
    auto rep = reach::compare_strategies(targets, list);
    reach::emit_comparison(rep, base.output_dir);
    for (const auto& cell : rep.cells) {
        if (cell.ok)
            std::printf("%-8s %-12s power2=%-14.6g com2=%-14.6g energy=%-10.4g wall=%.2fs\n", cell.target.c_str(),
                        std::string(reach::to_string(cell.strategy)).c_str(), cell.summary.total_power_squared,
                        cell.summary.final_com_squared, cell.summary.total_energy, cell.wall_time);
        else
            std::printf("%-8s %-12s FAILED: %s\n", cell.target.c_str(),
                        std::string(reach::to_string(cell.strategy)).c_str(), cell.note.c_str());
    }
    std::printf("reports in %s\n", base.output_dir.c_str());
    return 0;
}

int cmd_calibrate(const Common& c) {
    auto cfg = load(c);
    auto ps = reach::prepare(cfg);
    auto cal = reach::calibrate(cfg, ps, true);
    reach::ensure_dir(cfg.output_dir);
    reach::CsvWriter w(std::filesystem::path(cfg.output_dir) / "calibration.csv");
    w.cell("key").cell("value").end();
    w.cell("primary_power_integral_J2").cell(cal.primary_power).end();
    w.cell("primary_com_integral_m2s").cell(cal.primary_com).end();
    w.cell("lambda0_power").cell(cal.lambda0_power).end();
    w.cell("lambda0_com").cell(cal.lambda0_com).end();
    w.close();
    std::printf("lambda0_power %.9g%s\nlambda0_com   %.9g%s\n", cal.lambda0_power,
                cal.power_failed ? " (calibration failed, fallback)" : "", cal.lambda0_com,
                cal.com_failed ? " (calibration failed, fallback)" : "");
    return 0;
}

int cmd_ingest(const Common& c, const std::string& file, int window, int order) {
    reach::ModelSource src;
    std::string out = c.out.empty() ? "out" : c.out;
    if (!c.config.empty()) {
        auto cfg = load(c);
        src = cfg.model;
        if (c.out.empty()) out = cfg.output_dir;
    }
    reach::Skeleton sk(reach::build_model(src));
    auto series = reach::load_mocap(file);
    reach::IngestOptions opt;
    opt.window = window;
    opt.order = order;
    auto r = reach::ingest(sk, series, opt);
    reach::ensure_dir(out);
    reach::write_timeseries(std::filesystem::path(out) / "timeseries.csv", sk.model(), r.trajectory, r.dynamics);
    std::printf("%zu samples at %.6g Hz\n", series.samples(), series.rate());
    std::printf("  power squared    %.9g J^2\n", r.dynamics.total_power_squared);
    std::printf("  final COM sq.    %.9g m^2\n", r.dynamics.final_com_squared);
    std::printf("  total energy     %.9g J\n", r.dynamics.total_energy);
    std::printf("  outputs in %s\n", out.c_str());
    return 0;
}

int cmd_export(const std::string& path) {
    reach::save_model(reach::default_model(), path);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whole-body reaching movement synthesis"};
    app.require_subcommand(1);

    Common run_c, cmp_c, cal_c, ing_c;
    std::string strategy;
    auto* run = app.add_subcommand("run", "optimise one scenario and write its outputs");
    add_common(run, run_c, true);
    run->add_option("-s,--strategy", strategy, "override the scenario strategy");

    std::vector<std::string> strategies;
    std::vector<double> flexions;
    auto* cmp = app.add_subcommand("compare", "run a strategy x target grid");
    add_common(cmp, cmp_c, true);
    cmp->add_option("--strategies", strategies, "subset of minError minPower minCOM minPowerCOM")->delimiter(',');
    cmp->add_option("--targets", flexions, "trunk flexion angles (deg) placing the targets")->delimiter(',');

    auto* cal = app.add_subcommand("calibrate", "compute lambda0 from a min-error run");
    add_common(cal, cal_c, true);

    std::string mocap_file;
    int window = 61, order = 4;
    auto* ing = app.add_subcommand("ingest", "smooth recorded joint angles and run inverse dynamics");
    add_common(ing, ing_c, false);
    ing->add_option("file", mocap_file, "joint-angle CSV")->required()->check(CLI::ExistingFile);
    ing->add_option("--window", window, "Savitzky-Golay window (odd)");
    ing->add_option("--order", order, "Savitzky-Golay polynomial order");

    std::string export_path;
    auto* exp = app.add_subcommand("export-model", "write the built-in body model as YAML");
    exp->add_option("path", export_path, "output file")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_c, strategy);
        if (*cmp) return cmd_compare(cmp_c, strategies, flexions);
        if (*cal) return cmd_calibrate(cal_c);
        if (*ing) return cmd_ingest(ing_c, mocap_file, window, order);
        if (*exp) return cmd_export(export_path);
    } catch (const reach::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const reach::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

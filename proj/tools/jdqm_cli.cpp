// Command line front end: convergence studies, cost studies, registry
// listing and report plotting for the adaptive jump-diffusion schemes.

#include <CLI11.hpp>

#include "jdqm/errors.hpp"
#include "jdqm/experiment.hpp"
#include "jdqm/model.hpp"
#include "jdqm/report_io.hpp"
#include "jdqm/schemes.hpp"
#include "jdqm/transform.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitExperiment = 3;

void print_summary(const jdqm::ConvergenceReport& report, const jdqm::ExperimentConfig& cfg) {
    std::printf("problem=%s samples=%d seed=%llu nu_fraction=%g R=%d\n", cfg.problem.c_str(),
                cfg.samples, static_cast<unsigned long long>(cfg.seed), cfg.nu_fraction,
                cfg.reference_refinement);
    std::printf("%-22s %4s %12s %12s %22s %22s\n", "scheme", "p", "rate(cost)", "rate(delta)",
                "rate(cost) 95% CI", "rate(delta) 95% CI");
    for (const auto& s : report.slopes) {
        std::printf("%-22s %4g %12.4f %12.4f      [%7.4f, %7.4f]      [%7.4f, %7.4f]\n",
                    s.scheme.c_str(), s.p, s.vs_cost, s.vs_delta, s.vs_cost_lo, s.vs_cost_hi,
                    s.vs_delta_lo, s.vs_delta_hi);
    }
}

int run_study(const std::string& config_path, const std::string& dump_dir, int dump_sample) {
    jdqm::ExperimentConfig cfg = jdqm::parse_config_file(config_path);
    cfg.validate();
    const jdqm::ConvergenceReport report = jdqm::run_convergence_study(cfg);
    print_summary(report, cfg);
    if (!cfg.output_csv.empty()) {
        jdqm::emit_report(report, jdqm::ReportFormat::csv, cfg.output_csv);
        std::printf("wrote %s\n", cfg.output_csv.c_str());
    }
    if (!cfg.output_svg.empty()) {
        jdqm::emit_report(report, jdqm::ReportFormat::svg_plot, cfg.output_svg);
        std::printf("wrote %s\n", cfg.output_svg.c_str());
    }
    if (dump_sample >= 0) {
        // Debug dump: one trajectory table per (scheme, delta) for the
        // requested sample index.
        namespace fs = std::filesystem;
        fs::create_directories(dump_dir);
        const jdqm::SdeProblem problem = cfg.resolve_problem();
        const jdqm::Transform g = jdqm::build_transform(problem, cfg.nu_fraction);
        const jdqm::CoefficientSet tco = jdqm::transform_coefficients(problem, g);
        const double eps0 =
            cfg.eps0 > 0.0 ? cfg.eps0 : jdqm::default_eps0(problem.coefficients.theta);
        for (jdqm::SchemeKind kind : cfg.schemes) {
            for (double delta : cfg.deltas) {
                jdqm::NoisePath path(cfg.seed, static_cast<std::uint64_t>(dump_sample),
                                     problem.lambda, problem.horizon);
                jdqm::SchemeConfig sc{kind, delta, std::nullopt};
                if (kind == jdqm::SchemeKind::doubly_adaptive_qm)
                    sc.policy.emplace(problem.coefficients.theta, eps0, delta);
                jdqm::Trajectory traj =
                    kind == jdqm::SchemeKind::jump_adapted_em
                        ? jdqm::simulate(problem.coefficients, problem.xi, problem.horizon, sc,
                                         path)
                        : jdqm::simulate_transformed(problem, g, tco, sc, path).trajectory;
                std::ostringstream name;
                name << dump_dir << "/sample" << dump_sample << '_' << jdqm::to_string(kind)
                     << "_delta" << delta << ".txt";
                std::ofstream out(name.str());
                jdqm::write_trajectory_table(traj, out);
            }
        }
        std::printf("wrote trajectory dumps to %s\n", dump_dir.c_str());
    }
    return kExitOk;
}

int run_cost(const std::string& config_path) {
    jdqm::ExperimentConfig cfg = jdqm::parse_config_file(config_path);
    cfg.validate();
    const auto rows = jdqm::run_cost_study(cfg);
    std::printf("%14s %16s %20s\n", "delta", "mean_cost", "cost/(1/delta+lT)");
    for (const auto& r : rows)
        std::printf("%14.8g %16.4f %20.6f\n", r.delta, r.mean_cost, r.normalized_cost);
    if (!cfg.output_csv.empty()) {
        std::ofstream out(cfg.output_csv);
        if (!out) throw jdqm::ConfigError("cannot open output path '" + cfg.output_csv + "'");
        jdqm::write_cost_csv(rows, out);
        std::printf("wrote %s\n", cfg.output_csv.c_str());
    }
    return kExitOk;
}

int run_list_models() {
    for (const auto& name : jdqm::builtin_problem_names()) {
        const jdqm::SdeProblem p = jdqm::builtin_problem(name);
        std::printf("%-20s m=%zu xi=%g T=%g lambda=%g%s\n", name.c_str(),
                    p.coefficients.discontinuity_count(), p.xi, p.horizon, p.lambda,
                    p.has_reference_solution() ? " (closed-form reference)" : "");
    }
    return kExitOk;
}

int run_plot(const std::string& input, const std::string& output) {
    std::ifstream in(input);
    if (!in) throw jdqm::ConfigError("cannot open input csv '" + input + "'");
    const jdqm::ConvergenceReport report = jdqm::parse_report_csv(in);
    std::ofstream out(output);
    if (!out) throw jdqm::ConfigError("cannot open output path '" + output + "'");
    jdqm::write_svg_plot(report, out);
    std::printf("wrote %s\n", output.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive quasi-Milstein schemes for jump-diffusion SDEs"};
    app.require_subcommand(1);

    std::string config_path, plot_input, plot_output;
    std::string dump_dir = "trajectories";
    int dump_sample = -1;

    auto* cmd_run = app.add_subcommand("run", "run a convergence study from a config file");
    cmd_run->add_option("--config", config_path, "key=value config file")->required();
    cmd_run->add_option("--dump-sample", dump_sample,
                        "also dump the trajectories of this sample index");
    cmd_run->add_option("--dump-dir", dump_dir, "directory for trajectory dumps");

    auto* cmd_cost = app.add_subcommand("cost", "run a cost-scaling study from a config file");
    cmd_cost->add_option("--config", config_path, "key=value config file")->required();

    auto* cmd_list = app.add_subcommand("list-models", "list built-in problems");

    auto* cmd_plot = app.add_subcommand("plot", "render a report csv as an svg figure");
    cmd_plot->add_option("--input", plot_input, "report csv")->required();
    cmd_plot->add_option("--output", plot_output, "svg path")->required();

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(cmd_run)) return run_study(config_path, dump_dir, dump_sample);
        if (app.got_subcommand(cmd_cost)) return run_cost(config_path);
        if (app.got_subcommand(cmd_list)) return run_list_models();
        if (app.got_subcommand(cmd_plot)) return run_plot(plot_input, plot_output);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const jdqm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "experiment error: %s\n", e.what());
        return kExitExperiment;
    }
    return kExitOk;
}

#include <CLI11.hpp>
#include <iostream>

#include "secbench/report.hpp"

namespace {

secbench::RunConfig load_config_or_die(const std::string& config_path,
                                       const std::string& out_override) {
    secbench::RunConfig config = secbench::load_run_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "secbench: prompting-strategy security benchmark "
        "(generate / analyze / report / validate)"};
    app.set_version_flag("--version", std::string(secbench::kToolVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    app.add_option("-c,--config", config_path, "run configuration (JSON)")
        ->required();
    app.add_option("-o,--out", out_override,
                   "override the configured output directory");

    bool resume = false;
    std::size_t limit = 0;
    CLI::App* generate =
        app.add_subcommand("generate", "run the generation matrix");
    generate->add_flag("--resume", resume,
                       "continue an interrupted run in the same directory");
    generate->add_option("--limit", limit,
                         "stop after this many attempted cells (0 = no limit)");

    std::string mode_override;
    CLI::App* analyze =
        app.add_subcommand("analyze", "scan or ingest findings for a run");
    analyze->add_option("--mode", mode_override,
                        "override the analysis mode (builtin|ingest)")
        ->check(CLI::IsMember({"builtin", "ingest"}));

    double epsilon_override = -1.0;
    int top_n_override = 0;
    CLI::App* report =
        app.add_subcommand("report", "write the report bundle for a run");
    report->add_option("--epsilon", epsilon_override,
                       "JSD smoothing constant override");
    report->add_option("--top-n", top_n_override,
                       "top-CWE table depth override");

    app.add_subcommand("validate", "check config, corpus, and templates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the usage error
        return code == 0 ? 0 : 2;      // 0 covers --help / --version
    }

    try {
        secbench::RunConfig config =
            load_config_or_die(config_path, out_override);
        if (generate->parsed())
            return secbench::cmd_generate(config, resume, limit);
        if (analyze->parsed()) {
            if (mode_override == "builtin")
                config.analysis_mode = secbench::AnalysisMode::Builtin;
            else if (mode_override == "ingest")
                config.analysis_mode = secbench::AnalysisMode::Ingest;
            if (config.analysis_mode == secbench::AnalysisMode::Ingest &&
                config.report_path.empty()) {
                std::cerr << "error: ingest mode needs analysis.report in the "
                             "config\n";
                return 2;
            }
            return secbench::cmd_analyze(config);
        }
        if (report->parsed()) {
            if (epsilon_override > 0.0) config.epsilon = epsilon_override;
            if (top_n_override > 0) config.top_n = top_n_override;
            return secbench::cmd_report(config);
        }
        return secbench::cmd_validate(config);
    } catch (const secbench::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

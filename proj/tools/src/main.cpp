#include "commands.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    using namespace tieline::cli;

    CLI::App app{"Tie-line power smoothing with market-coordinated air conditioners"};
    app.require_subcommand(1);

    GenScenarioOptions gen;
    auto* gen_cmd = app.add_subcommand("gen-scenario", "write a default scenario and synthetic traces");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--days", gen.days, "days of traces")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n-acl", gen.n_acl, "number of air conditioners")->check(CLI::PositiveNumber);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "fit the baseline model on free-running training days");
    train_cmd->add_option("--scenario", train.scenario, "scenario file")->required();
    train_cmd->add_option("--out", train.out, "model file (default: baseline_model.txt next to the scenario)");
    train_cmd->add_option("--seed", train.seed, "override the scenario seed");

    RunOptionsCli run;
    auto* run_cmd = app.add_subcommand("run", "simulate a controlled or uncontrolled day");
    run_cmd->add_option("--scenario", run.scenario, "scenario file")->required();
    run_cmd->add_option("--model", run.model, "baseline model file (not needed with --uncontrolled)");
    run_cmd->add_option("--out", run.out_dir, "run directory")->required();
    run_cmd->add_option("--seed", run.seed, "override the scenario seed");
    run_cmd->add_option("--baseline-bias", run.baseline_bias, "relative error injected into the baseline");
    run_cmd->add_option("--workers", run.workers, "threads for house stepping")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--no-soa-feedback", run.no_soa_feedback, "disable the SOA baseline correction");
    run_cmd->add_flag("--uncontrolled", run.uncontrolled, "thermostat-only reference run");
    run_cmd->add_flag("--audit-bids", run.audit_bids, "also write every bid batch and clearing outcome");

    MetricsOptions metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "compare a controlled run with its uncontrolled reference");
    metrics_cmd->add_option("controlled", metrics.controlled_dir, "controlled run directory")->required();
    metrics_cmd->add_option("uncontrolled", metrics.uncontrolled_dir, "uncontrolled run directory")->required();
    metrics_cmd->add_option("--out", metrics.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*gen_cmd) return cmd_gen_scenario(gen);
    if (*train_cmd) return cmd_train(train);
    if (*run_cmd) {
        if (!run.uncontrolled && run.model.empty()) {
            std::cerr << "run: --model is required unless --uncontrolled is given\n";
            return kUsage;
        }
        return cmd_run(run);
    }
    return cmd_metrics(metrics);
}

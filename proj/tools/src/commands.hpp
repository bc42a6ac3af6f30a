#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace tieline::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,        // invalid configuration or arguments
    kIoError = 2,
    kFitFailure = 3,
    kNumericAbort = 4,
    kIncomparable = 5,
};

struct GenScenarioOptions {
    std::string out_dir;
    std::uint64_t seed = 1;
    std::size_t days = 1;
    std::optional<std::size_t> n_acl;
};

struct TrainOptions {
    std::string scenario;
    std::string out;  // model file; defaults next to the scenario
    std::optional<std::uint64_t> seed;
};

struct RunOptionsCli {
    std::string scenario;
    std::string model;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> baseline_bias;
    std::optional<std::size_t> workers;
    bool no_soa_feedback = false;
    bool uncontrolled = false;
    bool audit_bids = false;
};

struct MetricsOptions {
    std::string controlled_dir;
    std::string uncontrolled_dir;
    std::string out_dir;
};

// Each command reports problems on stderr and returns an ExitCode.
int cmd_gen_scenario(const GenScenarioOptions& o);
int cmd_train(const TrainOptions& o);
int cmd_run(const RunOptionsCli& o);
int cmd_metrics(const MetricsOptions& o);

} // namespace tieline::cli

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vpc/ensemble.hpp"
#include "vpc/oracle.hpp"
#include "vpc/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPhysicsFail = 1;
constexpr int kExitConfigError = 2;

void print_summary(const vpc::EnsembleResult& r) {
    std::printf("runs            %zu\n", r.runs.size());
    std::printf("collapsed       %zu (rate %.4f)\n", r.collapsed_count, r.collapse_rate);
    std::printf("born chi2       %.4f (dof %zu)\n", r.born_test.statistic, r.born_test.dof);
    std::printf("born p-value    %.6g%s\n", r.born_test.p_value,
                r.born_test.degenerate ? " (degenerate expected distribution)" : "");
    if (r.failed_runs > 0) {
        std::fprintf(stderr, "warning: %zu run(s) aborted internally (first: %s)\n",
                     r.failed_runs, r.first_error.c_str());
    }
}

int run_simulate(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 double epsilon, bool epsilon_set, long long size, bool size_set,
                 const std::string& output, bool output_set) {
    vpc::RunConfig config = vpc::RunConfig::from_file(config_path);
    if (seed_set) config.base_seed = seed;
    if (epsilon_set) {
        config.params.epsilon = epsilon;
        config.params.validate();
    }
    if (size_set) {
        if (size < 1) throw vpc::ConfigError("--ensemble-size must be at least 1");
        config.ensemble_size = static_cast<std::size_t>(size);
    }
    if (output_set) config.output_dir = output;

    vpc::EnsembleResult result = vpc::run_ensemble(config);
    vpc::write_results(result, config, config.output_dir);
    print_summary(result);
    std::printf("results written to %s\n", config.output_dir.c_str());

    if (config.optimizer.mode == vpc::DescentMode::BornConditioned &&
        !result.born_test.degenerate && result.born_test.p_value < config.born_p_threshold) {
        std::fprintf(stderr, "born test failed: p = %g < %g\n", result.born_test.p_value,
                     config.born_p_threshold);
        return kExitPhysicsFail;
    }
    return kExitOk;
}

int run_delayed(const std::string& original_path, const std::string& delayed_path,
                double significance, const std::string& output, bool output_set) {
    vpc::RunConfig original = vpc::RunConfig::from_file(original_path);
    vpc::RunConfig delayed = vpc::RunConfig::from_file(delayed_path);
    vpc::DelayedComparison cmp = vpc::compare_delayed_choice(original, delayed, significance);

    std::printf("original ensemble:\n");
    print_summary(cmp.original);
    std::printf("delayed ensemble:\n");
    print_summary(cmp.delayed);
    std::printf("two-sample chi2 %.4f (dof %zu), p = %.6g\n", cmp.two_sample.statistic,
                cmp.two_sample.dof, cmp.two_sample.p_value);
    std::printf("%s at significance %g\n", cmp.pass ? "PASS" : "FAIL", significance);

    if (output_set) {
        vpc::write_results(cmp.original, original, output + "/original");
        vpc::write_results(cmp.delayed, delayed, output + "/delayed");
    }
    return cmp.pass ? kExitOk : kExitPhysicsFail;
}

int run_oracle(double budget, const std::string& output) {
    vpc::oracle::QuadratureSettings settings;
    if (budget > 0.0) settings.node_budget = budget;
    vpc::oracle::OracleReport report = vpc::oracle::run_oracle_suite(settings);
    for (const auto& c : report.checks) {
        std::printf("[%s] %-28s value %.6g  ref %.6g  rel %.3g%s\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.reference, c.rel_dev,
                    c.informational ? "  (informational)" : "");
    }
    if (!output.empty()) {
        std::ofstream out(output);
        if (!out) throw vpc::IOError("cannot write oracle report: " + output);
        out << report.to_json();
        std::printf("report written to %s\n", output.c_str());
    }
    return report.all_pass ? kExitOk : kExitPhysicsFail;
}

int run_validate() {
    auto checks = vpc::validation::run_functional_checks();
    bool all = true;
    for (const auto& c : checks) {
        std::printf("[%s] %-28s measured %.3g  limit %.3g  (%s)\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.measured, c.limit, c.detail.c_str());
        all = all && c.pass;
    }
    return all ? kExitOk : kExitPhysicsFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational collapse simulator for the electron two-slit experiment"};
    app.require_subcommand(1);

    std::string config_path, delayed_path, output;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    long long size = 0;
    double significance = 0.01;
    double budget = 0.0;
    std::string oracle_out = "oracle_report.json";

    auto* sim = app.add_subcommand("simulate", "run one ensemble from a config file");
    sim->add_option("config", config_path, "JSON run configuration")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "override ensemble.base_seed");
    auto* eps_opt = sim->add_option("--epsilon", epsilon, "override params.epsilon");
    auto* size_opt = sim->add_option("--ensemble-size", size, "override ensemble.size");
    auto* out_opt = sim->add_option("--output", output, "override output.dir");

    auto* del = app.add_subcommand("delayed", "compare original vs delayed-choice ensembles");
    del->add_option("original", config_path, "original run configuration")->required();
    del->add_option("delayed", delayed_path, "delayed-choice run configuration")->required();
    del->add_option("--significance", significance, "two-sample test significance");
    auto* del_out = del->add_option("--output", output, "write both ensembles under this dir");

    auto* orc = app.add_subcommand("oracle", "run the quadrature factorization suite");
    orc->add_option("--budget", budget, "node budget for the direct quadratures");
    orc->add_option("--output", oracle_out, "oracle report JSON path");

    app.add_subcommand("validate", "run the functional invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        if (sim->parsed()) {
            return run_simulate(config_path, seed, !seed_opt->empty(), epsilon,
                                !eps_opt->empty(), size, !size_opt->empty(), output,
                                !out_opt->empty());
        }
        if (del->parsed()) {
            return run_delayed(config_path, delayed_path, significance, output,
                               !del_out->empty());
        }
        if (orc->parsed()) {
            return run_oracle(budget, oracle_out);
        }
        return run_validate();
    } catch (const vpc::ResourceError& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return kExitConfigError;
    } catch (const vpc::ConfigMismatch& e) {
        std::fprintf(stderr, "config mismatch: %s\n", e.what());
        return kExitConfigError;
    } catch (const vpc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const vpc::IOError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigError;
    }
}

// Command-line entry point; subcommands live in cli.cpp.

#include "gqslab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

void add_run_flags(CLI::App& cmd, std::optional<std::uint64_t>& seed, std::optional<std::string>& mode,
                   gqslab::RunOverrides& o)
{
    cmd.add_option("--seed", seed, "Base seed (default: GQSLAB_SEED, then the scenario)");
    cmd.add_option("--mode", mode, "Timing model")->check(CLI::IsMember({"async", "psync"}));
    cmd.add_option("--gst", o.gst, "Global stabilization time")->check(CLI::NonNegativeNumber);
    cmd.add_option("--delta", o.delta, "Post-GST delay bound")->check(CLI::PositiveNumber);
    cmd.add_option("--max-events", o.max_events, "Event budget per run")->check(CLI::PositiveNumber);
}

void finish_overrides(gqslab::RunOverrides& o, std::optional<std::uint64_t> seed,
                      const std::optional<std::string>& mode)
{
    o.seed = gqslab::resolve_seed(seed);
    if (mode)
        o.mode = gqslab::parse_timing_mode(*mode);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generalized quorum systems: analysis, simulation and checking"};
    app.require_subcommand(1);

    std::string scenario;
    std::string trace;
    bool json = false;

    auto* check = app.add_subcommand("check", "Validate the scenario's quorums or search for a GQS");
    check->add_option("scenario", scenario, "Scenario file")->required();
    check->add_flag("--json", json, "Machine-readable report");

    gqslab::SimulateOptions sim;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::string> sim_mode;
    auto* simulate = app.add_subcommand("simulate", "Run the scenario and check the trace");
    simulate->add_option("scenario", scenario, "Scenario file")->required();
    add_run_flags(*simulate, sim_seed, sim_mode, sim.overrides);
    simulate->add_option("--out", sim.out, "Trace output path, '-' for none")->capture_default_str();
    simulate->add_flag("--fuzz", sim.fuzz, "Draw the run like fuzz does from --seed");
    simulate->add_flag("--json", sim.json, "Machine-readable report");

    gqslab::FuzzOptions fz;
    std::optional<std::uint64_t> fz_seed;
    std::optional<std::string> fz_mode;
    auto* fuzz = app.add_subcommand("fuzz", "Many randomized runs with derived seeds");
    fuzz->add_option("scenario", scenario, "Scenario file")->required();
    add_run_flags(*fuzz, fz_seed, fz_mode, fz.overrides);
    fuzz->add_option("--runs", fz.runs, "Number of runs")->capture_default_str()->check(CLI::PositiveNumber);
    fuzz->add_option("--jobs", fz.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    fuzz->add_option("--out", fz.out, "Directory for traces of failing runs");

    auto* verify = app.add_subcommand("verify", "Check a stored trace against a scenario");
    verify->add_option("trace", trace, "Trace file (JSON lines)")->required();
    verify->add_option("scenario", scenario, "Scenario file")->required();
    verify->add_flag("--json", json, "Machine-readable report");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : gqslab::exit_code::usage;
    }

    const gqslab::CliStreams io{std::cout, std::cerr};
    try
    {
        if (check->parsed())
            return gqslab::cmd_check(scenario, json, io);
        if (simulate->parsed())
        {
            finish_overrides(sim.overrides, sim_seed, sim_mode);
            return gqslab::cmd_simulate(scenario, sim, io);
        }
        if (fuzz->parsed())
        {
            finish_overrides(fz.overrides, fz_seed, fz_mode);
            return gqslab::cmd_fuzz(scenario, fz, io);
        }
        if (verify->parsed())
            return gqslab::cmd_verify(trace, scenario, json, io);
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return gqslab::exit_code::usage;
    }
    catch (const std::exception& e)
    {
        std::cerr << "internal error: " << e.what() << '\n';
        return gqslab::exit_code::failed;
    }
    return gqslab::exit_code::usage;
}

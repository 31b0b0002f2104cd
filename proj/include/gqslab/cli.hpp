#pragma once

// Command implementations behind the gqslab executable. Each returns the
// process exit code and writes only to the given streams.

#include "gqslab/runner.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace gqslab
{

namespace exit_code
{
inline constexpr int ok = 0;
/// check: not a GQS; simulate/verify/fuzz: some check failed.
inline constexpr int failed = 1;
/// Bad arguments, unreadable or malformed input.
inline constexpr int usage = 2;
/// simulate/verify: nothing failed but some verdict is inconclusive.
inline constexpr int inconclusive = 3;
} // namespace exit_code

struct CliStreams
{
    std::ostream& out;
    std::ostream& err;
};

/// --seed if given, else GQSLAB_SEED if set, else nullopt. Throws
/// std::invalid_argument for a malformed environment value.
std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag);

int cmd_check(const std::string& scenario_path, bool json, CliStreams io);

struct SimulateOptions
{
    RunOverrides overrides;
    /// Trace destination; "-" writes nothing.
    std::string out = "trace.jsonl";
    /// Treat the seed as a fuzz run seed (reproduces a fuzz failure).
    bool fuzz = false;
    bool json = false;
};

int cmd_simulate(const std::string& scenario_path, const SimulateOptions& options, CliStreams io);

struct FuzzOptions
{
    RunOverrides overrides;
    std::uint64_t runs = 100;
    std::size_t jobs = 1;
    /// Directory for traces of failing runs; empty keeps none.
    std::string out;
};

int cmd_fuzz(const std::string& scenario_path, const FuzzOptions& options, CliStreams io);

int cmd_verify(const std::string& trace_path, const std::string& scenario_path, bool json, CliStreams io);

} // namespace gqslab

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "follmer/convergence.hpp"
#include "follmer/partitions.hpp"
#include "follmer/paths.hpp"
#include "follmer/spaces.hpp"

namespace follmer {

using json = nlohmann::json;

/// SplitMix64: state += 0x9E3779B97F4A7C15, then the output mix with
/// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();

private:
    std::uint64_t state_;
};

/// N increments of +-sqrt(T/N) at k T/N, k = 1..N, signs from the top bit of
/// successive SplitMix64 outputs. Every increment is a jump; extra jumps in
/// `inject` are added to the walk (merged when they share a time).
CadlagPath scaled_walk(std::size_t steps, double horizon, std::uint64_t seed, const std::vector<Jump>& inject = {});

NormedSpace space_from_json(const json& j);
json space_to_json(const NormedSpace& s);

json vector_to_json(const Vector& v);

/// Path specs: scaled_walk, pure_jump, smooth, constant, explicit, sum, pair.
CadlagPath build_path(const json& spec, std::uint64_t seed);
/// Explicit form {space, horizon, skeleton, interpolation: "linear", jumps}.
json path_to_json(const CadlagPath& x);

/// {kind: uniform | dyadic | integer | oscillation | custom, ...}; the
/// oscillation-controlled kind needs the path it is built from.
PartitionSequence build_partition(const json& spec, double horizon, const CadlagPath* x = nullptr);

/// {kind: inner | outer | tensor | evaluation, ...}.
BilinearMap build_bilinear(const json& spec, const NormedSpace& left, const NormedSpace& right);

StallRule rule_from_json(const json& j);

enum class Command { QV, TwoVar, Integrate, ItoCheck, IbpCheck, PartitionDiag, WeightedQVCheck };

Command parse_command(const std::string& name);
const char* to_string(Command c);
std::vector<std::string> command_names();

struct RunOptions {
    std::optional<int> n_max;
    std::optional<std::uint64_t> seed;
};

struct ScenarioOutput {
    std::string id;
    std::string csv;
    json report;
    bool pass = false;
};

/// Runs one scenario document. Throws ContractError (or a JSON error) on
/// invalid input.
ScenarioOutput run_scenario(Command command, const json& config, const RunOptions& opts = {});

/// Writes <out>/<id>/trace.csv and <out>/<id>/report.json.
void write_outputs(const std::filesystem::path& out, const ScenarioOutput& result);

struct BatchOutcome {
    std::vector<ScenarioOutput> outputs;
    std::vector<std::string> errors;  // one per failed scenario, "<id>: <message>"
    int exit_code;                    // 1 on any input error, else 2 on any failing verdict, else 0
};

/// A single scenario document or {"scenarios": [...]}; scenarios run in
/// parallel and each writes its own directory.
BatchOutcome run_batch(Command command, const json& config, const std::filesystem::path& out,
                       const RunOptions& opts = {});

/// Shortest round-trip formatting used in CSV output.
std::string format_double(double v);

}  // namespace follmer

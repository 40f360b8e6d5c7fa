#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "follmer/error.hpp"
#include "follmer/scenario.hpp"

namespace {

constexpr int kInputError = 1;

int run(const std::string& name, const std::string& config_path, const std::string& out,
        const follmer::RunOptions& opts) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config '" << config_path << "'\n";
        return kInputError;
    }
    follmer::json config;
    try {
        config = follmer::json::parse(in);
    } catch (const follmer::json::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << '\n';
        return kInputError;
    }
    try {
        const auto outcome = follmer::run_batch(follmer::parse_command(name), config, out, opts);
        for (const auto& o : outcome.outputs) std::cout << o.id << ": " << (o.pass ? "pass" : "fail") << '\n';
        for (const auto& e : outcome.errors) std::cerr << "error: " << e << '\n';
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise quadratic variation and Ito-Follmer checks on deterministic paths"};
    app.require_subcommand(1);

    std::string config, out = "out";
    std::optional<int> n_max;
    std::optional<std::uint64_t> seed;
    for (const auto& name : follmer::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "scenario JSON (one scenario or {\"scenarios\": [...]})")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--nmax", n_max, "largest partition level");
        sub->add_option("--seed", seed, "seed for walk fixtures");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }
    if (n_max && *n_max < 0) {
        std::cerr << "error: --nmax must be non-negative\n";
        return kInputError;
    }
    return run(app.get_subcommands().front()->get_name(), config, out, follmer::RunOptions{n_max, seed});
}

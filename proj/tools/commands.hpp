#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include <CLI11.hpp>

namespace ctsum::cli {

/// A registered subcommand: `run` does the work once flags are parsed and
/// returns where the effective configuration of the run belongs.
struct Command {
  CLI::App* app = nullptr;
  std::function<std::filesystem::path()> run;
};

std::vector<Command> register_commands(CLI::App& app);

}  // namespace ctsum::cli

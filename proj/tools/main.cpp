#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "ctsum/error.hpp"

namespace {

// An effective-config file names its subcommand in every key ("score.seed=0").
// CLI11 fills subcommand options from such keys but does not select the
// subcommand itself, so `ctsum --config FILE [flags]` gets it inserted after
// the config option, where any remaining flags then override the file.
std::vector<std::string> with_subcommand_from_config(
    std::vector<std::string> args, const std::vector<ctsum::cli::Command>& commands) {
  std::string config;
  std::vector<std::string> head;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const auto& cmd : commands) {
      if (args[i] == cmd.app->get_name()) return args;
    }
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      head.insert(head.end(), {args[i], args[i + 1]});
      ++i;
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      head.push_back(args[i]);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty()) return args;
  std::ifstream in(config);
  for (std::string line; std::getline(in, line);) {
    const auto dot = line.find('.');
    if (line.empty() || line[0] == '#' || dot == std::string::npos) continue;
    head.push_back(line.substr(0, dot));
    head.insert(head.end(), rest.begin(), rest.end());
    return head;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive frame importance and video summarization from frame features",
               "ctsum"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "Rerun from an effective-config file written by a previous run");
  const auto commands = ctsum::cli::register_commands(app);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = with_subcommand_from_config(std::move(args), commands);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << "a subcommand is required\n";
    return 1;
  }

  try {
    for (const auto& cmd : commands) {
      if (!cmd.app->parsed()) continue;
      const std::filesystem::path config_path = cmd.run();
      std::ofstream out(config_path, std::ios::binary | std::ios::trunc);
      if (!out) throw ctsum::IoError("cannot write " + config_path.string());
      // dotted keys select the subcommand when the file is read back
      std::istringstream lines(cmd.app->config_to_str(true, false));
      for (std::string line; std::getline(lines, line);) {
        if (!line.empty()) out << cmd.app->get_name() << '.' << line << '\n';
      }
    }
  } catch (const ctsum::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

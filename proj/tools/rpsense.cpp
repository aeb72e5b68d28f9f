/* Copyright 2026 The rpsense Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <rpsense/rpsense.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

// Anything CLI11 did not recognise is a per-key override: `--key value` or
// `--key=value`, with keys spelled exactly as in the config file.
rpsense::ConfigEntries parse_overrides(const std::vector<std::string>& extras) {
  rpsense::ConfigEntries out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw rpsense::ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.erase(eq);
    } else {
      if (i + 1 >= extras.size()) throw rpsense::ConfigError("flag '" + a + "' needs a value");
      value = extras[++i];
    }
    if (out.count(key) != 0) throw rpsense::ConfigError("flag '--" + key + "' given twice");
    out[key] = {value, "--" + key};
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-radical collisional magnetic sensor simulator"};
  app.set_version_flag("--version", rpsense::kVersion);
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string seed;
    std::string threads;
    std::string out;
  };
  std::map<std::string, Common> common;
  for (const auto& name : rpsense::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->allow_extras();
    Common& c = common[name];
    sub->add_option("--config", c.config, "key = value configuration file");
    sub->add_option("--seed", c.seed, "base seed");
    sub->add_option("--threads", c.threads, "worker threads");
    sub->add_option("--out", c.out, "output directory");
  }
  app.footer("Any config key can be overridden as --key value, e.g. --params.k 0.03 or --grid.n_theta 8.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : rpsense::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const Common& c = common[name];
  rpsense::RunConfig cfg;
  try {
    rpsense::ConfigEntries file;
    if (!c.config.empty()) file = rpsense::read_config_file(c.config);
    rpsense::ConfigEntries over = parse_overrides(sub->remaining());
    auto flag = [&over](const std::string& key, const std::string& value, const char* spelled) {
      if (value.empty()) return;
      if (over.count(key) != 0) throw rpsense::ConfigError(std::string("both ") + spelled + " and --" + key + " given");
      over[key] = {value, spelled};
    };
    flag("seed", c.seed, "--seed");
    flag("threads", c.threads, "--threads");
    flag("output.dir", c.out, "--out");
    cfg = rpsense::build_config(file, over);
  } catch (const rpsense::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rpsense::kExitConfig;
  }

  const rpsense::CommandOutcome res = rpsense::run_command(name, cfg, std::cout);
  for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
  return res.exit_code;
}

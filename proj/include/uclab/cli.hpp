#pragma once

#include <string>
#include <vector>

namespace uclab {

// Exit codes: 0 ok, 1 domain failure, 2 input/parse failure.

int cmd_train(const std::string& config_path,
              const std::vector<std::pair<std::string, std::string>>& overrides);

int cmd_validate(const std::string& log_path, int budget);

int cmd_score(const std::string& log_path, const std::string& params_path,
              const std::string& calibrator_path,  // empty = none
              const std::string& out_path);        // empty = stdout

int cmd_report(const std::string& run_dir);

int cmd_dump_world(const std::string& config_path);  // empty = defaults

/// Full argv-level entry point used by the binary and by tests.
int run_cli(const std::vector<std::string>& args);

}  // namespace uclab

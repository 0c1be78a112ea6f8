#pragma once

namespace dyadrisk {

// Full command-line interface. Returns the process exit code: 0 on success,
// 1 on any pipeline or validation error, 2 on unknown command/flag (after
// printing usage).
int run_cli(int argc, const char* const* argv);

}  // namespace dyadrisk

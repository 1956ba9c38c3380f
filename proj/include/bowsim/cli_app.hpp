#ifndef BOWSIM_CLI_APP_HPP
#define BOWSIM_CLI_APP_HPP

namespace bowsim {

// Exit codes: 0 success, 2 config error, 3 numerical non-convergence, 4 I/O.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerics = 3;
inline constexpr int kExitIo = 4;

int run_cli(int argc, const char* const* argv);

} // namespace bowsim

#endif

#ifndef BOWSIM_IO_HPP
#define BOWSIM_IO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bowsim {

inline constexpr const char* kVersion = "0.1.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fixed 12-significant-digit formatting; identical inputs give identical
/// bytes.
std::string format_sig(double x);

uint64_t fnv1a64(const std::string& text);
std::string hash_hex(const std::string& text);

/// CSV with a leading `# config_hash=...` comment, a header row, and
/// preformatted cells.
void write_csv(const std::string& path, const std::string& config_hash,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& text);

} // namespace bowsim

#endif

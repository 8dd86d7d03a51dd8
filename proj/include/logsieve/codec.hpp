#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace logsieve {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
// Throws InputError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Splits a record file into lines and checks the trailing {"sha256": ...}
// record against the bytes before it. Returns the lines preceding the
// checksum. `what` names the file kind in error messages.
std::vector<std::string> read_checked_records(std::string_view content,
                                              std::string_view what);

// Appends the checksum record for `body` (which must end with '\n').
std::string with_checksum(std::string body);

}  // namespace logsieve

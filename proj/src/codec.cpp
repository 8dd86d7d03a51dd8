#include "logsieve/codec.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include "json.hpp"
#include "logsieve/errors.hpp"

namespace logsieve {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw InputError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw InputError("malformed base64");
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  std::size_t size = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

std::vector<std::string> read_checked_records(std::string_view content,
                                              std::string_view what) {
  std::vector<std::string> lines;
  std::vector<std::size_t> starts;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t end = content.find('\n', pos);
    starts.push_back(pos);
    if (end == std::string_view::npos) {
      lines.emplace_back(content.substr(pos));
      pos = content.size();
    } else {
      lines.emplace_back(content.substr(pos, end - pos));
      pos = end + 1;
    }
  }
  const std::string kind(what);
  if (lines.empty()) throw InputError(kind + " file is empty", InputError::Position::kLine, 1);
  const std::size_t last = lines.size() - 1;
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(lines[last]);
  } catch (const nlohmann::json::parse_error&) {
    throw InputError(kind + " file: malformed record", InputError::Position::kLine,
                     last + 1);
  }
  if (!record.is_object() || !record.contains("sha256")) {
    throw InputError(kind + " file: missing checksum record (truncated?)",
                     InputError::Position::kLine, last + 2);
  }
  if (!record["sha256"].is_string() ||
      record["sha256"].get<std::string>() != sha256_hex(content.substr(0, starts[last])))
    throw InputError(kind + " file: checksum mismatch", InputError::Position::kLine,
                     last + 1);
  lines.pop_back();
  return lines;
}

std::string with_checksum(std::string body) {
  const std::string digest = sha256_hex(body);
  body += nlohmann::json{{"sha256", digest}}.dump();
  body.push_back('\n');
  return body;
}

}  // namespace logsieve

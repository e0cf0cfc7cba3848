#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hsd::text {

// Unicode NFC normalization of a UTF-8 string. Devanagari has composed and
// decomposed variants of the same glyph sequence; all corpus text goes
// through this exactly once at ingestion.
std::string normalize_nfc(std::string_view utf8);

// Whitespace tokenization (ASCII space/tab/CR/LF). Tweets in Devanagari use
// space-separated words, which is all the mock backends need.
std::vector<std::string_view> tokenize(std::string_view s);

// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 14695981039346656037ull);

// splitmix64 mixer, used to derive pseudo-random streams from hashes.
std::uint64_t mix(std::uint64_t x);

// 128-bit content hash rendered as 32 hex chars; collision-safe enough for
// content-addressed cache keys at corpus scale.
std::string content_hash_hex(std::string_view s);

}  // namespace hsd::text

#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by word counting and tokenization.
namespace reframe::text {

// Decodes one code point starting at `pos` and advances `pos`. Invalid or
// truncated sequences decode as U+FFFD and consume a single byte.
char32_t decode_next(std::string_view s, std::size_t& pos);

// White_Space property code points.
bool is_space(char32_t cp);

// ASCII punctuation plus the common Unicode quote, dash and ellipsis marks.
bool is_punctuation(char32_t cp);

// Maximal runs of non-whitespace code points, in order.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

// Strips punctuation code points from both ends of a token.
std::string_view strip_punctuation(std::string_view token);

// Lowercases ASCII and Latin-1 Supplement letters; other bytes pass through.
std::string lowercase(std::string_view s);

}  // namespace reframe::text

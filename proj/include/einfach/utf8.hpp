#pragma once

#include <string>
#include <string_view>

namespace einfach {

// Decodes the UTF-8 codepoint starting at pos and advances pos past it.
// Invalid bytes are returned as-is so scanners never stall.
char32_t decode_utf8(std::string_view text, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

}  // namespace einfach

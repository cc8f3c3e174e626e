#include "srtk/utf8.hpp"

#include <cctype>

#include "srtk/errors.hpp"

namespace srtk::utf8 {

namespace {

// Width of the sequence starting at `lead`, or 0 if `lead` cannot start one.
std::size_t sequence_width(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return lead >= 0xC2 ? 2 : 0;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return lead <= 0xF4 ? 4 : 0;
    return 0;
}

// Byte offset of every scalar boundary; returns false on invalid UTF-8.
template <typename Visit>
bool walk(std::string_view text, Visit&& visit) {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        const std::size_t width = sequence_width(lead);
        if (width == 0 || i + width > text.size()) return false;
        for (std::size_t k = 1; k < width; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return false;
        }
        if (width == 3) {
            const auto second = static_cast<unsigned char>(text[i + 1]);
            if (lead == 0xE0 && second < 0xA0) return false;
            if (lead == 0xED && second >= 0xA0) return false;  // surrogates
        } else if (width == 4) {
            const auto second = static_cast<unsigned char>(text[i + 1]);
            if (lead == 0xF0 && second < 0x90) return false;
            if (lead == 0xF4 && second >= 0x90) return false;
        }
        visit(i);
        i += width;
    }
    return true;
}

}  // namespace

bool is_valid(std::string_view text) {
    return walk(text, [](std::size_t) {});
}

std::size_t length(std::string_view text) {
    std::size_t count = 0;
    if (!walk(text, [&](std::size_t) { ++count; })) {
        throw FormatError("invalid UTF-8 text");
    }
    return count;
}

std::string substr(std::string_view text, std::size_t start, std::size_t end) {
    std::size_t index = 0;
    std::size_t begin_byte = text.size();
    std::size_t end_byte = text.size();
    const bool ok = walk(text, [&](std::size_t offset) {
        if (index == start) begin_byte = offset;
        if (index == end) end_byte = offset;
        ++index;
    });
    if (!ok) throw FormatError("invalid UTF-8 text");
    if (start >= end || begin_byte >= end_byte) return {};
    return std::string(text.substr(begin_byte, end_byte - begin_byte));
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (const char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace srtk::utf8

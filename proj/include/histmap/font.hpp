#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace histmap {

/// Monospaced bitmap font. Each glyph is 5 columns by 7 rows inside a 6x8
/// cell (one column of spacing, one row of descent).
///
/// External glyph files are plain text:
///
///     histmap-font 1
///     glyph 65
///     .###.
///     #...#
///     ... (7 rows of 5 characters, '#' = ink)
///
/// Code points missing from a font render as '?'.
class Font {
public:
    static constexpr int kGlyphWidth = 5;
    static constexpr int kGlyphHeight = 7;
    static constexpr int kCellWidth = 6;
    static constexpr int kCellHeight = 8;

    using Glyph = std::array<std::uint8_t, kGlyphHeight>; ///< row bitmasks, bit 4 = leftmost

    static std::shared_ptr<const Font> builtin();
    static std::shared_ptr<const Font> load(const std::string& path);
    /// "builtin" yields the packaged font; anything else is read as a glyph file.
    static std::shared_ptr<const Font> resolve(const std::string& source);

    const Glyph& glyph(char32_t code_point) const;
    bool ink(const Glyph& g, int col, int row) const {
        return (g[std::size_t(row)] >> (kGlyphWidth - 1 - col)) & 1U;
    }

    /// Advance per character in pixels for a given font height (cell height).
    static double advance(int font_px) { return font_px * double(kCellWidth) / kCellHeight; }
    static double text_width(std::size_t glyph_count, int font_px) { return double(glyph_count) * advance(font_px); }

private:
    std::map<char32_t, Glyph> glyphs_;
};

/// Decodes UTF-8; invalid sequences become U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view text);

} // namespace histmap

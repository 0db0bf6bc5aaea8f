#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace histmap {

/// Base of every error thrown by the toolkit. `kind()` is a short stable tag
/// used by the CLI for its machine-parsable error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Malformed input document. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("parse", message + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line_(line), column_(column) {}

    explicit ParseError(const std::string& message) : Error("parse", message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_ = 0;
    std::size_t column_ = 0;
};

class ClassificationError : public Error {
public:
    ClassificationError(const std::string& message, std::size_t feature_index)
        : Error("classification", message), feature_index_(feature_index) {}

    std::size_t feature_index() const noexcept { return feature_index_; }

private:
    std::size_t feature_index_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class RangeError : public Error {
public:
    explicit RangeError(const std::string& message) : Error("range", message) {}
};

class AssetError : public Error {
public:
    explicit AssetError(const std::string& message) : Error("asset", message) {}
};

/// Binary interchange file problem; `offset` is the byte where reading failed.
class FormatError : public Error {
public:
    FormatError(const std::string& message, std::uint64_t offset)
        : Error("format", message + " at byte offset " + std::to_string(offset)),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class LayoutError : public Error {
public:
    explicit LayoutError(const std::string& message) : Error("layout", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

/// Failure while building one tile of a dataset.
class TileError : public Error {
public:
    TileError(const std::string& message, std::int64_t tile_id)
        : Error("tile", "tile " + std::to_string(tile_id) + ": " + message), tile_id_(tile_id) {}

    std::int64_t tile_id() const noexcept { return tile_id_; }

private:
    std::int64_t tile_id_;
};

} // namespace histmap

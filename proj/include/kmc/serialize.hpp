#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace kmc::io {

/// Whitespace-separated token stream. Reals use the shortest representation
/// that parses back to the same double, so save/load is exact.
class Writer {
public:
    Writer& tag(std::string_view t);
    Writer& u64(std::uint64_t v);
    Writer& real(double v);
    /// Length-prefixed, so any bytes are allowed.
    Writer& str(std::string_view s);
    Writer& reals(const std::vector<double>& v);
    Writer& sizes(const std::vector<std::size_t>& v);
    Writer& newline();

    std::string take() { return out_.str(); }

private:
    std::ostringstream out_;
};

class Reader {
public:
    explicit Reader(std::string data) : in_(std::move(data)) {}

    /// Throws unless the next token equals `t`.
    void expect(std::string_view t);
    std::string token();
    std::uint64_t u64();
    std::size_t size() { return static_cast<std::size_t>(u64()); }
    double real();
    std::string str();
    std::vector<double> reals();
    std::vector<std::size_t> sizes();

private:
    std::istringstream in_;
};

}  // namespace kmc::io

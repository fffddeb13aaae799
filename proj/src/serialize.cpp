#include "kmc/serialize.hpp"

#include <charconv>
#include <cmath>

#include "kmc/dataset.hpp"
#include "kmc/error.hpp"

namespace kmc::io {

Writer& Writer::tag(std::string_view t) {
    out_ << t << ' ';
    return *this;
}

Writer& Writer::u64(std::uint64_t v) {
    out_ << v << ' ';
    return *this;
}

Writer& Writer::real(double v) {
    if (std::isnan(v)) {
        out_ << "nan ";
    } else {
        out_ << format_real(v) << ' ';
    }
    return *this;
}

Writer& Writer::str(std::string_view s) {
    out_ << s.size() << ':' << s << ' ';
    return *this;
}

Writer& Writer::reals(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) real(x);
    return *this;
}

Writer& Writer::sizes(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (std::size_t x : v) u64(x);
    return *this;
}

Writer& Writer::newline() {
    out_ << '\n';
    return *this;
}

std::string Reader::token() {
    std::string t;
    if (!(in_ >> t)) throw Error("model file truncated");
    return t;
}

void Reader::expect(std::string_view t) {
    const std::string got = token();
    if (got != t) throw Error("model file corrupt: expected '" + std::string(t) + "', found '" + got + "'");
}

std::uint64_t Reader::u64() {
    const std::string t = token();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw Error("model file corrupt: bad integer '" + t + "'");
    return v;
}

double Reader::real() {
    const std::string t = token();
    if (t == "nan") return std::nan("");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw Error("model file corrupt: bad real '" + t + "'");
    return v;
}

std::string Reader::str() {
    std::size_t len = 0;
    if (!(in_ >> len)) throw Error("model file truncated");
    if (in_.get() != ':') throw Error("model file corrupt: bad string");
    std::string s(len, '\0');
    if (!in_.read(s.data(), static_cast<std::streamsize>(len))) throw Error("model file truncated");
    return s;
}

std::vector<double> Reader::reals() {
    std::vector<double> v(size());
    for (auto& x : v) x = real();
    return v;
}

std::vector<std::size_t> Reader::sizes() {
    std::vector<std::size_t> v(size());
    for (auto& x : v) x = size();
    return v;
}

}  // namespace kmc::io

#include "a2c/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "a2c/types.hpp"

namespace a2c::text {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, sep)) {
        auto t = trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        const auto lower = to_lower(s);
        if (lower == "inf" || lower == "infinity") return HUGE_VAL;
        if (lower == "-inf" || lower == "-infinity") return -HUGE_VAL;
        return std::nullopt;
    }
    return v;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

std::string format_doubles(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> parse_doubles(std::string_view s) {
    std::vector<double> out;
    for (auto part : split(trim(s), ' ')) {
        if (part.empty()) continue;
        auto v = parse_double(part);
        if (!v) throw std::invalid_argument("not a number: " + std::string(part));
        out.push_back(*v);
    }
    return out;
}

std::string format_percent(double fraction, int decimals) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, fraction * 100.0);
    return buf.data();
}

std::string format_ranges(std::span<const std::size_t> sorted) {
    std::string out;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[j] + 1) ++j;
        if (!out.empty()) out += ',';
        out += std::to_string(sorted[i]);
        if (j > i) out += '-' + std::to_string(sorted[j]);
        i = j + 1;
    }
    return out;
}

std::vector<std::size_t> parse_ranges(std::string_view s) {
    std::vector<std::size_t> out;
    for (auto part : split_list(s, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            auto v = parse_uint(part);
            if (!v) throw std::invalid_argument("bad index range: " + part);
            out.push_back(*v);
        } else {
            auto lo = parse_uint(std::string_view(part).substr(0, dash));
            auto hi = parse_uint(std::string_view(part).substr(dash + 1));
            if (!lo || !hi || *hi < *lo) throw std::invalid_argument("bad index range: " + part);
            for (auto v = *lo; v <= *hi; ++v) out.push_back(v);
        }
    }
    return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace a2c::text

namespace a2c {

std::size_t PredictionDistribution::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return best;
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Classifier: return "classifier";
        case Stage::Expert: return "expert";
        case Stage::CoexResolved: return "coex-resolved";
        case Stage::CoexUnresolved: return "coex-unresolved";
    }
    return "unknown";
}

}  // namespace a2c

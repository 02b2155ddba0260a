#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wedd/error.hpp"
#include "wedd/matrix.hpp"

namespace wedd {

enum class MatrixFormat { matrix_market, csv };

/// ".csv" (any case) selects CSV, everything else Matrix Market.
inline MatrixFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".csv" ? MatrixFormat::csv : MatrixFormat::matrix_market;
}

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

inline std::vector<Token> split_tokens(std::string_view line, char sep) {
    std::vector<Token> out;
    std::size_t i = 0;
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    if (sep == ' ') {
        while (i < line.size()) {
            while (i < line.size() && is_space(line[i])) ++i;
            if (i >= line.size()) break;
            const std::size_t start = i;
            while (i < line.size() && !is_space(line[i])) ++i;
            out.push_back({line.substr(start, i - start), start + 1});
        }
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const std::size_t end = std::min(line.find(sep, start), line.size());
        std::size_t a = start, b = end;
        while (a < b && is_space(line[a])) ++a;
        while (b > a && is_space(line[b - 1])) --b;
        out.push_back({line.substr(a, b - a), a + 1});
        if (end == line.size()) break;
        start = end + 1;
    }
    return out;
}

inline double parse_real(const Token& t, std::size_t line) {
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (!t.text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.text.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("expected a real number, found '" + std::string(t.text) + "'", line, t.column);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(t.text) + "'", line, t.column);
    return v;
}

inline std::size_t parse_index(const Token& t, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (t.text.empty() || ec != std::errc() || ptr != t.text.data() + t.text.size()) {
        throw ParseError("expected a non-negative integer, found '" + std::string(t.text) + "'", line, t.column);
    }
    return v;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline Matrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty input", 1);
    ++lineno;
    const auto header = split_tokens(line, ' ');
    if (header.empty() || header[0].text != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", 1, 1);
    if (header.size() != 5) throw ParseError("banner must have 5 fields", 1);
    if (lower(header[1].text) != "matrix") throw ParseError("only 'matrix' objects are supported", 1, header[1].column);
    const std::string layout = lower(header[2].text);
    if (layout != "array" && layout != "coordinate") {
        throw ParseError("format must be 'array' or 'coordinate'", 1, header[2].column);
    }
    if (lower(header[3].text) != "real") {
        throw ParseError("field '" + std::string(header[3].text) + "' is not supported; only 'real' is", 1, header[3].column);
    }
    if (lower(header[4].text) != "general") {
        throw ParseError("symmetry '" + std::string(header[4].text) + "' is not supported; only 'general' is", 1,
                         header[4].column);
    }
    const bool coordinate = layout == "coordinate";

    // Remaining non-comment lines.
    std::vector<std::pair<std::size_t, std::string>> body;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        body.emplace_back(lineno, line);
    }
    if (body.empty()) throw ParseError("missing size line", lineno + 1);

    const auto size_tokens = split_tokens(body[0].second, ' ');
    const std::size_t size_line = body[0].first;
    if (size_tokens.size() != (coordinate ? 3u : 2u)) {
        throw ParseError(coordinate ? "size line must be 'rows cols entries'" : "size line must be 'rows cols'", size_line);
    }
    const std::size_t m = parse_index(size_tokens[0], size_line);
    const std::size_t n = parse_index(size_tokens[1], size_line);
    Matrix a(m, n);

    if (!coordinate) {
        std::size_t count = 0;
        for (std::size_t b = 1; b < body.size(); ++b) {
            for (const Token& t : split_tokens(body[b].second, ' ')) {
                if (count >= m * n) throw ParseError("more than " + std::to_string(m * n) + " values", body[b].first, t.column);
                // Column-major order.
                a(count % std::max<std::size_t>(m, 1), count / std::max<std::size_t>(m, 1)) = parse_real(t, body[b].first);
                ++count;
            }
        }
        if (count != m * n) {
            throw ParseError("expected " + std::to_string(m * n) + " values, found " + std::to_string(count), lineno);
        }
        return a;
    }

    const std::size_t nnz = parse_index(size_tokens[2], size_line);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::size_t count = 0;
    for (std::size_t b = 1; b < body.size(); ++b) {
        const std::size_t ln = body[b].first;
        const auto toks = split_tokens(body[b].second, ' ');
        if (toks.size() != 3) throw ParseError("coordinate entry must be 'row col value'", ln);
        const std::size_t i = parse_index(toks[0], ln);
        const std::size_t j = parse_index(toks[1], ln);
        if (i == 0 || i > m) throw ParseError("row index out of range", ln, toks[0].column);
        if (j == 0 || j > n) throw ParseError("column index out of range", ln, toks[1].column);
        if (!seen.emplace(i, j).second) {
            throw ParseError("duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")", ln, toks[0].column);
        }
        a(i - 1, j - 1) = parse_real(toks[2], ln);
        ++count;
    }
    if (count != nnz) {
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(count), lineno);
    }
    return a;
}

inline Matrix read_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto toks = split_tokens(line, ',');
        if (rows == 0) {
            cols = toks.size();
        } else if (toks.size() != cols) {
            throw ParseError("row has " + std::to_string(toks.size()) + " fields, expected " + std::to_string(cols), lineno);
        }
        for (const Token& t : toks) values.push_back(parse_real(t, lineno));
        ++rows;
    }
    if (rows == 0) throw ParseError("no data rows", lineno + 1);
    return Matrix(rows, cols, std::move(values));
}

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline Matrix read_matrix(std::istream& in, MatrixFormat format) {
    return format == MatrixFormat::csv ? detail::read_csv(in) : detail::read_matrix_market(in);
}

inline Matrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return read_matrix(in, format);
}

inline Matrix read_matrix(const std::filesystem::path& path) { return read_matrix(path, format_from_path(path)); }

/// Writes 17 significant digits, enough to round-trip every double.
/// Matrix Market output is the column-major 'array real general' layout.
inline void write_matrix(const Matrix& a, std::ostream& out, MatrixFormat format) {
    if (format == MatrixFormat::csv) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
            for (std::size_t j = 0; j < a.cols(); ++j) out << (j ? "," : "") << detail::format_real(a(i, j));
            out << '\n';
        }
        return;
    }
    out << "%%MatrixMarket matrix array real general\n";
    out << a.rows() << ' ' << a.cols() << '\n';
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out << detail::format_real(a(i, j)) << '\n';
}

inline void write_matrix(const Matrix& a, const std::filesystem::path& path, MatrixFormat format) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_matrix(a, out, format);
    out.flush();
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

} // namespace wedd

#include "linda/tsv.hpp"

#include "linda/common.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace linda {

std::string format_double(double v) {
    if (std::isnan(v))
        return "NA";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
    if (token == "NA" || token == "nan" || token == "NaN")
        return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw ValidationError("cannot parse number '" + token + "' " + context);
    return value;
}

long long parse_count(const std::string& token, const std::string& context) {
    if (token.empty())
        throw ValidationError("empty count cell " + context);
    if (token[0] == '-')
        throw ValidationError("negative count " + context);
    long long value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw ValidationError("cannot parse count '" + token + "' " + context);
    return value;
}

std::vector<std::vector<std::string>> read_delimited(std::istream& in, char delim,
                                                     const std::string& source_name) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty()) {
            rows.emplace_back();
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(delim, start);
            if (pos == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        rows.push_back(std::move(cells));
    }
    if (in.bad())
        throw ValidationError("I/O error while reading " + source_name);
    while (!rows.empty() && rows.back().empty())
        rows.pop_back();
    for (const auto& row : rows)
        if (row.empty())
            throw ValidationError("blank interior line in " + source_name);
    return rows;
}

char delimiter_for_path(const std::string& path, std::optional<char> override_delim) {
    if (override_delim)
        return *override_delim;
    if (path.size() >= 4) {
        std::string ext = path.substr(path.size() - 4);
        for (auto& c : ext)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (ext == ".csv")
            return ',';
    }
    return '\t';
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ValidationError("cannot write file: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw ValidationError("I/O error while writing " + path);
}

} // namespace linda

#include "core/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace latcode {

namespace {

std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view field, size_t line_no) {
    field = trim(field);
    double out = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        std::ostringstream msg;
        msg << "line " << line_no << ": '" << std::string(field) << "' is not a number";
        throw ValidationError(msg.str());
    }
    return out;
}

}  // namespace

std::vector<Vec> csv_parse(const std::string& text, size_t expect_cols) {
    std::vector<Vec> rows;
    size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;

        Vec row;
        size_t start = 0;
        while (true) {
            size_t comma = line.find(',', start);
            row.push_back(parse_double(
                line.substr(start, (comma == std::string_view::npos ? line.size() : comma) - start),
                line_no));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows.empty() && expect_cols == 0) expect_cols = row.size();
        if (row.size() != expect_cols) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected " << expect_cols << " columns, found "
                << row.size();
            throw ValidationError(msg.str());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Vec> csv_read(const std::string& path, size_t expect_cols) {
    return csv_parse(read_text_file(path), expect_cols);
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

std::string csv_format(const std::vector<Vec>& rows, const std::vector<std::string>& header) {
    std::string out;
    if (!header.empty()) {
        for (size_t j = 0; j < header.size(); ++j) {
            if (j) out += ',';
            out += header[j];
        }
        out += '\n';
    }
    for (const auto& row : rows) {
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_double(row[j]);
        }
        out += '\n';
    }
    return out;
}

void csv_write(const std::string& path, const std::vector<Vec>& rows,
               const std::vector<std::string>& header) {
    write_text_file(path, csv_format(rows, header));
}

DiscreteMeasure measure_from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw ValidationError("measure file has no rows");
    if (rows.front().size() < 2)
        throw ValidationError("measure rows need at least one coordinate plus a weight");
    std::vector<Vec> atoms;
    std::vector<double> weights;
    atoms.reserve(rows.size());
    weights.reserve(rows.size());
    for (const auto& row : rows) {
        atoms.emplace_back(row.begin(), row.end() - 1);
        weights.push_back(row.back());
    }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

std::vector<Vec> measure_to_rows(const DiscreteMeasure& m) {
    std::vector<Vec> rows;
    rows.reserve(m.atoms.size());
    for (size_t i = 0; i < m.atoms.size(); ++i) {
        Vec row = m.atoms[i];
        row.push_back(m.weights[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace latcode

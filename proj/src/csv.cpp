#include "cerm/csv.hpp"

#include "cerm/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace cerm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
    }
    return out;
}

} // namespace

const std::string& CsvTable::cell(std::size_t row, const std::string& column) const {
    auto it = index.find(column);
    if (it == index.end()) throw DataError("CSV: no column '" + column + "'");
    return cells.at(row).at(it->second);
}

double CsvTable::number(std::size_t row, const std::string& column) const {
    const std::string& s = cell(row, column);
    if (s.empty()) throw DataError("CSV: empty numeric cell in column '" + column + "'");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw DataError("CSV: cannot parse '" + s + "' in column '" + column + "'");
    return v;
}

void CsvTable::require_columns(const std::vector<std::string>& names) const {
    for (const auto& n : names)
        if (!has_column(n)) throw DataError("CSV: missing required column '" + n + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path.string());
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_line(line);
        if (!have_header) {
            t.columns = fields;
            for (std::size_t i = 0; i < fields.size(); ++i) t.index[fields[i]] = i;
            have_header = true;
            continue;
        }
        if (fields.size() != t.columns.size())
            throw DataError("CSV: row with " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(t.columns.size()) + " in " +
                            path.string());
        t.cells.push_back(std::move(fields));
    }
    if (!have_header) throw DataError("CSV: no header row in " + path.string());
    return t;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& meta_comment)
    : out_(path) {
    if (!out_) throw DataError("cannot write CSV file: " + path.string());
    if (!meta_comment.empty()) out_ << "# " << meta_comment << "\n";
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out_ << ',';
        out_ << names[i];
    }
    out_ << '\n';
}

void CsvWriter::sep() {
    if (row_started_) out_ << ',';
    row_started_ = true;
}

void CsvWriter::field(const std::string& value) {
    sep();
    out_ << value;
}

void CsvWriter::field(double value) {
    sep();
    out_ << format_double(value);
}

void CsvWriter::field(long long value) {
    sep();
    out_ << value;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

} // namespace cerm

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace cerm {

// Minimal CSV table: comma-separated, first non-comment line is the header,
// lines starting with '#' are metadata comments and are skipped on read.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> cells;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t rows() const { return cells.size(); }
    bool has_column(const std::string& name) const { return index.count(name) > 0; }
    const std::string& cell(std::size_t row, const std::string& column) const;
    double number(std::size_t row, const std::string& column) const;
    void require_columns(const std::vector<std::string>& names) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Deterministic CSV writer; doubles are printed with %.17g so that artifacts
// are byte-stable and round-trip exactly.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& meta_comment = {});

    void header(const std::vector<std::string>& names);
    void field(const std::string& value);
    void field(double value);
    void field(long long value);
    void end_row();

private:
    std::ofstream out_;
    bool row_started_ = false;

    void sep();
};

std::string format_double(double value);

} // namespace cerm

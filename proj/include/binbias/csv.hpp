#pragma once

#include <string>
#include <vector>

namespace binbias {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // -1 when the column is absent
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// writes with enough digits to round-trip doubles exactly
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace binbias

#pragma once

#include <string>
#include <vector>

#include "core/linalg.hpp"
#include "core/spaces.hpp"

namespace latcode {

// Locale-independent numeric CSV: '.' decimal separator, ',' field separator,
// no quoting. Values are printed with shortest round-trip precision.

// expect_cols = 0 infers the width from the first row; every row must match.
std::vector<Vec> csv_parse(const std::string& text, size_t expect_cols = 0);
std::vector<Vec> csv_read(const std::string& path, size_t expect_cols = 0);

// header may be empty (dataset and measure files carry none).
std::string csv_format(const std::vector<Vec>& rows, const std::vector<std::string>& header = {});
void csv_write(const std::string& path, const std::vector<Vec>& rows,
               const std::vector<std::string>& header = {});

std::string format_double(double x);

// Measure files: one atom per row, last column is its weight.
DiscreteMeasure measure_from_rows(const std::vector<Vec>& rows);
std::vector<Vec> measure_to_rows(const DiscreteMeasure& m);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace latcode

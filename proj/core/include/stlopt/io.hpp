#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stlopt/design_field.hpp"
#include "stlopt/optimizer.hpp"
#include "stlopt/transmission.hpp"

namespace stlopt {

/// Writes `content` to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Plain-text density map: a header line "nx ny element_size fixed_rows"
/// followed by ny rows of nx values, top row first.
std::string format_design(const Field& values, const GridSpec& grid);
/// Inverse of format_design; throws DimensionError on malformed input and
/// DomainError on values outside [0,1].
DesignVector parse_design(const std::string& text);
void write_design(const std::filesystem::path& path, const Field& values, const GridSpec& grid);
DesignVector read_design(const std::filesystem::path& path);

std::string format_spectrum_csv(const std::vector<SpectrumResult>& spectra);
std::string format_history_csv(const std::vector<IterationRecord>& history);
std::string format_transitions_csv(const std::vector<StageTransition>& transitions);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace stlopt

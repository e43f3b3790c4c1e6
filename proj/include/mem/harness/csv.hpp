#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "mem/agents/run_log.hpp"

namespace mem::harness {

/// Fixed column order; eval_return is blank on rows without an evaluation.
std::string csv_header();
/// One line, newline-terminated; floats with 17 significant digits.
std::string csv_row(const agents::LogRow& row);

class CsvWriter {
 public:
  /// Truncates `path` and writes the header. Throws IoError.
  explicit CsvWriter(const std::filesystem::path& path);
  void write(const agents::LogRow& row);
  /// Flushes and checks the stream. Throws IoError.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace mem::harness

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "swcrt/errors.hpp"

namespace swcrt {

// Byte-stable CSV output: numbers at 12 significant digits, LF line endings,
// fields written in call order.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void header(const std::vector<std::string>& names);
  void field(const std::string& value);
  void field(const char* value);
  void field(double value);
  void field(int value);
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  std::string path_;
  bool row_started_ = false;
};

std::string format_sig12(double value);

}  // namespace swcrt

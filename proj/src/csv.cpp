#include "swcrt/csv.hpp"

#include <cstdio>

namespace swcrt {

std::string format_sig12(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw IoError("cannot open '" + path + "' for writing");
}

void CsvWriter::sep() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) {
    sep();
    out_ << n;
  }
  end_row();
}

void CsvWriter::field(const std::string& value) {
  sep();
  out_ << value;
}

void CsvWriter::field(const char* value) { field(std::string(value)); }

void CsvWriter::field(double value) {
  sep();
  out_ << format_sig12(value);
}

void CsvWriter::field(int value) {
  sep();
  out_ << value;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
  if (!out_) throw IoError("write failed on '" + path_ + "'");
}

}  // namespace swcrt

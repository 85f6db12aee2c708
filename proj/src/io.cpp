#include "tfheat/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tfheat/error.hpp"

namespace tfheat {
namespace {

std::vector<std::string> split_fields(std::string line) {
  if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
  for (char& ch : line)
    if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Table t;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], row[i]);
    if (!numeric) {
      if (rows.empty() && t.header.empty()) {
        t.header = fields;
        continue;
      }
      throw ValidationError(path + ":" + std::to_string(line_no) + ": unparsable number");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("'" + path + "' holds no data rows");
  t.data.resize(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) t.data(r, c) = rows[r][c];
  return t;
}

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Eigen::MatrixXd& data) {
  if (!header.empty() && Eigen::Index(header.size()) != data.cols())
    throw ShapeError("write_table: header and data widths differ");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << format_number(data(r, c));
    out << '\n';
  }
}

}  // namespace tfheat

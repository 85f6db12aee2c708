#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tfheat {

/// Numeric table with a one-line header.
struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd data;  // rows x columns
};

/// Reads comma/semicolon/tab/blank separated numbers; a leading non-numeric
/// row is taken as the header, '#' starts a comment.
Table read_table(const std::string& path);

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Eigen::MatrixXd& data);

/// Shortest round-trip decimal form, used for every written number.
std::string format_number(double x);

}  // namespace tfheat

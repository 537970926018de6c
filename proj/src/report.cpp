#include "toruscope/report.hpp"

#include <cstdint>
#include <cstdio>

namespace toruscope {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json jnum(double x) { return json(format_double(x)); }

json jvec(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(jnum(x));
  return out;
}

json jvec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(jnum(v[i]));
  return out;
}

json jmat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(jnum(m(i, j)));
    out.push_back(row);
  }
  return out;
}

std::string digest(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json report_header(const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& input_digests) {
  json h;
  h["tool"] = kToolName;
  h["version"] = kToolVersion;
  h["command"] = command;
  json inputs;
  for (const auto& [name, dg] : input_digests) inputs[name] = dg;
  h["inputs"] = inputs;
  return h;
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace toruscope

#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

namespace toruscope {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "toruscope";
inline constexpr const char* kToolVersion = "1.0.0";

/// 17 significant digits: enough to reproduce any double exactly.  Reports
/// store floats as decimal strings so that output bytes are stable across
/// JSON serializer versions.
std::string format_double(double x);

json jnum(double x);
json jvec(const std::vector<double>& v);
json jvec(const Eigen::VectorXd& v);
json jmat(const Eigen::MatrixXd& m);

/// FNV-1a 64-bit digest, rendered as "fnv1a:<16 hex digits>".
std::string digest(const std::string& bytes);

json report_header(const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& input_digests);

/// Rows of comma-joined values, one line each, trailing newline.
std::string render_csv(const std::vector<std::vector<std::string>>& rows);

}  // namespace toruscope

#include "apq/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace apq {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json rrow = nlohmann::json::array();
    nlohmann::json irow = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rrow.push_back(m(i, k).real());
      irow.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<Eigen::Index>(re.size()) != rows ||
      static_cast<Eigen::Index>(im.size()) != rows)
    throw std::invalid_argument("matrix_from_json: row count mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& rrow = re.at(static_cast<std::size_t>(i));
    const auto& irow = im.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(rrow.size()) != cols ||
        static_cast<Eigen::Index>(irow.size()) != cols)
      throw std::invalid_argument("matrix_from_json: column count mismatch");
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = Complex(rrow.at(static_cast<std::size_t>(k)).get<double>(),
                        irow.at(static_cast<std::size_t>(k)).get<double>());
  }
  return m;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write_file: cannot open " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("atomic_write_file: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("atomic_write_file: rename failed for " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

} // namespace apq

#include "dsgp4kit/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace dsgp4kit {

std::string_view basis_name(Basis b) { return b == Basis::TleElements ? "tle-elements" : "cartesian-teme"; }

Basis parse_basis(std::string_view name) {
  if (name == "tle-elements") return Basis::TleElements;
  if (name == "cartesian-teme") return Basis::CartesianTeme;
  throw Error(ErrorCode::Parse, "unknown covariance basis '" + std::string(name) + "'");
}

double symmetry_error(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

bool is_numerically_psd(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (!m.allFinite()) return false;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
  double ref = m.trace();
  if (ref <= 0.0) ref = m.diagonal().cwiseAbs().maxCoeff();
  return es.eigenvalues().minCoeff() >= -tol * ref;
}

Covariance propagate_covariance(const Covariance& p0, const ElementSet& elements, double tsince,
                                const GravityConstants& gc) {
  if (p0.basis != Basis::TleElements) throw Error(ErrorCode::ShapeMismatch, "initial covariance must be in the element basis");
  if (p0.matrix.rows() != 6 || p0.matrix.cols() != 6) throw Error(ErrorCode::ShapeMismatch, "initial covariance must be 6x6");
  if (!is_numerically_psd(p0.matrix)) throw Error(ErrorCode::NonPsdInput, "initial covariance is not positive semidefinite");
  const Matrix6 j = stm_tle(elements, tsince, gc);
  Covariance out;
  out.matrix = symmetrized(j * p0.matrix * j.transpose());
  out.basis = Basis::CartesianTeme;
  out.epoch = p0.epoch;
  out.tsince_min = tsince;
  return out;
}

Covariance similarity_transform(const Covariance& p, const Eigen::MatrixXd& j, Basis target) {
  if (p.matrix.rows() != p.matrix.cols() || j.cols() != p.matrix.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "transform is not conformable with the covariance");
  }
  Covariance out = p;
  out.matrix = symmetrized(j * p.matrix * j.transpose());
  out.basis = target;
  return out;
}

std::string covariance_to_json(const Covariance& c) {
  nlohmann::json j;
  j["basis"] = basis_name(c.basis);
  j["epoch"] = c.epoch ? nlohmann::json(format_iso8601(*c.epoch)) : nlohmann::json(nullptr);
  j["tsince_min"] = c.tsince_min;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < c.matrix.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < c.matrix.cols(); ++k) row.push_back(c.matrix(r, k));
    rows.push_back(row);
  }
  j["matrix"] = rows;
  return j.dump(2);
}

Covariance covariance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("covariance json: ") + e.what());
  }
  Covariance c;
  try {
    c.basis = parse_basis(j.at("basis").get<std::string>());
    if (j.contains("epoch") && !j["epoch"].is_null()) c.epoch = parse_iso8601(j["epoch"].get<std::string>());
    c.tsince_min = j.value("tsince_min", 0.0);
    const auto& rows = j.at("matrix");
    const auto n = static_cast<Eigen::Index>(rows.size());
    c.matrix.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (static_cast<Eigen::Index>(row.size()) != n) throw Error(ErrorCode::ShapeMismatch, "covariance matrix is not square");
      for (Eigen::Index k = 0; k < n; ++k) c.matrix(r, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("covariance json: ") + e.what());
  }
  return c;
}

}  // namespace dsgp4kit

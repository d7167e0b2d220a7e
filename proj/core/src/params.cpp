#include "lmm/params.hpp"

#include <cmath>
#include <limits>

#include "lmm/error.hpp"

namespace lmm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& what) { throw ModelError("inference", what); }

// Position (block, row, col) of the first occurrence of every θ index.
std::vector<ParamInfo> locate(const ModelSpec& spec) {
  const Index m = spec.m();
  std::vector<ParamInfo> out(m);
  std::vector<char> seen(m, 0);
  for (std::size_t bi = 0; bi < spec.cov_blocks.size(); ++bi) {
    const CovBlock& b = spec.cov_blocks[bi];
    bool full = true, diagonal = true;
    for (Index c = 0; c < b.p; ++c)
      for (Index r = c; r < b.p; ++r) {
        const bool present = b.theta_index[r + c * b.p] >= 0;
        if (r == c && !present) full = diagonal = false;
        if (r != c) {
          full = full && present;
          diagonal = diagonal && !present;
        }
      }
    if (!full && !diagonal) {
      fail("covariance block '" + b.group + "' cannot be expressed by standard deviations and correlations");
    }
    for (Index c = 0; c < b.p; ++c)
      for (Index r = c; r < b.p; ++r) {
        const Index k = b.theta_index[r + c * b.p];
        if (k < 0 || seen[k]) continue;
        seen[k] = 1;
        ParamInfo& pi = out[k];
        pi.index = k;
        pi.block = static_cast<Index>(bi);
        pi.row = r;
        pi.col = c;
        if (r == c) {
          pi.kind = ParamKind::Sd;
          pi.name = "sd_" + b.names[r] + "|" + b.group;
        } else {
          pi.kind = ParamKind::Cor;
          pi.name = "cor_" + b.names[r] + "." + b.names[c] + "|" + b.group;
        }
      }
  }
  for (Index k = 0; k < m; ++k)
    if (!seen[k]) fail("theta component " + std::to_string(k + 1) + " belongs to no covariance block");
  return out;
}

// Cholesky factor of a positive semidefinite matrix; zero pivots give zero
// columns.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& a) {
  const Index p = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  const double tol = 1e-10;
  for (Index j = 0; j < p; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d < -tol) throw NumericError("inference", "correlation matrix is not positive semidefinite");
    d = std::max(d, 0.0);
    l(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < p; ++i) {
      const double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      if (l(j, j) > tol) {
        l(i, j) = s / l(j, j);
      } else if (std::abs(s) > tol) {
        throw NumericError("inference", "correlation matrix is not positive semidefinite");
      }
    }
  }
  return l;
}

}  // namespace

const char* to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::Sd: return "sd";
    case ParamKind::Cor: return "cor";
    case ParamKind::Sigma: return "sigma";
    case ParamKind::Beta: return "beta";
  }
  return "";
}

std::vector<ParamInfo> model_params(const ModelSpec& spec) {
  std::vector<ParamInfo> out = locate(spec);
  out.push_back({"sigma", ParamKind::Sigma, 0, -1, 0, 0});
  for (Index j = 0; j < spec.p(); ++j) out.push_back({spec.xnames[j], ParamKind::Beta, j, -1, 0, 0});
  return out;
}

Eigen::VectorXd sdcor_from_theta(const ModelSpec& spec, const Eigen::VectorXd& theta, double sigma) {
  const std::vector<ParamInfo> info = locate(spec);
  Eigen::VectorXd out(spec.m());
  for (const ParamInfo& pi : info) {
    const CovBlock& b = spec.cov_blocks[pi.block];
    const Eigen::MatrixXd t = b.template_matrix(theta);
    const Eigen::MatrixXd s = t * t.transpose();
    if (pi.kind == ParamKind::Sd) {
      out(pi.index) = sigma * std::sqrt(s(pi.row, pi.row));
    } else {
      const double d = std::sqrt(s(pi.row, pi.row) * s(pi.col, pi.col));
      out(pi.index) = d > 0.0 ? s(pi.row, pi.col) / d : kNaN;
    }
  }
  return out;
}

Eigen::VectorXd theta_from_sdcor(const ModelSpec& spec, const Eigen::VectorXd& sdcor, double sigma) {
  const std::vector<ParamInfo> info = locate(spec);
  if (sdcor.size() != spec.m()) fail("expected " + std::to_string(spec.m()) + " standard deviations and correlations");
  if (!(sigma > 0.0)) throw NumericError("inference", "sigma must be positive");
  std::vector<Eigen::VectorXd> sd(spec.cov_blocks.size());
  std::vector<Eigen::MatrixXd> cor(spec.cov_blocks.size());
  for (std::size_t bi = 0; bi < spec.cov_blocks.size(); ++bi) {
    const CovBlock& b = spec.cov_blocks[bi];
    sd[bi] = Eigen::VectorXd::Zero(b.p);
    cor[bi] = Eigen::MatrixXd::Identity(b.p, b.p);
    for (Index c = 0; c < b.p; ++c)
      for (Index r = c; r < b.p; ++r) {
        const Index k = b.theta_index[r + c * b.p];
        if (k < 0) continue;
        if (r == c) {
          sd[bi](r) = sdcor(k);
        } else {
          cor[bi](r, c) = cor[bi](c, r) = sdcor(k);
        }
      }
  }
  Eigen::VectorXd theta(spec.m());
  for (const ParamInfo& pi : info) {
    const Eigen::MatrixXd t = sd[pi.block].asDiagonal() * psd_cholesky(cor[pi.block]) / sigma;
    theta(pi.index) = t(pi.row, pi.col);
  }
  return theta;
}

Eigen::VectorXd param_values(const ModelSpec& spec, const Eigen::VectorXd& theta, double sigma,
                             const Eigen::VectorXd& beta) {
  const Index m = spec.m();
  Eigen::VectorXd out(m + 1 + beta.size());
  out.head(m) = sdcor_from_theta(spec, theta, sigma);
  out(m) = sigma;
  out.tail(beta.size()) = beta;
  return out;
}

}  // namespace lmm

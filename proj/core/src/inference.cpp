#include "lmm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "lmm/distributions.hpp"
#include "lmm/error.hpp"

namespace lmm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& what) { throw ModelError("inference", what); }

void require_term_layout(const ModelSpec& s) {
  Index q = 0;
  for (const auto& t : s.terms) q += t.q;
  if (q != s.q()) fail("random effects do not follow the term layout of the formula");
}

Eigen::MatrixXd rx_inverse(const FitResult& fit) {
  const Index p = fit.spec->p();
  return fit.state.RX().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
}

const Column& newdata_column(const DataTable& nd, const std::string& name) {
  const Column* c = nd.find(name);
  if (!c) fail("newdata has no column '" + name + "'");
  for (std::size_t r = 0; r < c->size(); ++r)
    if (c->is_na(r)) fail("newdata column '" + name + "' has a missing value in row " + std::to_string(r + 1));
  return *c;
}

// A newdata column coded like its counterpart in the model frame.
Column conform(const Column& train, const DataTable& nd) {
  const Column& c = newdata_column(nd, train.name);
  if (train.is_numeric()) {
    if (!c.is_numeric()) fail("newdata column '" + train.name + "' must be numeric");
    return c;
  }
  std::unordered_map<std::string, int> index;
  for (std::size_t k = 0; k < train.levels.size(); ++k) index.emplace(train.levels[k], static_cast<int>(k));
  Column out;
  out.name = train.name;
  out.kind = Column::Kind::Categorical;
  out.levels = train.levels;
  out.codes.resize(c.size());
  for (std::size_t r = 0; r < c.size(); ++r) {
    const std::string text = c.cell_text(r);
    const auto it = index.find(text);
    if (it == index.end()) fail("level '" + text + "' of '" + train.name + "' does not occur in the fitted data");
    out.codes[r] = it->second;
  }
  return out;
}

void add_vars(const LinearPart& part, std::vector<std::string>& vars) {
  for (const auto& term : part.terms)
    for (const auto& v : term)
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
}

}  // namespace

std::vector<VarCorrRecord> VarCorr::records() const {
  std::vector<VarCorrRecord> out;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.names.size(); ++i) {
      const auto k = static_cast<Index>(i);
      out.push_back({b.group, b.names[i], "", b.cov(k, k), b.sd(k)});
    }
    for (const auto& [r, c] : b.free_pairs) out.push_back({b.group, b.names[c], b.names[r], b.cov(r, c), b.cor(r, c)});
  }
  out.push_back({"Residual", "", "", residual_sd * residual_sd, residual_sd});
  return out;
}

VarCorr varcorr(const FitResult& fit) {
  const ModelSpec& s = *fit.spec;
  VarCorr vc;
  vc.residual_sd = fit.sigma();
  for (const CovBlock& cb : s.cov_blocks) {
    VarCorrBlock b;
    b.group = cb.group;
    b.names = cb.names;
    const Eigen::MatrixXd t = cb.template_matrix(fit.theta());
    b.cov = fit.sigma2() * t * t.transpose();
    b.sd = b.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    b.cor = Eigen::MatrixXd::Identity(cb.p, cb.p);
    for (Index c = 0; c < cb.p; ++c)
      for (Index r = c + 1; r < cb.p; ++r) {
        const double d = b.sd(r) * b.sd(c);
        b.cor(r, c) = b.cor(c, r) = d > 0.0 ? b.cov(r, c) / d : kNaN;
        if (cb.theta_index[r + c * cb.p] >= 0) b.free_pairs.emplace_back(r, c);
      }
    vc.blocks.push_back(std::move(b));
  }
  return vc;
}

Eigen::MatrixXd vcov_fixef(const FitResult& fit) {
  const Eigen::MatrixXd ri = rx_inverse(fit);
  return fit.sigma2() * ri * ri.transpose();
}

Eigen::VectorXd se_fixef(const FitResult& fit) { return vcov_fixef(fit).diagonal().cwiseSqrt(); }

Eigen::VectorXd t_values(const FitResult& fit) { return fit.beta().cwiseQuotient(se_fixef(fit)); }

Eigen::MatrixXd cor_fixef(const FitResult& fit) {
  const Eigen::MatrixXd v = vcov_fixef(fit);
  const Eigen::VectorXd d = v.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * v * d.asDiagonal();
}

std::vector<RanefTable> ranef(const FitResult& fit) {
  const ModelSpec& s = *fit.spec;
  require_term_layout(s);
  std::vector<RanefTable> out;
  for (const TermInfo& t : s.terms) {
    RanefTable r{t.group, t.cnms, t.levels, Eigen::MatrixXd(t.l, t.p), {}};
    for (Index j = 0; j < t.l; ++j)
      for (Index c = 0; c < t.p; ++c) r.values(j, c) = fit.b()(t.z_offset + j * t.p + c);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RanefTable> cond_var_ranef(const FitResult& fit) {
  std::vector<RanefTable> out = ranef(fit);
  const ModelSpec& s = *fit.spec;
  const SparseCsc& lt = fit.state.lambdat();
  const CholFactor& chol = fit.state.factor();
  const Index q = s.q();
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const TermInfo& t = s.terms[i];
    for (Index j = 0; j < t.l; ++j) {
      // Columns of Λᵀ for this level, i.e. the rows of Λ.
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(q, t.p);
      for (Index c = 0; c < t.p; ++c) {
        const Index col = t.z_offset + j * t.p + c;
        for (Index k = lt.col_ptr()[col]; k < lt.col_ptr()[col + 1]; ++k) e(lt.row_idx()[k], c) = lt.values()[k];
      }
      chol.solve_in_place(SolveMode::P, e);
      chol.solve_in_place(SolveMode::L, e);
      out[i].cond_var.push_back(fit.sigma2() * e.transpose() * e);
    }
  }
  return out;
}

Eigen::VectorXd fitted(const FitResult& fit) { return fit.state.mu(); }

Eigen::VectorXd residuals(const FitResult& fit, ResidualKind kind) {
  const Eigen::VectorXd r = fit.state.response() - fit.state.mu();
  if (kind == ResidualKind::Response) return r;
  return fit.spec->sqrtw.cwiseProduct(r) / fit.sigma();
}

double quantile(std::vector<double> x, double prob) {
  std::erase_if(x, [](double v) { return std::isnan(v); });
  if (x.empty()) return kNaN;
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

HatBlocks hat_blocks(const FitResult& fit) {
  const ModelSpec& s = *fit.spec;
  const DevState& st = fit.state;
  HatBlocks h;
  h.CL = multiply(st.lambdat(), st.zt_sqrtw()).to_dense();
  st.factor().solve_in_place(SolveMode::P, h.CL);
  st.factor().solve_in_place(SolveMode::L, h.CL);
  const Eigen::MatrixXd xtw = (s.sqrtw.asDiagonal() * s.X).transpose();
  h.CR = st.RX().transpose().triangularView<Eigen::Lower>().solve(xtw - st.RZX().transpose() * h.CL);
  return h;
}

double hat_trace(const FitResult& fit) {
  const HatBlocks h = hat_blocks(fit);
  return h.CL.squaredNorm() + h.CR.squaredNorm();
}

Eigen::VectorXd hat_diag(const FitResult& fit) {
  const HatBlocks h = hat_blocks(fit);
  return h.CL.colwise().squaredNorm().transpose() + h.CR.colwise().squaredNorm().transpose();
}

Eigen::VectorXd simulate_response(const FitResult& fit, NormalStream& z, SimulateMode mode, double noise_scale) {
  const ModelSpec& s = *fit.spec;
  const double sigma = fit.sigma();
  Eigen::VectorXd mu = s.X * fit.beta() + s.offset;
  if (mode != SimulateMode::Population) {
    Eigen::VectorXd u(s.q());
    if (mode == SimulateMode::NewRE) {
      for (Index k = 0; k < s.q(); ++k) u(k) = sigma * z();
    } else {
      u = fit.u();
    }
    mu += multiply_transposed(s.Zt, multiply_transposed(fit.state.lambdat(), u));
  }
  for (Index i = 0; i < s.n(); ++i) mu(i) += noise_scale * sigma * z() / s.sqrtw(i);
  return mu;
}

Eigen::MatrixXd simulate(const FitResult& fit, Index nsim, std::uint64_t seed, SimulateMode mode, double noise_scale) {
  if (nsim < 0) fail("nsim must be non-negative");
  Eigen::MatrixXd out(fit.spec->n(), nsim);
  for (Index k = 0; k < nsim; ++k) {
    NormalStream z(stream_rng(seed, static_cast<std::uint64_t>(k)));
    out.col(k) = simulate_response(fit, z, mode, noise_scale);
  }
  return out;
}

Eigen::VectorXd predict(const FitResult& fit, const DataTable& newdata, bool conditional) {
  const ModelSpec& s = *fit.spec;
  std::vector<std::string> vars;
  add_vars(s.formula.fixed, vars);
  if (conditional)
    for (const auto& t : s.terms) add_vars(t.lhs, vars);
  DataTable nd;
  for (const auto& v : vars) nd.add(conform(s.frame.at(v), newdata));
  const Index n = static_cast<Index>(newdata.nrow());

  const DesignMatrix dm = build_X(s.formula.fixed, nd);
  if (dm.X.cols() != s.p()) fail("newdata produces a fixed-effects matrix with the wrong number of columns");
  Eigen::VectorXd out = dm.X * fit.beta();

  std::vector<std::string> offsets = s.formula.offsets;
  if (!s.offset_column.empty()) offsets.push_back(s.offset_column);
  for (const auto& o : offsets) {
    const Column& c = newdata_column(newdata, o);
    if (!c.is_numeric()) fail("offset column '" + o + "' must be numeric");
    out += Eigen::Map<const Eigen::VectorXd>(c.numbers.data(), n);
  }
  if (!conditional) return out;

  require_term_layout(s);
  for (const TermInfo& t : s.terms) {
    const Eigen::MatrixXd xi = build_X(t.lhs, nd).X;
    // An interaction grouping is matched on its components joined with ':'.
    std::vector<const Column*> gcols;
    if (newdata.has(t.group)) {
      gcols.push_back(&newdata_column(newdata, t.group));
    } else {
      std::size_t start = 0;
      for (std::size_t pos; (pos = t.group.find(':', start)) != std::string::npos; start = pos + 1)
        gcols.push_back(&newdata_column(newdata, t.group.substr(start, pos - start)));
      gcols.push_back(&newdata_column(newdata, t.group.substr(start)));
    }
    std::unordered_map<std::string, Index> index;
    for (Index k = 0; k < t.l; ++k) index.emplace(t.levels[k], k);
    for (Index r = 0; r < n; ++r) {
      std::string key;
      for (std::size_t g = 0; g < gcols.size(); ++g) {
        if (g) key += ':';
        key += gcols[g]->cell_text(static_cast<std::size_t>(r));
      }
      const auto it = index.find(key);
      if (it == index.end()) fail("level '" + key + "' of grouping factor '" + t.group + "' does not occur in the fitted data");
      out(r) += xi.row(r).dot(fit.b().segment(t.z_offset + it->second * t.p, t.p));
    }
  }
  return out;
}

std::vector<Interval> confint_wald(const FitResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) fail("confidence level must be in (0, 1)");
  const double z = qnorm(0.5 * (1.0 + level));
  const Eigen::VectorXd se = se_fixef(fit);
  std::vector<Interval> out;
  for (Index j = 0; j < fit.spec->p(); ++j) {
    out.push_back({fit.spec->xnames[j], fit.beta()(j) - z * se(j), fit.beta()(j) + z * se(j)});
  }
  return out;
}

std::vector<AnovaRow> anova_seq(const FitResult& fit) {
  const ModelSpec& s = *fit.spec;
  const Eigen::VectorXd effects = fit.state.RX().triangularView<Eigen::Upper>() * fit.beta();
  std::vector<AnovaRow> out;
  for (const FixedTermInfo& ft : s.fixed_terms) {
    if (ft.name == "(Intercept)" || ft.ncol == 0) continue;
    const double ss = effects.segment(ft.first_col, ft.ncol).squaredNorm();
    const double ms = ss / static_cast<double>(ft.ncol);
    out.push_back({ft.name, ft.ncol, ss, ms, ms / fit.sigma2()});
  }
  return out;
}

std::vector<CompareRow> anova_compare(const std::vector<const FitResult*>& fits, const std::vector<std::string>& names) {
  if (fits.empty()) fail("no models to compare");
  if (names.size() != fits.size()) fail("every model needs a name");
  const Index n = fits.front()->spec->n();
  std::vector<FitResult> ml;
  for (const FitResult* f : fits) {
    if (f->spec->n() != n) fail("models were fitted to different numbers of observations");
    ml.push_back(refit_ml(*f));
  }
  std::vector<std::size_t> order(ml.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ml[a].df() < ml[b].df(); });

  std::vector<CompareRow> out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const FitResult& f = ml[order[k]];
    CompareRow row{names[order[k]], f.df(), f.aic(), f.bic(), f.loglik(), f.deviance(), kNaN, kNaN, kNaN};
    if (k > 0) {
      const CompareRow& prev = out.back();
      row.chisq = prev.deviance - row.deviance;
      row.chi_df = static_cast<double>(row.df - prev.df);
      if (row.chi_df > 0.0) row.p = pchisq_upper(row.chisq, row.chi_df);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace lmm

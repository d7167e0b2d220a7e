#include "lmm/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "lmm/formula.hpp"
#include "lmm/params.hpp"

namespace lmm::cli {
namespace {

// Rows of string cells; the first `left` columns are left-aligned, the rest right.
class Table {
 public:
  explicit Table(std::vector<std::string> header, std::size_t left = 1) : left_(left) {
    rows_.push_back(std::move(header));
  }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& os, const std::string& indent = "") const {
    std::vector<std::size_t> w;
    for (const auto& r : rows_) {
      if (w.size() < r.size()) w.resize(r.size(), 0);
      for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
    }
    for (const auto& r : rows_) {
      std::string line = indent;
      for (std::size_t c = 0; c < r.size(); ++c) {
        const std::string pad(w[c] - r[c].size(), ' ');
        if (c > 0) line += ' ';
        line += c < left_ ? r[c] + pad : pad + r[c];
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      os << line << '\n';
    }
  }

 private:
  std::size_t left_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double x, int prec) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  return strf("%.*f", prec, x);
}

std::string sig(double x, int digits) {
  if (!std::isfinite(x)) return num(x, 0);
  return strf("%.*g", digits, x);
}

std::string pval(double p) {
  if (std::isnan(p)) return "";
  if (p < 2.2e-16) return "< 2.2e-16";
  return sig(p, 2);
}

Json intervals_json(const std::vector<Interval>& ci) {
  Json out = Json::array();
  for (const auto& i : ci) out.push_back({{"name", i.name}, {"lower", number(i.lower)}, {"upper", number(i.upper)}});
  return out;
}

void print_intervals(std::ostream& os, const std::vector<Interval>& ci, double level) {
  const std::string lo = sig(50.0 * (1.0 - level), 4) + " %";
  const std::string hi = sig(50.0 * (1.0 + level), 4) + " %";
  Table t({"", lo, hi});
  for (const auto& i : ci) t.add({i.name, num(i.lower, 4), num(i.upper, 4)});
  t.print(os);
}

std::vector<std::pair<std::string, Index>> groups(const ModelSpec& s) {
  std::vector<std::pair<std::string, Index>> out;
  for (const auto& t : s.terms) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& g) { return g.first == t.group; });
    if (!seen) out.emplace_back(t.group, t.l);
  }
  return out;
}

}  // namespace

std::string strf(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  va_list ap2;
  va_copy(ap2, ap);
  const int len = std::vsnprintf(nullptr, 0, fmt, ap);
  va_end(ap);
  std::string out(static_cast<std::size_t>(std::max(len, 0)), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, ap2);
  va_end(ap2);
  return out;
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return out;
}

Json fit_json(const FitResult& fit, const std::string& data_label) {
  const ModelSpec& s = *fit.spec;
  Json j;
  j["formula"] = to_display_string(s.formula);
  j["data"] = data_label;
  j["reml"] = fit.reml();
  j["nobs"] = s.n();
  j["criterion"] = number(fit.criterion);
  j["df"] = fit.df();
  j["logLik"] = number(fit.loglik());
  j["AIC"] = number(fit.aic());
  j["BIC"] = number(fit.bic());
  j["deviance"] = number(fit.deviance());
  j["df_resid"] = s.n() - s.p();
  j["theta"] = to_json(fit.theta());
  j["sigma"] = number(fit.sigma());

  const Eigen::VectorXd r = residuals(fit, ResidualKind::PearsonScaled);
  const std::vector<double> rv(r.data(), r.data() + r.size());
  j["scaled_residuals"] = {{"min", number(quantile(rv, 0.0))},    {"q1", number(quantile(rv, 0.25))},
                           {"median", number(quantile(rv, 0.5))}, {"q3", number(quantile(rv, 0.75))},
                           {"max", number(quantile(rv, 1.0))}};

  Json vc = Json::array();
  for (const auto& rec : varcorr(fit).records())
    vc.push_back({{"grp", rec.grp}, {"var1", rec.var1}, {"var2", rec.var2}, {"vcov", number(rec.vcov)},
                  {"sdcor", number(rec.sdcor)}});
  j["varcorr"] = vc;

  Json g = Json::array();
  for (const auto& [name, levels] : groups(s)) g.push_back({{"name", name}, {"levels", levels}});
  j["groups"] = g;

  Json fe = Json::array();
  if (s.p() > 0) {
    const Eigen::VectorXd se = se_fixef(fit);
    const Eigen::VectorXd t = t_values(fit);
    for (Index k = 0; k < s.p(); ++k)
      fe.push_back({{"name", s.xnames[static_cast<std::size_t>(k)]}, {"estimate", number(fit.beta()(k))},
                    {"std_error", number(se(k))}, {"t_value", number(t(k))}});
    j["fixef"] = fe;
    j["vcov"] = to_json(vcov_fixef(fit));
    j["cor_fixef"] = to_json(cor_fixef(fit));
  } else {
    j["fixef"] = fe;
    j["vcov"] = Json::array();
    j["cor_fixef"] = Json::array();
  }

  Json b = Json::array();
  for (bool x : fit.opt.boundary) b.push_back(x);
  j["optimizer"] = {{"n_eval", fit.opt.n_eval}, {"converged", fit.opt.converged}, {"boundary", b}};
  return j;
}

void print_fit(std::ostream& os, const FitResult& fit, const std::string& data_label) {
  const ModelSpec& s = *fit.spec;
  os << "Linear mixed model fit by " << (fit.reml() ? "REML" : "maximum likelihood") << '\n';
  os << "Formula: " << to_display_string(s.formula) << '\n';
  os << "   Data: " << data_label << "\n\n";
  if (fit.reml()) {
    os << "REML criterion at convergence: " << num(fit.criterion, 1) << "\n\n";
  } else {
    Table t({"AIC", "BIC", "logLik", "deviance", "df.resid"}, 0);
    t.add({num(fit.aic(), 1), num(fit.bic(), 1), num(fit.loglik(), 1), num(fit.deviance(), 1),
           std::to_string(s.n() - s.p())});
    t.print(os, " ");
    os << '\n';
  }

  const Eigen::VectorXd r = residuals(fit, ResidualKind::PearsonScaled);
  const std::vector<double> rv(r.data(), r.data() + r.size());
  os << "Scaled residuals:\n";
  Table q({"Min", "1Q", "Median", "3Q", "Max"}, 0);
  q.add({num(quantile(rv, 0.0), 4), num(quantile(rv, 0.25), 4), num(quantile(rv, 0.5), 4),
         num(quantile(rv, 0.75), 4), num(quantile(rv, 1.0), 4)});
  q.print(os);
  os << '\n';

  os << "Random effects:\n";
  const VarCorr vc = varcorr(fit);
  Table re({"Groups", "Name", "Variance", "Std.Dev.", "Corr"}, 2);
  for (const auto& blk : vc.blocks) {
    for (std::size_t k = 0; k < blk.names.size(); ++k) {
      const Index i = static_cast<Index>(k);
      std::string corr;
      for (Index c = 0; c < i; ++c) {
        const bool free = std::any_of(blk.free_pairs.begin(), blk.free_pairs.end(),
                                      [&](const auto& pr) { return pr.first == i && pr.second == c; });
        if (!free) continue;
        if (!corr.empty()) corr += ' ';
        corr += num(blk.cor(i, c), 2);
      }
      re.add({k == 0 ? blk.group : "", blk.names[k], sig(blk.cov(i, i), 5), sig(blk.sd(i), 5), corr});
    }
  }
  re.add({"Residual", "", sig(vc.residual_sd * vc.residual_sd, 5), sig(vc.residual_sd, 5), ""});
  re.print(os, " ");
  os << "Number of obs: " << s.n();
  const auto g = groups(s);
  if (!g.empty()) {
    os << ", groups:";
    for (std::size_t k = 0; k < g.size(); ++k) os << (k ? "; " : "  ") << g[k].first << ", " << g[k].second;
  }
  os << "\n\n";

  if (s.p() > 0) {
    os << "Fixed effects:\n";
    const Eigen::VectorXd se = se_fixef(fit);
    const Eigen::VectorXd t = t_values(fit);
    Table fe({"", "Estimate", "Std. Error", "t value"});
    for (Index k = 0; k < s.p(); ++k)
      fe.add({s.xnames[static_cast<std::size_t>(k)], num(fit.beta()(k), 4), num(se(k), 4), num(t(k), 3)});
    fe.print(os);
    if (s.p() > 1) {
      os << "\nCorrelation of Fixed Effects:\n";
      const Eigen::MatrixXd c = cor_fixef(fit);
      std::vector<std::string> head{""};
      for (Index k = 0; k + 1 < s.p(); ++k) {
        const std::string& n = s.xnames[static_cast<std::size_t>(k)];
        head.push_back(n == "(Intercept)" ? "(Intr)" : n.substr(0, 6));
      }
      Table ct(head);
      for (Index i = 1; i < s.p(); ++i) {
        std::vector<std::string> row{s.xnames[static_cast<std::size_t>(i)]};
        for (Index k = 0; k < i; ++k) row.push_back(num(c(i, k), 3));
        ct.add(row);
      }
      ct.print(os);
    }
  }
  if (!fit.opt.converged) os << "\nwarning: optimizer stopped at the evaluation limit\n";
  if (std::find(fit.opt.boundary.begin(), fit.opt.boundary.end(), true) != fit.opt.boundary.end())
    os << "\nboundary (singular) fit\n";
}

Json profile_json(const ProfileResult& prof, double level) {
  Json j;
  j["cutoff"] = number(prof.cutoff);
  j["base_deviance"] = number(prof.base_deviance);
  Json ps = Json::array();
  for (const auto& p : prof.params) {
    Json pts = Json::array();
    for (const auto& pt : p.points) pts.push_back({{"value", number(pt.value)}, {"zeta", number(pt.zeta)}});
    ps.push_back({{"name", p.param.name},
                  {"kind", to_string(p.param.kind)},
                  {"estimate", number(p.estimate)},
                  {"monotone", p.monotone},
                  {"stopped_at_lower", p.stopped_at_lower},
                  {"stopped_at_upper", p.stopped_at_upper},
                  {"points", pts}});
  }
  j["params"] = ps;
  j["level"] = level;
  j["confint"] = intervals_json(confint_profile(prof, level));
  j["warnings"] = prof.warnings;
  return j;
}

void print_profile(std::ostream& os, const ProfileResult& prof, double level) {
  os << "Profile cutoff: " << num(prof.cutoff, 4) << "  base deviance: " << num(prof.base_deviance, 4) << "\n\n";
  for (const auto& p : prof.params) {
    os << p.param.name << " (" << to_string(p.param.kind) << ")\n";
    Table t({"", "value", "zeta"});
    for (std::size_t k = 0; k < p.points.size(); ++k)
      t.add({std::to_string(k + 1), sig(p.points[k].value, 7), num(p.points[k].zeta, 4)});
    t.print(os, "  ");
    os << '\n';
  }
  print_intervals(os, confint_profile(prof, level), level);
  for (const auto& w : prof.warnings) os << "warning: " << w << '\n';
}

Json bootstrap_json(const BootResult& boot, double level) {
  Json j;
  j["nsim"] = boot.nsim;
  j["seed"] = boot.seed;
  j["failures"] = boot.failures;
  j["names"] = boot.names;
  j["replicate"] = boot.replicate;
  j["draws"] = to_json(boot.draws);
  j["level"] = level;
  j["confint"] = intervals_json(confint_boot(boot, level));
  return j;
}

void print_bootstrap(std::ostream& os, const BootResult& boot, double level) {
  os << "Parametric bootstrap: nsim " << boot.nsim << ", seed " << boot.seed << ", failures " << boot.failures
     << "\n\n";
  std::vector<std::string> head{"replicate"};
  head.insert(head.end(), boot.names.begin(), boot.names.end());
  Table t(head);
  for (Index r = 0; r < boot.draws.rows(); ++r) {
    std::vector<std::string> row{std::to_string(boot.replicate[static_cast<std::size_t>(r)] + 1)};
    for (Index c = 0; c < boot.draws.cols(); ++c) row.push_back(sig(boot.draws(r, c), 6));
    t.add(row);
  }
  t.print(os);
  os << '\n';
  print_intervals(os, confint_boot(boot, level), level);
}

Json anova_json(const std::vector<AnovaRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"term", r.term}, {"df", r.df}, {"sum_sq", number(r.sum_sq)}, {"mean_sq", number(r.mean_sq)},
                   {"f", number(r.f)}});
  return out;
}

void print_anova(std::ostream& os, const std::vector<AnovaRow>& rows) {
  os << "Analysis of Variance Table\n";
  Table t({"", "Df", "Sum Sq", "Mean Sq", "F value"});
  for (const auto& r : rows) t.add({r.term, std::to_string(r.df), sig(r.sum_sq, 6), sig(r.mean_sq, 6), num(r.f, 4)});
  t.print(os);
}

Json compare_json(const std::vector<CompareRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"model", r.model},
                   {"df", r.df},
                   {"aic", number(r.aic)},
                   {"bic", number(r.bic)},
                   {"loglik", number(r.loglik)},
                   {"deviance", number(r.deviance)},
                   {"chisq", number(r.chisq)},
                   {"chi_df", number(r.chi_df)},
                   {"p", number(r.p)}});
  return out;
}

void print_compare(std::ostream& os, const std::vector<CompareRow>& rows) {
  os << "Models:\n";
  for (const auto& r : rows) os << r.model << '\n';
  Table t({"", "Df", "AIC", "BIC", "logLik", "deviance", "Chisq", "Chi Df", "Pr(>Chisq)"});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    t.add({"m" + std::to_string(k + 1), std::to_string(r.df), num(r.aic, 2), num(r.bic, 2), num(r.loglik, 2),
           num(r.deviance, 3), std::isnan(r.chisq) ? "" : num(r.chisq, 4),
           std::isnan(r.chi_df) ? "" : sig(r.chi_df, 3), pval(r.p)});
  }
  t.print(os);
}

}  // namespace lmm::cli

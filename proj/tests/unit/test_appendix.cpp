#include <doctest.h>

#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "lmm/inference.hpp"
#include "lmm/params.hpp"
#include "lmm/rng.hpp"

using namespace lmm;

namespace {

// Crossed 50×50 design with correlated random intercepts and slopes that
// both grouping factors share: var(int) = 1, var(slope) = 2, cov = −1.
DataTable homogeneous_data(std::uint64_t seed) {
  const int g = 50;
  NormalStream z(stream_rng(seed, 0));
  std::vector<double> x1(g * g), x2(g * g);
  for (auto& v : x1) v = z();
  for (auto& v : x2) v = z();
  std::vector<double> a1(g), a2(g), s1(g), s2(g);
  for (auto& v : a1) v = z();
  for (auto& v : a2) v = z();
  for (int i = 0; i < g; ++i) s1[i] = z() - a1[i];
  for (int i = 0; i < g; ++i) s2[i] = z() - a2[i];

  std::vector<double> y(g * g);
  std::vector<std::string> f1(g * g), f2(g * g);
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < g; ++i) {
      const int r = j * g + i;
      y[r] = a1[i] + s1[i] * x1[r] + a2[j] + s2[j] * x2[r] + z();
      f1[r] = std::to_string(i + 1);
      f2[r] = std::to_string(j + 1);
    }
  DataTable d;
  d.add(Column::numeric("respVar", y));
  d.add(Column::numeric("explVar1", x1));
  d.add(Column::numeric("explVar2", x2));
  d.add(Column::categorical("groupFac1", f1));
  d.add(Column::categorical("groupFac2", f2));
  return d;
}

}  // namespace

TEST_CASE("homogeneous variance on sleepstudy") {
  const ModelSpec base = build_spec("Reaction ~ Days + (Days|Subject)", sleepstudy());
  auto spec = std::make_shared<const ModelSpec>(homogeneous_variance(base));
  const FitResult f = fit_model(spec);
  CHECK(f.reml());
  CHECK(f.theta().size() == 1);

  const VarCorr vc = varcorr(f);
  REQUIRE(vc.blocks.size() == 1);
  CHECK(vc.blocks[0].sd.size() == 1);
  const double sigma = f.sigma();
  const double subject = vc.blocks[0].sd(0);
  CHECK(subject == doctest::Approx(sigma * f.theta()(0)).epsilon(1e-12));
  CHECK(std::abs(sigma - 27.374) < 0.05);
  CHECK(std::abs(subject - 8.899) < 0.05);
  CHECK(std::abs(f.criterion - 1759) < 1.0);
  // Same fixed effects as the unrestricted fit to the printed digits.
  CHECK(std::abs(f.beta()(0) - 251.4) < 0.05);
  CHECK(std::abs(f.beta()(1) - 10.5) < 0.05);

  const std::vector<ParamInfo> params = model_params(*spec);
  CHECK(params.size() == 4);
  CHECK(params[0].kind == ParamKind::Sd);
}

TEST_CASE("homogeneous covariance across two crossed terms") {
  const DataTable d = homogeneous_data(1);
  BuildOptions ml;
  ml.reml = false;
  const ModelSpec hetero = build_spec("respVar ~ 1 + (explVar1|groupFac1) + (explVar2|groupFac2)", d, ml);
  auto spec = std::make_shared<const ModelSpec>(homogeneous_covariance(hetero));
  CHECK(spec->m() == 3);
  const FitResult f = fit_model(spec);
  CHECK_FALSE(f.reml());

  const VarCorr vc = varcorr(f);
  REQUIRE(vc.blocks.size() == 2);
  CHECK(vc.blocks[0].cov == vc.blocks[1].cov);
  CHECK(vc.blocks[0].group == "groupFac1");
  CHECK(vc.blocks[1].group == "groupFac2");

  const Eigen::MatrixXd& s = vc.blocks[0].cov;
  const double cor = s(1, 0) / std::sqrt(s(0, 0) * s(1, 1));
  MESSAGE("shared block: var " << s(0, 0) << ", " << s(1, 1) << "; cor " << cor << "; residual var "
                               << f.sigma2() << "; loglik " << f.loglik());
  // 50 levels per factor: the estimates sit within a few standard errors of
  // the generating values.
  CHECK(std::abs(s(0, 0) - 1.0) < 0.5);
  CHECK(std::abs(s(1, 1) - 2.0) < 0.8);
  CHECK(std::abs(cor + std::sqrt(0.5)) < 0.15);
  CHECK(std::abs(f.sigma2() - 1.0) < 0.1);

  // The heterogeneous fit at the replicated θ has the same deviance.
  Eigen::VectorXd th(6);
  th << f.theta(), f.theta();
  DevState full(std::make_shared<const ModelSpec>(hetero));
  CHECK(full.evaluate(th) == doctest::Approx(f.criterion).epsilon(1e-10));
  // And freeing the blocks can only improve it.
  const FitResult free = fit_model(std::make_shared<const ModelSpec>(hetero));
  CHECK(free.criterion <= f.criterion + 1e-6);
}

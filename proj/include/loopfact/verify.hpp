#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "loopfact/io.hpp"

// Named verification suites: seeded random batteries over the module
// operations, each reporting per-check trial counts, failure counts, and
// worst residuals. Reports are deterministic for a fixed seed and build;
// wall time is kept out of the serialized forms so repeated runs are
// byte-identical.

namespace loopfact {

struct VerifySettings {
  std::string form = "un+";
  int n = 2;
  int k = 1;
  int degree = 3;
  double amplitude = 0.8;
  int trunc = 16;
  double tol = 1e-8;
  int trials = 100;
  std::uint64_t seed = 1;
};

struct VerifyCheck {
  std::string name;
  long trials = 0;
  long failures = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool pass() const { return failures == 0 && worst <= tolerance; }
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  bool pass() const {
    for (const VerifyCheck& c : checks)
      if (!c.pass()) return false;
    return true;
  }
};

inline Json report_to_json(const VerifyReport& rep) {
  Json checks = Json::array();
  for (const VerifyCheck& c : rep.checks)
    checks.push_back(Json{{"name", c.name},
                          {"trials", c.trials},
                          {"failures", c.failures},
                          {"worst_residual", c.worst},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass()}});
  return Json{
      {"suite", rep.suite}, {"pass", rep.pass()}, {"checks", std::move(checks)}};
}

inline std::string report_to_text(const VerifyReport& rep) {
  std::string out = "suite " + rep.suite + ": " +
                    (rep.pass() ? "PASS" : "FAIL") + "\n";
  for (const VerifyCheck& c : rep.checks) {
    out += "  " + c.name + ": " + (c.pass() ? "pass" : "FAIL") +
           " trials " + std::to_string(c.trials) + " failures " +
           std::to_string(c.failures) + " worst " + detail::fmt(c.worst) +
           " tol " + detail::fmt(c.tolerance) + "\n";
  }
  return out;
}

namespace detail {

inline VerifyCheck make_check(std::string name, double tolerance) {
  VerifyCheck c;
  c.name = std::move(name);
  c.tolerance = tolerance;
  return c;
}

inline void record(VerifyCheck& c, double value) {
  ++c.trials;
  c.worst = std::max(c.worst, value);
}

// Constant element of the residual subgroup fixed by every involution of
// the block form including the second-kind one: block rotations that leave
// the distinguished middle coordinate alone.
inline Mat random_block_rotation(int n, int k, Rng& rng) {
  const int m = n + k + 1;
  RealMat r = RealMat::Identity(m, m);
  if (n > 1) r.topLeftCorner(n, n) = rng.special_orthogonal(n);
  if (k > 1) r.bottomRightCorner(k, k) = rng.special_orthogonal(k);
  return r.cast<Complex>();
}

inline VerifyReport verify_birkhoff(const std::string& suite,
                                    const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  VerifyReport rep;
  rep.suite = suite;
  VerifyCheck residual = make_check("split-residual", s.tol);
  VerifyCheck membership = make_check("factor-membership", 10.0 * s.tol);
  VerifyCheck winding = make_check("det-winding", 0.0);
  for (int t = 0; t < s.trials; ++t) {
    const int deg = 1 + t % std::max(1, s.degree);
    const RandomLoop rl = random_loop(f, deg, s.amplitude, s.seed + 2 * t);
    try {
      const BirkhoffFactors fac = factor_in_form(f, rl.group, s.trunc, s.tol);
      record(residual, fac.residual);
      record(membership,
             std::max(fac.minus_membership, fac.plus_membership));
      record(winding, std::abs(fac.cell.det_winding));
    } catch (const Error&) {
      ++residual.failures;
      ++membership.failures;
      ++winding.failures;
    }
  }
  rep.checks = {residual, membership, winding};
  return rep;
}

inline VerifyReport verify_iwasawa(const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  if (!f.tau)
    throw ParameterViolationError(
        "this suite needs a form with a second-kind symmetry");
  VerifyReport rep;
  rep.suite = "thm2";
  VerifyCheck residual = make_check("product-residual", s.tol);
  VerifyCheck fixedness = make_check("fixed-point-residual", s.tol);
  IwasawaOptions opt;
  opt.m = s.trunc;
  opt.tol = s.tol;
  for (int t = 0; t < s.trials; ++t) {
    const int deg = 1 + t % std::max(1, s.degree);
    const RandomLoop rl = random_loop(f, deg, s.amplitude, s.seed + 2 * t);
    try {
      const IwasawaFactors fac = iwasawa_factor(f, rl.group, opt);
      record(residual, fac.residual);
      record(fixedness, fac.z_fixed_residual);
    } catch (const Error&) {
      ++residual.failures;
      ++fixedness.failures;
    }
  }
  rep.checks = {residual, fixedness};
  return rep;
}

inline VerifyReport verify_uniqueness_suite(const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  if (!f.tau)
    throw ParameterViolationError(
        "this suite needs a form with a second-kind symmetry");
  VerifyReport rep;
  rep.suite = "thm2a";
  VerifyCheck drift = make_check("recanonicalized-drift", s.tol);
  VerifyCheck link = make_check("constant-link-recovery", s.tol);
  IwasawaOptions opt;
  opt.m = s.trunc;
  opt.tol = s.tol;
  Rng rng(s.seed);
  for (int t = 0; t < s.trials; ++t) {
    const int deg = 1 + t % std::max(1, s.degree);
    const RandomLoop rl = random_loop(f, deg, s.amplitude, rng.next_seed());
    try {
      const IwasawaFactors fac = iwasawa_factor(f, rl.group, opt);
      const LaurentLoop zc = canonical_frame(s.n, s.k, fac.z_tau);
      const Mat h = random_block_rotation(s.n, s.k, rng);
      const LaurentLoop shifted = multiply(zc, LaurentLoop::constant(h));
      const LaurentLoop back = canonical_frame(s.n, s.k, shifted);
      record(drift, max_coeff_diff(back, zc));
      const ConstantLink cl = verify_uniqueness(f, zc, shifted, s.tol);
      record(link, op_norm(Mat(cl.h - h)));
    } catch (const Error&) {
      ++drift.failures;
      ++link.failures;
    }
  }
  rep.checks = {drift, link};
  return rep;
}

inline VerifyReport verify_dressing(const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  if (!f.tau)
    throw ParameterViolationError(
        "this suite needs a form with a second-kind symmetry");
  VerifyReport rep;
  rep.suite = "dressing";
  VerifyCheck identity = make_check("identity-dressing", 10.0 * s.tol);
  VerifyCheck composed = make_check("composition-agreement", 100.0 * s.tol);
  const int fields = std::min(s.n, s.k + 1);
  const VacuumFamily fam = vacuum_generators(s.n, s.k, fields, 0.3, s.seed);
  const GridFrame vac =
      integrate_vacuum(fam, centered_grid(fields, 3, 0.15));
  {
    const GridFrame same = dress(vac, LaurentLoop::identity(f.size));
    double worst = 0.0;
    for (std::size_t p = 0; p < vac.values.size(); ++p) {
      const LaurentLoop direct = canonical_frame(s.n, s.k, vac.values[p]);
      worst = std::max(worst, max_coeff_diff(same.values[p], direct));
    }
    identity.trials = 1;
    identity.worst = worst;
  }
  Rng rng(s.seed + 1);
  for (int t = 0; t < s.trials; ++t) {
    try {
      const LaurentLoop g =
          random_dressing(f, std::max(1, s.degree), s.amplitude,
                          rng.next_seed());
      const LaurentLoop h =
          random_dressing(f, std::max(1, s.degree), s.amplitude,
                          rng.next_seed());
      const GridFrame two_step = dress(dress(vac, h), g);
      const GridFrame one_step = dress(vac, multiply(g, h));
      double worst = 0.0;
      for (std::size_t p = 0; p < two_step.values.size(); ++p)
        worst = std::max(
            worst, max_coeff_diff(two_step.values[p], one_step.values[p]));
      record(composed, worst);
    } catch (const Error&) {
      ++composed.failures;
    }
  }
  rep.checks = {identity, composed};
  return rep;
}

inline VerifyReport verify_reality(const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  VerifyReport rep;
  rep.suite = "reality";
  VerifyCheck unitary = make_check("unitary-at-symmetric-points", s.tol);
  const bool orth =
      f.base.core == Core::Conjugate || !f.extras.empty();
  VerifyCheck orthogonal = make_check("orthogonal-at-symmetric-points", s.tol);
  // Rotation -1 symmetries distinguish the quarter points of the circle,
  // rotation +1 the half points.
  const bool quarter = f.base.rotation < 0.0;
  const std::vector<Complex> pts =
      quarter ? std::vector<Complex>{Complex(0, 1), Complex(0, -1)}
              : std::vector<Complex>{Complex(1, 0), Complex(-1, 0)};
  for (int t = 0; t < s.trials; ++t) {
    const int deg = 1 + t % std::max(1, s.degree);
    const RandomLoop rl = random_loop(f, deg, s.amplitude, s.seed + 2 * t);
    for (const Complex lambda : pts) {
      const Mat e = eval(rl.group, lambda);
      record(unitary,
             op_norm(Mat(e.adjoint() * e - Mat::Identity(f.size, f.size))));
      if (orth)
        record(orthogonal, op_norm(Mat(e.transpose() * e -
                                       Mat::Identity(f.size, f.size))));
    }
  }
  rep.checks = {unitary};
  if (orth) rep.checks.push_back(orthogonal);
  return rep;
}

inline VerifyReport verify_winding(const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  VerifyReport rep;
  rep.suite = "winding";
  VerifyCheck winding = make_check("det-winding", 0.0);
  for (int t = 0; t < s.trials; ++t) {
    const int deg = 1 + t % std::max(1, s.degree);
    const RandomLoop rl = random_loop(f, deg, s.amplitude, s.seed + 2 * t);
    record(winding, std::abs(winding_det(rl.group)));
  }
  rep.checks = {winding};
  return rep;
}

inline VerifyReport verify_retraction(const VerifySettings& s) {
  const RealForm f = named_form(s.form, s.n, s.k);
  VerifyReport rep;
  rep.suite = "retraction";
  VerifyCheck fixedness = make_check("path-fixedness", 1e-11);
  VerifyCheck top = make_check("endpoint-identity", 0.0);
  VerifyCheck bottom = make_check("endpoint-constant", 0.0);
  for (int t = 0; t < s.trials; ++t) {
    const int deg = 1 + t % std::max(1, s.degree);
    const RandomLoop rl = random_loop(f, deg, s.amplitude, s.seed + 2 * t);
    try {
      const BirkhoffFactors fac = factor_in_form(f, rl.group, s.trunc, s.tol);
      const LaurentLoop& y = fac.x_plus;
      for (const double u : {0.0, 0.25, 0.5, 0.75, 1.0})
        record(fixedness,
               fixed_residual_group(f, retraction(y, u, Side::Plus)));
      record(top, max_coeff_diff(retraction(y, 1.0, Side::Plus), y));
      const LaurentLoop y0 = retraction(y, 0.0, Side::Plus);
      record(bottom, y0.d_max() == 0 && y0.d_min() == 0
                         ? op_norm(Mat(y0.coeff(0) - y.coeff(0)))
                         : 1.0);
    } catch (const Error&) {
      ++fixedness.failures;
      ++top.failures;
      ++bottom.failures;
    }
  }
  rep.checks = {fixedness, top, bottom};
  return rep;
}

}  // namespace detail

inline VerifyReport run_verify(const std::string& suite,
                               const VerifySettings& s) {
  if (suite == "thm1" || suite == "thm1a")
    return detail::verify_birkhoff(suite, s);
  if (suite == "thm2") return detail::verify_iwasawa(s);
  if (suite == "thm2a") return detail::verify_uniqueness_suite(s);
  if (suite == "dressing") return detail::verify_dressing(s);
  if (suite == "reality") return detail::verify_reality(s);
  if (suite == "winding") return detail::verify_winding(s);
  if (suite == "retraction") return detail::verify_retraction(s);
  throw ParameterViolationError("unknown verify suite: " + suite);
}

}  // namespace loopfact

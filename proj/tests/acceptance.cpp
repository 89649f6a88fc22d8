// Acceptance gate: ten pinned-tolerance checks over the whole factorization
// stack, one pass/fail line each. Every check writes a deterministic report
// file (no wall times inside) and the final check reruns the other nine and
// byte-compares the reports. The exit code is the number of failed checks.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <loopfact/io.hpp>

using namespace loopfact;
using loopfact::detail::fmt;

namespace {

struct Crit {
  std::string title;
  bool pass = true;
  std::string report;
  double budget = 0.0;  // seconds; 0 means no pinned budget
};

int cyc_degree(int t) { return 1 + t % 3; }

std::string line(const std::string& label, double v) {
  return label + " " + fmt(v) + "\n";
}

std::string line(const std::string& label, long v) {
  return label + " " + std::to_string(v) + "\n";
}

// ---------------------------------------------------------------------------
// 1. Global splitting over compact unitary corpora.

Crit run_c1() {
  Crit c;
  c.title = "global splitting over compact unitary corpora";
  c.budget = 60.0;
  long rejected = 0, errors = 0, total = 0;
  double worst_res = 0.0, worst_mem = 0.0;
  std::uint64_t base = 1000;
  for (const int n : {2, 3}) {
    for (const double eps : {1.0, -1.0}) {
      const RealForm f = unitary_form(n, eps);
      for (int t = 0; t < 125; ++t, ++total) {
        const RandomLoop rl =
            random_loop(f, cyc_degree(t), 0.8, base + 2 * t);
        try {
          const BirkhoffFactors fac = factor_in_form(f, rl.group, 16);
          worst_res = std::max(worst_res, fac.residual);
          worst_mem = std::max(
              worst_mem, std::max(fac.minus_membership, fac.plus_membership));
        } catch (const NotInBigCellError&) {
          ++rejected;
        } catch (const Error&) {
          ++errors;
        }
      }
      base += 2000;
    }
  }
  c.pass = rejected == 0 && errors == 0 && worst_res <= 1e-8 &&
           worst_mem <= 1e-7;
  std::ostringstream os;
  os << "check 1: " << c.title << "\n"
     << line("loops", total) << line("rejections", rejected)
     << line("errors", errors)
     << line("worst remultiplication residual", worst_res)
     << line("worst factor membership", worst_mem)
     << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 2. Splitting constrained to the block form with extra symmetries.

Crit run_c2() {
  Crit c;
  c.title = "twisted splitting in the block form";
  c.budget = 60.0;
  const RealForm f = curved_flat_form(2, 1);
  long rejected = 0, errors = 0;
  double worst_res = 0.0, worst_mem = 0.0;
  for (int t = 0; t < 300; ++t) {
    const RandomLoop rl = random_loop(f, cyc_degree(t), 0.8, 9000 + 2 * t);
    try {
      const BirkhoffFactors fac = factor_in_form(f, rl.group, 16);
      worst_res = std::max(worst_res, fac.residual);
      worst_mem = std::max(
          worst_mem, std::max(fac.minus_membership, fac.plus_membership));
    } catch (const NotInBigCellError&) {
      ++rejected;
    } catch (const Error&) {
      ++errors;
    }
  }
  c.pass = rejected == 0 && errors == 0 && worst_res <= 1e-8 &&
           worst_mem <= 1e-7;
  std::ostringstream os;
  os << "check 2: " << c.title << "\n"
     << line("loops", 300L) << line("rejections", rejected)
     << line("errors", errors)
     << line("worst remultiplication residual", worst_res)
     << line("worst factor membership", worst_mem)
     << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 3. Loops outside the big cell are certified, with exact windings.

Crit run_c3() {
  Crit c;
  c.title = "big-cell exclusion certificates";
  Mat e00 = Mat::Zero(2, 2);
  e00(0, 0) = 1.0;
  Mat e11 = Mat::Zero(2, 2);
  e11(1, 1) = 1.0;
  const LaurentLoop hyper(2, -1, {e11, Mat::Zero(2, 2), e00});
  const LaurentLoop wind2(2, 0, {e11, Mat::Zero(2, 2), e00});
  const CellReport r1 = certify_big_cell(hyper, 16);
  const CellReport r2 = certify_big_cell(wind2, 16);
  const bool ok1 = !r1.in_big_cell && r1.det_winding == 0 &&
                   r1.smallest_singular_value <= 1e-10 * r1.scale;
  const bool ok2 = !r2.in_big_cell && r2.det_winding == 2 &&
                   r2.smallest_singular_value <= 1e-10 * r2.scale;
  c.pass = ok1 && ok2;
  std::ostringstream os;
  os << "check 3: " << c.title << "\n"
     << line("balanced loop winding", static_cast<long>(r1.det_winding))
     << line("balanced loop smallest singular value",
             r1.smallest_singular_value)
     << line("balanced loop scale", r1.scale)
     << line("unbalanced loop winding", static_cast<long>(r2.det_winding))
     << line("unbalanced loop smallest singular value",
             r2.smallest_singular_value)
     << line("unbalanced loop scale", r2.scale)
     << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 4. Determinant winding vanishes across the compact corpora, exactly.

Crit run_c4() {
  Crit c;
  c.title = "zero determinant winding across the corpora";
  long nonzero = 0, total = 0;
  long worst = 0;
  std::uint64_t base = 1000;
  for (const int n : {2, 3}) {
    for (const double eps : {1.0, -1.0}) {
      const RealForm f = unitary_form(n, eps);
      for (int t = 0; t < 125; ++t, ++total) {
        const RandomLoop rl =
            random_loop(f, cyc_degree(t), 0.8, base + 2 * t);
        const long w = winding_det(rl.group);
        if (w != 0) ++nonzero;
        worst = std::max(worst, std::abs(w));
      }
      base += 2000;
    }
  }
  c.pass = nonzero == 0 && worst == 0;
  std::ostringstream os;
  os << "check 4: " << c.title << "\n"
     << line("loops", total) << line("nonzero windings", nonzero)
     << line("largest magnitude", worst) << "numeric result "
     << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 5. Values at the symmetric circle points are unitary / orthogonal.

Crit run_c5() {
  Crit c;
  c.title = "reality at the symmetric circle points";
  double worst_half = 0.0;      // eps = +1 corpora at +-1
  double worst_quarter = 0.0;   // eps = -1 corpora at +-i
  double worst_block = 0.0;     // block form at +-i, unitary and orthogonal
  std::uint64_t base = 1000;
  for (const int n : {2, 3}) {
    for (const double eps : {1.0, -1.0}) {
      const RealForm f = unitary_form(n, eps);
      const Mat id = Mat::Identity(n, n);
      const std::vector<Complex> pts =
          eps > 0 ? std::vector<Complex>{Complex(1, 0), Complex(-1, 0)}
                  : std::vector<Complex>{Complex(0, 1), Complex(0, -1)};
      for (int t = 0; t < 125; ++t) {
        const RandomLoop rl =
            random_loop(f, cyc_degree(t), 0.8, base + 2 * t);
        for (const Complex p : pts) {
          const Mat e = eval(rl.group, p);
          const double u = op_norm(Mat(e.adjoint() * e - id));
          (eps > 0 ? worst_half : worst_quarter) =
              std::max(eps > 0 ? worst_half : worst_quarter, u);
        }
      }
      base += 2000;
    }
  }
  const RealForm bf = curved_flat_form(2, 1);
  const Mat bid = Mat::Identity(4, 4);
  for (int t = 0; t < 300; ++t) {
    const RandomLoop rl = random_loop(bf, cyc_degree(t), 0.8, 9000 + 2 * t);
    for (const Complex p : {Complex(0, 1), Complex(0, -1)}) {
      const Mat e = eval(rl.group, p);
      worst_block = std::max(worst_block,
                             op_norm(Mat(e.adjoint() * e - bid)));
      worst_block = std::max(worst_block,
                             op_norm(Mat(e.transpose() * e - bid)));
    }
  }
  c.pass = worst_half <= 1e-8 && worst_quarter <= 1e-8 && worst_block <= 1e-8;
  std::ostringstream os;
  os << "check 5: " << c.title << "\n"
     << line("worst unitarity at half points", worst_half)
     << line("worst unitarity at quarter points", worst_quarter)
     << line("worst block-form defect at quarter points", worst_block)
     << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 6. The parameter rescaling path stays inside the symmetric subgroup.

Crit run_c6() {
  Crit c;
  c.title = "parameter rescaling path";
  const RealForm f = curved_flat_form(2, 1);
  long errors = 0;
  double worst_fix = 0.0, worst_top = 0.0, worst_bottom = 0.0;
  for (int t = 0; t < 50; ++t) {
    const RandomLoop rl = random_loop(f, cyc_degree(t), 0.8, 9000 + 2 * t);
    try {
      const BirkhoffFactors fac = factor_in_form(f, rl.group, 16);
      const LaurentLoop& y = fac.x_plus;
      for (const double u : {0.0, 0.25, 0.5, 0.75, 1.0})
        worst_fix = std::max(
            worst_fix, fixed_residual_group(f, retraction(y, u, Side::Plus)));
      worst_top = std::max(
          worst_top, max_coeff_diff(retraction(y, 1.0, Side::Plus), y));
      worst_bottom = std::max(
          worst_bottom,
          max_coeff_diff(retraction(y, 0.0, Side::Plus),
                         LaurentLoop::constant(y.coeff(0))));
    } catch (const Error&) {
      ++errors;
    }
  }
  c.pass = errors == 0 && worst_fix <= 1e-11 && worst_top == 0.0 &&
           worst_bottom == 0.0;
  std::ostringstream os;
  os << "check 6: " << c.title << "\n"
     << line("factors", 50L) << line("errors", errors)
     << line("worst path fixedness", worst_fix)
     << line("endpoint mismatch at one", worst_top)
     << line("endpoint mismatch at zero", worst_bottom)
     << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 7. Second-kind splitting: residuals, branch health, uniqueness.

Crit run_c7() {
  Crit c;
  c.title = "second-kind splitting and uniqueness";
  c.budget = 120.0;
  const RealForm f = curved_flat_form(2, 1);
  long branch_failures = 0, errors = 0;
  double worst_res = 0.0, worst_fix = 0.0, worst_unique = 0.0;
  Rng rot_rng(12000);
  for (int t = 0; t < 300; ++t) {
    const RandomLoop rl = random_loop(f, cyc_degree(t), 0.5, 11000 + 2 * t);
    try {
      const IwasawaFactors fac = iwasawa_factor(f, rl.group);
      worst_res = std::max(worst_res, fac.residual);
      worst_fix = std::max(worst_fix, fac.z_fixed_residual);
      const LaurentLoop zc = canonical_frame(2, 1, fac.z_tau);
      Mat h = Mat::Identity(4, 4);
      h.topLeftCorner<2, 2>() =
          rot_rng.special_orthogonal(2).cast<Complex>();
      const LaurentLoop shifted = multiply(zc, LaurentLoop::constant(h));
      const ConstantLink link = verify_uniqueness(f, zc, shifted);
      worst_unique = std::max(worst_unique, op_norm(Mat(link.h - h)));
    } catch (const LogBranchFailureError&) {
      ++branch_failures;
    } catch (const Error&) {
      ++errors;
    }
  }
  c.pass = branch_failures == 0 && errors == 0 && worst_res <= 1e-8 &&
           worst_fix <= 1e-8 && worst_unique <= 1e-8;
  std::ostringstream os;
  os << "check 7: " << c.title << "\n"
     << line("loops", 300L) << line("branch failures", branch_failures)
     << line("errors", errors) << line("worst product residual", worst_res)
     << line("worst fixed-point residual", worst_fix)
     << line("worst uniqueness recovery", worst_unique) << "numeric result "
     << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 8. Dressing acts on frames: composition and connection-window health.

Crit run_c8() {
  Crit c;
  c.title = "dressing action on frames";
  c.budget = 180.0;
  const VacuumFamily fam = vacuum_generators(2, 1, 2, 0.4, 13000);
  const GridFrame vac = integrate_vacuum(fam, centered_grid(2, 11, 0.05));
  const GridFrame fine_vac =
      integrate_vacuum(fam, centered_grid(2, 2, 1e-3));
  const double vac_leak = maurer_cartan(fine_vac).max_leakage;
  long errors = 0;
  double worst_comp = 0.0, worst_leak_ratio = 0.0;
  Rng rng(13100);
  for (int t = 0; t < 10; ++t) {
    try {
      const LaurentLoop g = random_dressing(fam.form, 1, 0.3, rng.next_seed());
      const LaurentLoop h = random_dressing(fam.form, 1, 0.3, rng.next_seed());
      const GridFrame two_step = dress(dress(vac, h), g);
      const GridFrame one_step = dress(vac, multiply(g, h));
      double worst = 0.0;
      for (std::size_t p = 0; p < two_step.values.size(); ++p)
        worst = std::max(
            worst, max_coeff_diff(two_step.values[p], one_step.values[p]));
      worst_comp = std::max(worst_comp, worst);
      const double leak = maurer_cartan(dress(fine_vac, g)).max_leakage;
      worst_leak_ratio = std::max(worst_leak_ratio, leak / vac_leak);
    } catch (const Error&) {
      ++errors;
    }
  }
  c.pass = errors == 0 && worst_comp <= 1e-6 && worst_leak_ratio <= 10.0;
  std::ostringstream os;
  os << "check 8: " << c.title << "\n"
     << line("pairs", 10L) << line("errors", errors)
     << line("worst composition mismatch", worst_comp)
     << line("vacuum connection leakage", vac_leak)
     << line("worst dressed/vacuum leakage ratio", worst_leak_ratio)
     << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

// ---------------------------------------------------------------------------
// 9. Immersion demo: unit points, constant negative curvature, and the
// hyperbolic path's invariant form.

Crit run_c9() {
  Crit c;
  c.title = "immersion demo";
  c.budget = 120.0;
  std::ostringstream os;
  os << "check 9: " << c.title << "\n";
  bool pass = true;
  try {
    const VacuumFamily fam = vacuum_generators(2, 1, 2, 0.4, 123);
    const GridFrame vac = integrate_vacuum(fam, centered_grid(2, 21, 0.05));
    const LaurentLoop g = random_dressing(fam.form, 1, 0.6, 124);
    const GridFrame dressed = dress(vac, g);
    for (const Complex l0 : {Complex(0, 0.5), Complex(0, 1), Complex(0, 2)}) {
      const std::string tag =
          "spectral value " + fmt(l0.real()) + "+" + fmt(l0.imag()) + "i";
      const SurfaceSample s = extract_immersion(dressed, l0);
      os << line(tag + ": point residual", s.point_residual);
      bool leg = s.sphere && s.point_residual <= 1e-8;
      try {
        const CurvatureReport cr = curvature_report(s);
        os << line(tag + ": curvature mean", cr.mean)
           << line(tag + ": curvature stddev", cr.stddev)
           << line(tag + ": stencils excluded", cr.excluded);
        leg = leg && cr.mean < 0.0 &&
              cr.stddev <= 1e-2 * std::abs(cr.mean);
      } catch (const DegenerateMetricError&) {
        // The sample at this spectral value collapses to a constant point:
        // the symmetries freeze the read-off column there, so no curvature
        // exists to measure. Reported as a failing leg, not hidden.
        os << tag << ": curvature undefined, sample collapses to a constant "
                     "point\n";
        leg = false;
      }
      os << tag << ": " << (leg ? "pass" : "FAIL") << "\n";
      pass = pass && leg;
    }
    const SurfaceSample hyp = extract_immersion(dressed, Complex(1, 0));
    os << line("hyperbolic path: invariant form residual",
               hyp.invariant_residual)
       << line("hyperbolic path: point residual", hyp.point_residual);
    const bool hleg = !hyp.sphere && hyp.invariant_residual <= 1e-7;
    os << "hyperbolic path: " << (hleg ? "pass" : "FAIL") << "\n";
    pass = pass && hleg;
  } catch (const Error& e) {
    os << "error: " << e.what() << "\n";
    pass = false;
  }
  c.pass = pass;
  os << "numeric result " << (c.pass ? "PASS" : "FAIL") << "\n";
  c.report = os.str();
  return c;
}

using CritFn = Crit (*)();

}  // namespace

int main() {
  const std::filesystem::path out_dir = "acceptance_out";
  std::filesystem::create_directories(out_dir);
  const std::vector<CritFn> fns{run_c1, run_c2, run_c3, run_c4, run_c5,
                                run_c6, run_c7, run_c8, run_c9};
  int failed = 0;
  std::vector<std::string> first_reports;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Crit c = fns[i]();
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    first_reports.push_back(c.report);
    loopfact::detail::atomic_write_text(
        out_dir / ("c" + std::to_string(i + 1) + ".txt"), c.report);
    const bool in_budget = c.budget == 0.0 || sec <= c.budget;
    const bool ok = c.pass && in_budget;
    std::cout << "criterion " << i + 1 << " (" << c.title
              << "): " << (ok ? "PASS" : "FAIL") << " [" << fmt(sec)
              << " s]";
    if (!in_budget) std::cout << " budget " << fmt(c.budget) << " s exceeded";
    std::cout << "\n" << std::flush;
    if (!ok) ++failed;
  }

  // 10. Rerun everything with the same seeds; reports must be byte-identical.
  bool identical = true;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const Crit again = fns[i]();
    loopfact::detail::atomic_write_text(
        out_dir / ("c" + std::to_string(i + 1) + ".rerun.txt"), again.report);
    if (again.report != first_reports[i]) {
      identical = false;
      std::cout << "  rerun of criterion " << i + 1 << " differs\n";
    }
  }
  std::string c10 = "check 10: determinism of repeated runs\n";
  c10 += "reports compared 9\n";
  c10 += std::string("numeric result ") + (identical ? "PASS" : "FAIL") + "\n";
  loopfact::detail::atomic_write_text(out_dir / "c10.txt", c10);
  std::cout << "criterion 10 (determinism of repeated runs): "
            << (identical ? "PASS" : "FAIL") << "\n";
  if (!identical) ++failed;

  std::cout << (failed == 0 ? "all criteria passed"
                            : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed;
}

#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopfact/verify.hpp"

// Command-line surface. Every randomized command takes an explicit seed and
// identical invocations produce byte-identical output files. Exit codes:
// 0 success, 2 for a mathematically meaningful rejection (loop outside the
// big cell, logarithm branch obstruction), 1 for I/O and precondition errors.

namespace loopfact {
namespace detail {

inline double parse_full_double(const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw IoError("could not parse number: " + text);
  }
  if (pos != text.size()) throw IoError("could not parse number: " + text);
  return v;
}

// Accepts forms like "1", "-0.5", "i", "-i", "2i", "0.5i", "1+2i", "1-0.5i".
inline Complex parse_lambda(std::string text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw IoError("empty spectral value");
  if (s.back() != 'i') return Complex(parse_full_double(s), 0.0);
  s.pop_back();
  // Split a trailing imaginary term from an optional leading real term.
  std::size_t cut = std::string::npos;
  for (std::size_t j = 1; j < s.size(); ++j) {
    if (s[j] != '+' && s[j] != '-') continue;
    const char prev = s[j - 1];
    if (prev == 'e' || prev == 'E') continue;
    cut = j;
  }
  std::string re = cut == std::string::npos ? "" : s.substr(0, cut);
  std::string im = cut == std::string::npos ? s : s.substr(cut);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  const double imag = parse_full_double(im);
  const double real = re.empty() ? 0.0 : parse_full_double(re);
  return Complex(real, imag);
}

inline Json cell_to_json(const CellReport& r) {
  return Json{{"in_big_cell", r.in_big_cell},
              {"det_winding", r.det_winding},
              {"smallest_singular_value", r.smallest_singular_value},
              {"scale", r.scale},
              {"truncation", r.truncation}};
}

inline void print_cell(std::ostream& os, const CellReport& r) {
  os << "cell certificate: winding " << r.det_winding
     << " smallest singular value " << fmt(r.smallest_singular_value)
     << " scale " << fmt(r.scale) << " truncation " << r.truncation << "\n";
}

struct CliConfig {
  std::string kind;
  std::string input;
  std::string gminus;
  std::string which;
  std::string suite;
  std::string form;
  std::string lambda0 = "i";
  std::string out;
  int n = 2;
  int k = 1;
  int degree = 3;
  int trunc = 16;
  int grid = 21;
  int trials = 0;
  double amplitude = -1.0;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

inline int cmd_factor(const CliConfig& c) {
  const LaurentLoop x = read_loop_file(c.input);
  if (c.kind == "birkhoff") {
    BirkhoffFactors fac;
    if (c.form.empty()) {
      BirkhoffOptions opt;
      opt.tol = c.tol;
      fac = birkhoff_factor(x, c.trunc, opt);
    } else {
      const RealForm f = named_form(c.form, c.n, c.k);
      if (f.size != x.size())
        throw ParameterViolationError("loop size does not match the form");
      fac = factor_in_form(f, x, c.trunc, c.tol);
    }
    write_loop_file(c.out + ".minus.json", fac.x_minus);
    write_loop_file(c.out + ".plus.json", fac.x_plus);
    Json diag{{"kind", "birkhoff"},
              {"residual", fac.residual},
              {"minus_membership", fac.minus_membership},
              {"plus_membership", fac.plus_membership},
              {"cell", cell_to_json(fac.cell)}};
    atomic_write_text(c.out + ".diag.json", diag.dump(2) + "\n");
    std::cout << "birkhoff split: residual " << fmt(fac.residual)
              << " winding " << fac.cell.det_winding << "\n";
    return 0;
  }
  const std::string name = c.form.empty() ? "so-curved-flat" : c.form;
  const RealForm f = named_form(name, c.n, c.k);
  if (f.size != x.size())
    throw ParameterViolationError("loop size does not match the form");
  IwasawaOptions opt;
  opt.m = c.trunc;
  opt.tol = c.tol;
  const IwasawaFactors fac = iwasawa_factor(f, x, opt);
  write_loop_file(c.out + ".z.json", fac.z_tau);
  write_loop_file(c.out + ".yplus.json", fac.y_plus);
  Json diag{{"kind", "iwasawa"},
            {"residual", fac.residual},
            {"z_fixed_residual", fac.z_fixed_residual}};
  atomic_write_text(c.out + ".diag.json", diag.dump(2) + "\n");
  std::cout << "iwasawa split: residual " << fmt(fac.residual)
            << " fixed-point residual " << fmt(fac.z_fixed_residual) << "\n";
  return 0;
}

inline int cmd_verify(const CliConfig& c) {
  VerifySettings s;
  s.form = c.form;
  s.n = c.n;
  s.k = c.k;
  s.degree = c.degree;
  s.amplitude = c.amplitude;
  s.trunc = c.trunc;
  s.tol = c.tol;
  s.trials = c.trials;
  s.seed = c.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport rep = run_verify(c.suite, s);
  const auto t1 = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
          t1 - t0)
          .count();
  // Wall time goes to the console only; report files stay byte-identical
  // across repeated runs of the same configuration.
  std::cout << report_to_text(rep);
  std::cout << "wall time " << fmt(ms) << " ms\n";
  if (!c.out.empty()) {
    atomic_write_text(c.out + ".txt", report_to_text(rep));
    atomic_write_text(c.out + ".json", report_to_json(rep).dump(2) + "\n");
  }
  return 0;
}

inline int cmd_rand(const CliConfig& c) {
  const RealForm f = named_form(c.form, c.n, c.k);
  const RandomLoop rl = random_loop(f, c.degree, c.amplitude, c.seed);
  write_loop_file(c.out, rl.group);
  std::cout << "wrote " << c.out << " (size " << f.size << " window ["
            << rl.group.d_min() << ", " << rl.group.d_max() << "])\n";
  return 0;
}

inline int cmd_dress(const CliConfig& c) {
  const GridFrame frame = read_frame_file(c.input);
  const LaurentLoop g = read_loop_file(c.gminus);
  IwasawaOptions opt;
  opt.m = c.trunc;
  opt.tol = c.tol;
  DressStats st;
  const GridFrame out = dress(frame, g, opt, &st);
  write_frame_file(c.out, out);
  std::cout << "dressed " << out.values.size()
            << " points: max residual " << fmt(st.max_residual)
            << " max symmetry residual " << fmt(st.max_fixed_residual)
            << "\n";
  return 0;
}

inline int cmd_demo(const CliConfig& c) {
  const Complex lambda0 = parse_lambda(c.lambda0);
  const int fields = std::min(c.n, c.k + 1);
  const double vac_amp =
      c.which == "flat" && c.amplitude > 0.0 ? c.amplitude : 0.4;
  const VacuumFamily fam =
      vacuum_generators(c.n, c.k, fields, vac_amp, c.seed);
  const GridFrame vac =
      integrate_vacuum(fam, centered_grid(fields, c.grid, 0.05));
  if (c.which == "flat") {
    write_frame_file(c.out + ".frame.json", vac);
    std::cout << "wrote " << c.out << ".frame.json (" << vac.values.size()
              << " points)\n";
    return 0;
  }
  const double dress_amp = c.amplitude > 0.0 ? c.amplitude : 0.6;
  const LaurentLoop g =
      random_dressing(fam.form, c.degree, dress_amp, c.seed + 1);
  const GridFrame dressed = dress(vac, g);
  write_frame_file(c.out + ".frame.json", dressed);
  const SurfaceSample sample = extract_immersion(dressed, lambda0, c.tol);
  write_surface_csv(c.out + ".surface.csv", sample);
  Json report{{"lambda0_re", lambda0.real()},
              {"lambda0_im", lambda0.imag()},
              {"sphere", sample.sphere},
              {"point_residual", sample.point_residual}};
  if (sample.sphere) {
    if (sample.ambient >= 3) write_surface_obj(c.out + ".obj", sample);
    try {
      const CurvatureReport cr = curvature_report(sample);
      report["curvature"] = Json{{"mean", cr.mean},
                                 {"stddev", cr.stddev},
                                 {"min", cr.min_value},
                                 {"max", cr.max_value},
                                 {"used", cr.used},
                                 {"excluded", cr.excluded}};
      std::cout << "curvature mean " << fmt(cr.mean) << " stddev "
                << fmt(cr.stddev) << " used " << cr.used << " excluded "
                << cr.excluded << "\n";
    } catch (const DegenerateMetricError& e) {
      report["curvature"] = Json{{"degenerate", true}, {"message", e.what()}};
      std::cout << "curvature unavailable: " << e.what() << "\n";
    }
  } else {
    report["invariant_residual"] = sample.invariant_residual;
    std::cout << "invariant form residual " << fmt(sample.invariant_residual)
              << "\n";
  }
  atomic_write_text(c.out + ".report.json", report.dump(2) + "\n");
  std::cout << "wrote " << c.out << ".surface.csv ("
            << sample.grid.total() << " points, point residual "
            << fmt(sample.point_residual) << ")\n";
  return 0;
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args) {
  using detail::CliConfig;
  CLI::App app{"loop factorization toolkit"};
  app.name("loopfact");
  app.require_subcommand(1);
  CliConfig c;

  CLI::App* factor =
      app.add_subcommand("factor", "split a loop file into factors");
  factor->add_option("kind", c.kind, "birkhoff or iwasawa")
      ->required()
      ->check(CLI::IsMember({"birkhoff", "iwasawa"}));
  factor->add_option("input", c.input, "loop file to split")->required();
  factor->add_option("--form", c.form,
                     "constrain to a named form (un+, un-, so-curved-flat)");
  factor->add_option("--n", c.n, "first block size");
  factor->add_option("--k", c.k, "second block size");
  factor->add_option("--trunc", c.trunc, "truncation order");
  factor->add_option("--tol", c.tol, "residual tolerance");
  factor->add_option("--out", c.out, "output path prefix (default: factor)");

  CLI::App* verify =
      app.add_subcommand("verify", "run a named invariant battery");
  verify->add_option("suite", c.suite, "battery name")
      ->required()
      ->check(CLI::IsMember({"thm1", "thm1a", "thm2", "thm2a", "dressing",
                             "reality", "winding", "retraction"}));
  verify->add_option("--form", c.form, "named form");
  verify->add_option("--n", c.n, "first block size");
  verify->add_option("--k", c.k, "second block size");
  verify->add_option("--degree", c.degree, "max loop degree in the corpus");
  verify->add_option("--amplitude", c.amplitude, "corpus amplitude");
  verify->add_option("--trunc", c.trunc, "truncation order");
  verify->add_option("--tol", c.tol, "residual tolerance");
  verify->add_option("--trials", c.trials, "number of trials");
  verify->add_option("--seed", c.seed, "random seed")->required();
  verify->add_option("--out", c.out, "report path prefix (.txt and .json)");

  CLI::App* rand = app.add_subcommand("rand", "write a seeded random loop");
  rand->add_option("--form", c.form, "named form (default: un+)");
  rand->add_option("--n", c.n, "first block size");
  rand->add_option("--k", c.k, "second block size");
  rand->add_option("--degree", c.degree, "loop degree");
  rand->add_option("--amplitude", c.amplitude,
                   "sup-norm amplitude (default: 0.8)");
  rand->add_option("--seed", c.seed, "random seed")->required();
  rand->add_option("--out", c.out, "output loop file (default: loop.json)");

  CLI::App* dressc =
      app.add_subcommand("dress", "dress a frame file by a loop file");
  dressc->add_option("frame", c.input, "frame file")->required();
  dressc->add_option("gminus", c.gminus, "dressing loop file")->required();
  dressc->add_option("--trunc", c.trunc,
                     "truncation order (default: automatic)");
  dressc->add_option("--tol", c.tol, "residual tolerance");
  dressc->add_option("--out", c.out,
                     "output frame file (default: dressed.frame.json)");

  CLI::App* demo =
      app.add_subcommand("demo", "integrate, dress, and sample a frame");
  demo->add_option("which", c.which, "flat or surface")
      ->required()
      ->check(CLI::IsMember({"flat", "surface"}));
  demo->add_option("--n", c.n, "first block size");
  demo->add_option("--k", c.k, "second block size");
  demo->add_option("--grid", c.grid, "points per axis");
  demo->add_option("--degree", c.degree, "dressing degree (default: 1)");
  demo->add_option("--amplitude", c.amplitude,
                   "flat: field amplitude (default 0.4); surface: dressing "
                   "amplitude (default 0.6)");
  demo->add_option("--lambda0", c.lambda0, "spectral value, e.g. i or 0.5i");
  demo->add_option("--tol", c.tol, "residual tolerance");
  demo->add_option("--seed", c.seed, "random seed")->required();
  demo->add_option("--out", c.out, "output path prefix (default: demo)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("loopfact");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (factor->parsed()) {
      if (c.out.empty()) c.out = "factor";
      return detail::cmd_factor(c);
    }
    if (verify->parsed()) {
      // Suite-specific defaults for options the user left unset.
      if (verify->count("--form") == 0)
        c.form = c.suite == "thm1" || c.suite == "reality" ||
                         c.suite == "winding"
                     ? "un+"
                     : "so-curved-flat";
      if (verify->count("--amplitude") == 0)
        c.amplitude = c.suite == "thm2" || c.suite == "thm2a" ? 0.5
                      : c.suite == "dressing"                 ? 0.3
                                                              : 0.8;
      if (verify->count("--trials") == 0)
        c.trials = c.suite == "dressing" ? 10 : 100;
      return detail::cmd_verify(c);
    }
    if (rand->parsed()) {
      if (rand->count("--form") == 0) c.form = "un+";
      if (rand->count("--amplitude") == 0) c.amplitude = 0.8;
      if (c.out.empty()) c.out = "loop.json";
      return detail::cmd_rand(c);
    }
    if (dressc->parsed()) {
      if (dressc->count("--trunc") == 0) c.trunc = 0;  // automatic order
      if (c.out.empty()) c.out = "dressed.frame.json";
      return detail::cmd_dress(c);
    }
    if (demo->parsed()) {
      if (demo->count("--degree") == 0) c.degree = 1;
      if (c.out.empty()) c.out = "demo";
      return detail::cmd_demo(c);
    }
  } catch (const NotInBigCellError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    detail::print_cell(std::cerr, e.report);
    return 2;
  } catch (const LogBranchFailureError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace loopfact

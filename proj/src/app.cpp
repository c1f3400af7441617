#include "hk/app.hpp"

#include "hk/report.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace hk {

namespace fs = std::filesystem;

std::vector<std::string> subcommands()
{
  return {"cell", "effective", "fine", "homogenized", "corrector-study", "verify"};
}

namespace {

NodalField source_field(const DomainGrid& d, const SourceSpec& f)
{
  NodalField out(d, 1);
  for (int nd = 0; nd < d.node_count(); ++nd) out(nd) = f.evaluate(d.node_point(nd));
  return out;
}

std::string ktag(double eps) { return std::to_string(inverse_scale(eps)); }

ojson cell_json(const ExperimentConfig&, const EffectiveLaw& law, const Vec2& xi, const ScalarCellSolution& s)
{
  ojson j;
  j["xi"] = to_json(xi);
  j["a_hom"] = to_json(average_flux(law.spec(), s));
  j["residual"] = s.residual;
  j["iterations"] = s.iterations;
  j["used_picard"] = s.used_picard;
  j["flux_identity"] = verify_flux_identity(law.spec(), xi, s);
  j["eta_mean"] = cell_average(s.eta)[0];
  return j;
}

int run_cell(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
  const CellGrid grid = make_cell_grid(c.n);
  EffectiveLaw law(c.spec, grid, c.cell);
  const auto ev = law.evaluate(c.xi);
  ojson res;
  res["scalar"] = cell_json(c, law, c.xi, *ev.cell);
  write_field_file(out / "cell_eta.field", "eta", ev.cell->eta);
  if (c.B && c.C) {
    const auto bh = assemble_B_hom(*c.B, grid, c.cell);
    const std::array<ScalarCellSolution, 2> se{*law.evaluate(unit(0)).cell, *law.evaluate(unit(1)).cell};
    const auto ch = assemble_C_hom(*c.C, se, grid, c.variant, &*c.B, c.cell);
    ojson el = ojson::array();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const auto k = static_cast<std::size_t>(flat(i, j));
        el.push_back({{"i", i + 1},
                      {"j", j + 1},
                      {"upsilon_residual", bh.upsilon[k].residual},
                      {"upsilon_iterations", bh.upsilon[k].iterations},
                      {"chi_residual", ch.chi[k].residual},
                      {"chi_iterations", ch.chi[k].iterations}});
        const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
        write_field_file(out / ("cell_upsilon_" + ij + ".field"), "upsilon" + ij, bh.upsilon[k].field);
        write_field_file(out / ("cell_chi_" + ij + ".field"), "chi" + ij, ch.chi[k].field);
      }
    res["elastic"] = el;
  }
  write_json(out / "cell.json", envelope("cell", c, {}, res));
  log << "cell: a_hom(" << c.xi(0) << ", " << c.xi(1) << ") = (" << res["scalar"]["a_hom"][0].get<double>() << ", "
      << res["scalar"]["a_hom"][1].get<double>() << ")\n";
  return kExitOk;
}

ojson effective_json(const ExperimentConfig& c, const EffectiveLaw& law)
{
  const CellGrid& grid = law.grid();
  ojson res;
  res["a_hom"] = {{"e1", to_json(law.a_hom(unit(0)))}, {"e2", to_json(law.a_hom(unit(1)))}};
  res["theta"] = hom_theta(c.spec.alpha);
  if (c.spec.family == Family::Linear) res["b_hom"] = to_json(linear_case_b_hom(c.spec, grid, c.cell));
  if (c.B && c.C) {
    const auto bh = assemble_B_hom(*c.B, grid, c.cell);
    res["B_hom"] = tensor_json(bh.B_hom);
    res["B_hom_symmetry_defect"] = symmetry_defect(bh.B_hom, true);
    res["B_hom_min_eigenvalue"] = min_symmetric_eigenvalue(bh.B_hom);
    const std::array<ScalarCellSolution, 2> se{*law.evaluate(unit(0)).cell, *law.evaluate(unit(1)).cell};
    ojson ch;
    for (auto v : {ChomVariant::CApplied, ChomVariant::AsWritten, ChomVariant::TwoScale})
      ch[to_string(v)] = tensor_json(assemble_C_hom(*c.C, se, grid, v, &*c.B, c.cell).C_hom);
    res["C_hom"] = ch;
    res["C_hom_selected"] = to_string(c.variant);
  }
  return res;
}

int run_effective(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
  EffectiveLaw law(c.spec, make_cell_grid(c.n), c.cell);
  ojson res = effective_json(c, law);
  const auto pr = check_a_hom_properties(law, c.samples, c.seed);
  res["properties"] = {{"pairs", pr.pairs},
                       {"theta", pr.theta},
                       {"min_monotonicity", pr.min_monotonicity},
                       {"max_monotonicity", pr.max_monotonicity},
                       {"max_continuity", pr.max_continuity},
                       {"violation", pr.violation}};
  write_json(out / "effective.json", envelope("effective", c, {}, res));
  log << "effective: a_hom(e1) = (" << res["a_hom"]["e1"][0].get<double>() << ", "
      << res["a_hom"]["e1"][1].get<double>() << "), theta = " << res["theta"].get<double>() << "\n";
  return kExitOk;
}

int run_fine(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
  ojson entries = ojson::array();
  std::vector<int> sizes;
  for (double eps : c.ladder) {
    const int N = c.m * inverse_scale(eps);
    sizes.push_back(N);
    const DomainGrid dom(N);
    const NodalField f = source_field(dom, c.f);
    const auto sol = solve_fine_electrostatic(c.spec, eps, f, dom, c.fine);
    ojson e;
    e["epsilon"] = eps;
    e["N"] = N;
    e["residual"] = sol.residual;
    e["iterations"] = sol.iterations;
    e["used_picard"] = sol.used_picard;
    e["history"] = sol.history;
    const double se = source_energy(f, c.spec.p);
    e["gradient_energy"] = gradient_energy(sol.phi, c.spec.p);
    e["source_energy"] = se;
    e["energy_ratio"] = se > 0.0 ? ojson(e["gradient_energy"].get<double>() / se) : ojson(nullptr);
    e["interface_flux_balance"] = interface_flux_balance(c.spec, eps, sol.phi, f);
    write_field_file(out / ("fine_phi_" + ktag(eps) + ".field"), "phi_eps", sol.phi);
    if (c.B && c.C) {
      const auto u = solve_fine_elasticity(*c.B, *c.C, eps, constant_field(dom, 2, {c.g(0), c.g(1)}),
                                           maxwell_stress(sol.phi), dom, c.fine);
      e["elastic_residual"] = u.residual;
      write_field_file(out / ("fine_u_" + ktag(eps) + ".field"), "u_eps", u.u);
    }
    log << "fine: eps = 1/" << ktag(eps) << " N = " << N << " residual = " << sol.residual << "\n";
    entries.push_back(e);
  }
  write_json(out / "fine.json", envelope("fine", c, sizes, {{"entries", entries}}));
  return kExitOk;
}

int run_homogenized(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
  const int N = c.m * inverse_scale(c.ladder.back());
  const DomainGrid dom(N);
  EffectiveLaw law(c.spec, make_cell_grid(c.n), c.cell);
  HomogenizedOptions ho = c.hom;
  ho.threads = c.threads;
  const NodalField f = source_field(dom, c.f);
  const auto hom = solve_homogenized_electrostatic(law, f, dom, ho);
  const auto phi1 = reconstruct_phi1(law, hom, c.threads);
  double idmax = 0.0;
  for (double v : flux_identity_residuals(law, hom, phi1)) idmax = std::max(idmax, v);
  ojson res;
  res["N"] = N;
  res["residual"] = hom.residual;
  res["iterations"] = hom.iterations;
  res["history"] = hom.history;
  res["flux_identity_max"] = idmax;
  res["cache_size"] = law.cache_size();
  write_field_file(out / "homogenized_phi0.field", "phi0", hom.phi0);
  if (c.B && c.C) {
    const CellGrid& grid = law.grid();
    const auto bh = assemble_B_hom(*c.B, grid, c.cell);
    const std::array<ScalarCellSolution, 2> se{*law.evaluate(unit(0)).cell, *law.evaluate(unit(1)).cell};
    const auto ch = assemble_C_hom(*c.C, se, grid, c.variant, &*c.B, c.cell);
    const auto u0 = solve_homogenized_elasticity(bh.B_hom, ch.C_hom, constant_field(dom, 2, {c.g(0), c.g(1)}),
                                                 hom.phi0, dom, c.fine);
    res["elastic_residual"] = u0.residual;
    write_field_file(out / "homogenized_u0.field", "u0", u0.u);
  }
  write_json(out / "homogenized.json", envelope("homogenized", c, {N}, res));
  log << "homogenized: N = " << N << " Newton iterations = " << hom.iterations << " residual = " << hom.residual
      << "\n";
  return kExitOk;
}

int run_corrector(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
  const auto rep = run_corrector_study(study_config(c));
  std::vector<int> sizes;
  for (const auto& e : rep.entries) sizes.push_back(e.N);
  write_file(out / "corrector.csv", corrector_csv(rep));
  write_json(out / "corrector.json", envelope("corrector-study", c, sizes, corrector_json(rep)));
  log << corrector_csv(rep);
  return kExitOk;
}

int run_verify(const ExperimentConfig& c, const fs::path& out, std::ostream& log)
{
  ojson suites = ojson::array();
  bool all = true;
  auto record = [&](const std::string& name, bool pass, ojson detail) {
    all = all && pass;
    suites.push_back({{"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
    log << (pass ? "PASS " : "FAIL ") << name << "\n";
  };

  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto g = check_growth_conditions(c.spec, std::max(c.samples, 100), c.seed + s);
    record("growth_conditions/seed" + std::to_string(c.seed + s), !g.violation && g.zero_bound_ok,
           {{"samples", g.samples},
            {"max_a_at_zero", g.max_a_at_zero},
            {"empirical_lambda_o", g.empirical_lambda_o},
            {"empirical_Lambda_o", g.empirical_Lambda_o}});
  }

  const CellGrid grid = make_cell_grid(c.n);
  EffectiveLaw law(c.spec, grid, c.cell);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto pr = check_a_hom_properties(law, c.samples, c.seed + s);
    record("a_hom_monotonicity/seed" + std::to_string(c.seed + s), !pr.violation,
           {{"pairs", pr.pairs},
            {"theta", pr.theta},
            {"min_monotonicity", pr.min_monotonicity},
            {"max_continuity", pr.max_continuity}});
  }

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec2> xis{unit(0), unit(1)};
  for (int k = 0; k < 10; ++k) xis.emplace_back(u(rng), u(rng));
  double id = 0.0, mean = 0.0, pmean = 0.0;
  for (const auto& xi : xis) {
    const auto ev = law.evaluate(xi);
    const double scale = std::max(1.0, std::pow(xi.norm(), c.spec.max_exponent()));
    id = std::max(id, verify_flux_identity(c.spec, xi, *ev.cell) / scale);
    mean = std::max(mean, std::abs(cell_average(ev.cell->eta)[0]));
    const auto pm = cell_average(corrector_flux(*ev.cell));
    pmean = std::max(pmean, (Vec2(pm[0], pm[1]) - xi).norm());
  }
  record("flux_identity", id <= 1e-9, {{"max_scaled_residual", id}});
  record("cell_zero_mean", mean <= 1e-12, {{"max_abs_mean", mean}});
  record("corrector_flux_mean", pmean <= 1e-10, {{"max_deviation", pmean}});

  if (c.spec.family == Family::Linear) {
    const Mat2 bh = linear_case_b_hom(c.spec, grid, c.cell);
    double rel = 0.0;
    for (std::size_t k = 2; k < xis.size(); ++k) {
      const Vec2 a = law.a_hom(xis[k]);
      rel = std::max(rel, (a - bh * xis[k]).norm() / std::max(1e-300, a.norm()));
    }
    record("linear_consistency", rel <= 1e-8, {{"max_relative_difference", rel}});
  }

  if (c.B && c.C) {
    const auto bh = assemble_B_hom(*c.B, grid, c.cell);
    const double sd = symmetry_defect(bh.B_hom, true);
    const double ev = min_symmetric_eigenvalue(bh.B_hom);
    record("B_hom_symmetry", sd <= 1e-10, {{"defect", sd}});
    record("B_hom_ellipticity", ev > 0.0, {{"min_eigenvalue", ev}});
  }

  write_json(out / "verify.json", envelope("verify", c, {}, {{"all_pass", all}, {"suites", suites}}));
  return all ? kExitOk : kExitFailure;
}

}  // namespace

int run_app(const AppOptions& opts, std::ostream& log, std::ostream& err)
{
  try {
    ExperimentConfig c = load_config(opts.config_path);
    if (opts.threads) {
      if (*opts.threads < 1) throw ConfigError("/threads", "must be at least 1");
      c.threads = *opts.threads;
    }
    const fs::path out = opts.out_dir ? fs::path(*opts.out_dir) : fs::path(c.output_dir);
    const auto& s = opts.subcommand;
    if (s == "cell") return run_cell(c, out, log);
    if (s == "effective") return run_effective(c, out, log);
    if (s == "fine") return run_fine(c, out, log);
    if (s == "homogenized") return run_homogenized(c, out, log);
    if (s == "corrector-study") return run_corrector(c, out, log);
    if (s == "verify") return run_verify(c, out, log);
    err << "error: unknown subcommand '" << s << "'\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "config error at " << e.pointer() << ": " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NonConvergence& e) {
    err << "solver did not converge: " << e.what() << " (iterations " << e.iterations() << ", residual "
        << e.residual() << ")\n";
    return kExitNonConvergence;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace hk

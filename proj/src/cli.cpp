#include "toruscope/cli.hpp"

#include "toruscope/cohomology.hpp"
#include "toruscope/errors.hpp"
#include "toruscope/mesh.hpp"
#include "toruscope/mesh_io.hpp"
#include "toruscope/meshgen.hpp"
#include "toruscope/report.hpp"
#include "toruscope/system.hpp"
#include "toruscope/tischler.hpp"
#include "toruscope/torus_detect.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace toruscope {

namespace {

std::string read_all(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_doc(const std::string& bytes, const std::string& what) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw InputError("JSON parse error in " + what + ": " + e.what());
  }
}

void emit(const std::string& out_path, const std::string& format, const json& report,
          const std::vector<std::vector<std::string>>& csv_rows) {
  if (format == "csv")
    write_text_file(out_path, render_csv(csv_rows));
  else
    write_text_file(out_path, report.dump(2) + "\n");
}

json closedness_json(const ClosednessReport& cr) {
  json j;
  j["closed"] = cr.closed;
  j["residual"] = jnum(cr.residual);
  j["worst_simplex"] = cr.worst_simplex;
  return j;
}

json independence_json(const IndependenceReport& ir) {
  json j;
  j["pass"] = ir.pass;
  j["k"] = ir.k;
  j["min_singular_value"] = jnum(ir.min_singular_value);
  j["argmin_simplex"] = ir.argmin_simplex;
  return j;
}

json classification_json(const ClassificationVerdict& cv) {
  json j;
  j["dimension"] = cv.dim;
  j["integrals"] = cv.s;
  j["rank"] = cv.r;
  j["jacobi_max"] = jnum(cv.jacobi_max);
  j["involution_max"] = jnum(cv.involution_max);
  j["regular_fraction"] = jnum(cv.regular_fraction);
  j["generic_rank"] = cv.generic_rank;
  j["integrable"] = cv.integrable;
  j["verdict"] = cv.verdict;
  return j;
}

int cmd_gen_mesh(const std::string& kind, int res, const std::string& out) {
  SimplicialComplex m = [&] {
    if (kind == "torus") return flat_torus(res);
    if (kind == "klein") return klein_bottle(res);
    if (kind == "octahedron") return octahedron();
    throw InputError("unknown mesh kind '" + kind + "' (torus, klein, octahedron)");
  }();
  write_text_file(out, mesh_to_json(m).dump(2) + "\n");
  return 0;
}

int cmd_cohomology(const std::string& mesh_path, const std::string& out,
                   const std::string& format) {
  std::string bytes = read_all(mesh_path);
  SimplicialComplex m = mesh_from_json(parse_doc(bytes, "mesh"));
  CohomologyBasis basis = h1_basis(m);

  json rep = report_header("cohomology", {{"mesh", digest(bytes)}});
  rep["vertices"] = m.num_vertices();
  rep["edges"] = static_cast<int>(m.edges().size());
  rep["top_simplices"] = m.num_tops();
  rep["betti"] = basis.betti;
  json sel = json::array();
  for (int s : basis.selected) sel.push_back(s);
  rep["selected_cycles"] = sel;
  json periods = json::array();
  std::vector<std::vector<std::string>> csv;
  for (int i = 0; i < basis.betti; ++i) {
    json row = json::array();
    std::vector<std::string> crow;
    for (int j = 0; j < basis.betti; ++j) {
      long long v = basis.periods_all[i][basis.selected[j]].get_si();
      row.push_back(v);
      crow.push_back(std::to_string(v));
    }
    periods.push_back(row);
    csv.push_back(crow);
  }
  rep["periods"] = periods;
  emit(out, format, rep, csv);
  return 0;
}

int cmd_fibrate(const std::string& mesh_path, const std::vector<std::string>& form_paths,
                double eps, int bins, const std::string& out, const std::string& format) {
  std::string mesh_bytes = read_all(mesh_path);
  SimplicialComplex m = mesh_from_json(parse_doc(mesh_bytes, "mesh"));
  std::vector<std::pair<std::string, std::string>> digests{{"mesh", digest(mesh_bytes)}};
  std::vector<RealCochain> forms;
  for (size_t i = 0; i < form_paths.size(); ++i) {
    std::string bytes = read_all(form_paths[i]);
    digests.emplace_back("form" + std::to_string(i + 1), digest(bytes));
    LoadedCochain lc = cochain_from_json(parse_doc(bytes, form_paths[i]));
    RealCochain c = lc.as_real();
    if (c.degree != 1)
      throw InputError(form_paths[i] + ": expected a 1-cochain, got degree " +
                       std::to_string(c.degree));
    if (c.values.size() != m.edges().size())
      throw InputError(form_paths[i] + ": cochain has " + std::to_string(c.values.size()) +
                       " values but the mesh has " + std::to_string(m.edges().size()) +
                       " edges");
    forms.push_back(std::move(c));
  }

  PipelineOptions po;
  po.eps = eps;
  po.bins = bins;
  TischlerResult res = tischler_pipeline(m, forms, po);

  json rep = report_header("fibrate", digests);
  rep["k"] = static_cast<int>(forms.size());
  json closed = json::array();
  for (const auto& cr : res.closedness) closed.push_back(closedness_json(cr));
  rep["closedness"] = closed;
  if (res.has_independence) rep["independence"] = independence_json(res.independence);
  if (res.betti >= 0) rep["betti"] = res.betti;
  if (!res.decomps.empty()) {
    json coeffs = json::array();
    for (const auto& d : res.decomps) {
      json row = json::array();
      for (double a : d.coefficients) row.push_back(jnum(a));
      coeffs.push_back(row);
    }
    rep["coefficients"] = coeffs;
  }
  std::vector<std::vector<std::string>> csv;
  if (res.has_coeffs) {
    json rational = json::array();
    for (const auto& qrow : res.coeffs.q) {
      json row = json::array();
      for (const Rat& v : qrow) row.push_back(v.get_str());
      rational.push_back(row);
    }
    rep["rational"] = rational;
    json eps_block;
    eps_block["requested"] = jnum(res.coeffs.eps_requested);
    eps_block["threshold"] = jnum(res.coeffs.eps_threshold);
    eps_block["used"] = jnum(res.coeffs.eps_used);
    eps_block["halvings"] = res.coeffs.halvings;
    rep["eps"] = eps_block;
    json scale = json::array();
    for (long long n : res.coeffs.scale) scale.push_back(n);
    rep["scale"] = scale;
    json winding = json::array();
    for (const auto& row : res.coeffs.kmat) {
      json jrow = json::array();
      std::vector<std::string> crow;
      for (long long v : row) {
        jrow.push_back(v);
        crow.push_back(std::to_string(v));
      }
      winding.push_back(jrow);
      csv.push_back(crow);
    }
    rep["winding"] = winding;
  }
  if (res.has_cert) {
    const FibrationCertificate& c = res.cert;
    json jc;
    jc["bins"] = c.bins;
    jc["rank"] = independence_json(c.rank);
    json off = json::array();
    for (int t : c.offending) off.push_back(t);
    jc["offending_simplices"] = off;
    jc["cells_total"] = c.cells_total;
    jc["cells_hit"] = c.cells_hit;
    jc["samples"] = c.samples;
    jc["coverage"] = jnum(c.coverage);
    jc["covered"] = c.covered;
    jc["regular_values"] = c.regular_values;
    json fc = json::array();
    for (long long v : c.fiber_counts) fc.push_back(v);
    jc["fiber_counts"] = fc;
    jc["fiber_constant"] = c.fiber_constant;
    if (c.degree >= 0) jc["degree"] = c.degree;
    jc["verdict"] = c.verdict;
    jc["pass"] = c.pass;
    rep["certificate"] = jc;
  }
  if (res.has_covering) {
    json jc;
    jc["degree"] = res.covering.degree;
    jc["consistent"] = res.covering.consistent;
    jc["statement"] = res.covering.statement;
    rep["covering"] = jc;
  }
  if (!res.failure_stage.empty()) {
    json f;
    f["stage"] = res.failure_stage;
    f["message"] = res.failure_message;
    rep["failure"] = f;
    rep["verdict"] = res.failure_message;
    if (csv.empty()) csv.push_back({"error", res.failure_message});
  } else {
    rep["verdict"] = res.cert.verdict;
  }
  rep["exit_code"] = res.exit_code;
  emit(out, format, rep, csv);
  return res.exit_code;
}

int cmd_check_system(const std::string& sys_path, int samples, unsigned long long seed,
                     const std::string& out, const std::string& format) {
  std::string bytes = read_all(sys_path);
  SystemDefinition sys = system_from_json(parse_doc(bytes, "system"));
  ClassificationVerdict cv = classify_system(sys, samples, seed);
  json rep = report_header("check-system", {{"system", digest(bytes)}});
  rep["classification"] = classification_json(cv);
  rep["verdict"] = cv.verdict;
  std::vector<std::vector<std::string>> csv{
      {"dimension", std::to_string(cv.dim)},
      {"integrals", std::to_string(cv.s)},
      {"rank", std::to_string(cv.r)},
      {"jacobi_max", format_double(cv.jacobi_max)},
      {"involution_max", format_double(cv.involution_max)},
      {"regular_fraction", format_double(cv.regular_fraction)},
      {"generic_rank", std::to_string(cv.generic_rank)},
      {"verdict", cv.verdict}};
  emit(out, format, rep, csv);
  return cv.integrable ? 0 : 1;
}

int cmd_detect_torus(const std::string& sys_path, const std::vector<double>& level,
                     const std::vector<double>& guess, double tmax, int grid,
                     double return_tol, int samples, unsigned long long seed,
                     const std::string& out, const std::string& format) {
  std::string bytes = read_all(sys_path);
  SystemDefinition sys = system_from_json(parse_doc(bytes, "system"));
  Eigen::VectorXd lv = Eigen::Map<const Eigen::VectorXd>(level.data(), level.size());
  Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(guess.data(), guess.size());
  if (static_cast<int>(level.size()) != sys.num_integrals())
    throw InputError("--level needs one value per integral (" +
                     std::to_string(sys.num_integrals()) + ")");
  if (static_cast<int>(guess.size()) != sys.dim)
    throw InputError("--guess needs one value per coordinate (" + std::to_string(sys.dim) +
                     ")");
  LatticeSearch search;
  search.t_max = tmax;
  search.grid = grid;
  search.return_tol = return_tol;
  FiberVerdict fv = fiber_verdict(sys, lv, {gv}, search, samples, seed);

  json rep = report_header("detect-torus", {{"system", digest(bytes)}});
  rep["level"] = jvec(lv);
  rep["classification"] = classification_json(fv.classification);
  rep["projected"] = fv.projected;
  if (fv.projected) {
    json anchor;
    anchor["point"] = jvec(fv.sample.anchor);
    anchor["residual"] = jnum(fv.sample.residual);
    anchor["iterations"] = fv.sample.iterations;
    anchor["jacobian_rank"] = fv.sample.jacobian_rank;
    anchor["bivector_rank"] = fv.sample.bivector_rank;
    rep["anchor"] = anchor;
  }
  std::vector<std::vector<std::string>> csv;
  if (fv.coframe_ok) {
    json cf;
    cf["coframe"] = jmat(fv.coframe.coframe);
    cf["pairing_residual"] = jnum(fv.coframe.pairing_residual);
    cf["commutation_max"] = jnum(fv.commutation_max);
    rep["coframe"] = cf;
    rep["conservation_drift"] = jnum(fv.conservation_drift);
    rep["bracket_drift"] = jnum(fv.bracket_drift);
    json lat;
    json rets = json::array();
    for (const auto& v : fv.lattice.returns) rets.push_back(jvec(v));
    lat["returns"] = rets;
    json rres = json::array();
    for (double v : fv.lattice.return_residuals) rres.push_back(jnum(v));
    lat["return_residuals"] = rres;
    json bas = json::array();
    for (const auto& v : fv.lattice.basis) {
      bas.push_back(jvec(v));
      std::vector<std::string> crow;
      for (int i = 0; i < v.size(); ++i) crow.push_back(format_double(v[i]));
      csv.push_back(crow);
    }
    lat["basis"] = bas;
    json bres = json::array();
    for (double v : fv.lattice.basis_residuals) bres.push_back(jnum(v));
    lat["basis_residuals"] = bres;
    lat["rank"] = fv.lattice.rank;
    lat["coherence_residual"] = jnum(fv.lattice.coherence_residual);
    if (!fv.lattice.note.empty()) lat["note"] = fv.lattice.note;
    rep["lattice"] = lat;
  }
  rep["verdict"] = fv.verdict;
  if (csv.empty()) csv.push_back({"verdict", fv.verdict});
  emit(out, format, rep, csv);
  return fv.verdict.rfind("torus", 0) == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"certified torus fibrations for triangulated manifolds and integrable systems"};
  app.require_subcommand(1);

  auto* gm = app.add_subcommand("gen-mesh", "generate a bundled triangulation");
  std::string gm_kind;
  int gm_res = 8;
  std::string gm_out = "-";
  gm->add_option("kind", gm_kind, "torus, klein, or octahedron")->required();
  gm->add_option("--res", gm_res, "grid resolution per axis (default 8)");
  gm->add_option("--out", gm_out, "output path, - for stdout");

  auto* co = app.add_subcommand("cohomology", "first cohomology basis of a mesh");
  std::string co_mesh = "-", co_out = "-", co_format = "json";
  co->add_option("--mesh", co_mesh, "mesh JSON path, - for stdin");
  co->add_option("--out", co_out, "output path, - for stdout");
  co->add_option("--format", co_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* fi = app.add_subcommand("fibrate", "build and certify a fibration onto a torus");
  std::string fi_mesh, fi_out = "-", fi_format = "json";
  std::vector<std::string> fi_forms;
  double fi_eps = 1e-4;
  int fi_bins = 16;
  fi->add_option("--mesh", fi_mesh, "mesh JSON path")->required();
  fi->add_option("--forms", fi_forms, "closed 1-cochain JSON paths")->required();
  fi->add_option("--eps", fi_eps, "rational approximation tolerance (default 1e-4)");
  fi->add_option("--bins", fi_bins, "coverage bins per circle factor (default 16)");
  fi->add_option("--out", fi_out, "output path, - for stdout");
  fi->add_option("--format", fi_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* cs = app.add_subcommand("check-system", "verify integrability hypotheses");
  std::string cs_sys, cs_out = "-", cs_format = "json";
  int cs_samples = 1000;
  unsigned long long cs_seed = 0;
  cs->add_option("--system", cs_sys, "system JSON path")->required();
  cs->add_option("--samples", cs_samples, "sample points in the box (default 1000)");
  cs->add_option("--seed", cs_seed, "RNG seed (default 0)");
  cs->add_option("--out", cs_out, "output path, - for stdout");
  cs->add_option("--format", cs_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* dt = app.add_subcommand("detect-torus", "certify a compact regular fiber as a torus");
  std::string dt_sys, dt_out = "-", dt_format = "json";
  std::vector<double> dt_level, dt_guess;
  double dt_tmax = 20.0, dt_rtol = 1e-8;
  int dt_grid = 64, dt_samples = 1000;
  unsigned long long dt_seed = 0;
  dt->add_option("--system", dt_sys, "system JSON path")->required();
  dt->add_option("--level", dt_level, "level values, comma separated")
      ->required()
      ->delimiter(',');
  dt->add_option("--guess", dt_guess, "starting point, comma separated")
      ->required()
      ->delimiter(',');
  dt->add_option("--tmax", dt_tmax, "return search horizon (default 20)");
  dt->add_option("--grid", dt_grid, "grid intervals per flow axis (default 64)");
  dt->add_option("--return-tol", dt_rtol, "return distance tolerance (default 1e-8)");
  dt->add_option("--samples", dt_samples, "classification sample count (default 1000)");
  dt->add_option("--seed", dt_seed, "RNG seed (default 0)");
  dt->add_option("--out", dt_out, "output path, - for stdout");
  dt->add_option("--format", dt_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gm->parsed()) return cmd_gen_mesh(gm_kind, gm_res, gm_out);
    if (co->parsed()) return cmd_cohomology(co_mesh, co_out, co_format);
    if (fi->parsed()) return cmd_fibrate(fi_mesh, fi_forms, fi_eps, fi_bins, fi_out, fi_format);
    if (cs->parsed()) return cmd_check_system(cs_sys, cs_samples, cs_seed, cs_out, cs_format);
    if (dt->parsed())
      return cmd_detect_torus(dt_sys, dt_level, dt_guess, dt_tmax, dt_grid, dt_rtol,
                              dt_samples, dt_seed, dt_out, dt_format);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace toruscope

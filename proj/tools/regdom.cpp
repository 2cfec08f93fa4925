// regdom: command-line driver for scenes, domains, level surfaces and spectra.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regdom/asymptotics.hpp"
#include "regdom/gallery.hpp"
#include "regdom/scene.hpp"

using namespace regdom;

namespace {

int exit_code(ErrorKind k) { return k == ErrorKind::validation ? 2 : 3; }

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::not_in_domain: return "not_in_domain";
  }
  return "error";
}

void report_error(const std::string& kind, const std::string& message, const std::vector<std::string>& items) {
  json e{{"error", kind}, {"message", message}, {"items", items}};
  std::cerr << e.dump() << std::endl;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ValidationError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

// Accepts x0,..,xn on the hyperboloid or the spatial part x1,..,xn.
template <int N>
MinkVector<N> hyperboloid_arg(const std::string& s, const char* what) {
  const auto v = parse_list(s);
  if (v.size() == static_cast<std::size_t>(N)) {
    SpatialVector<N> y;
    for (int i = 0; i < N; ++i) y[i] = v[static_cast<std::size_t>(i)];
    return HyperboloidPoint<N>::from_spatial(y).vec();
  }
  if (v.size() == static_cast<std::size_t>(N + 1)) {
    MinkVector<N> x;
    for (int i = 0; i <= N; ++i) x[i] = v[static_cast<std::size_t>(i)];
    return HyperboloidPoint<N>(x).vec();
  }
  throw ValidationError(std::string(what) + " needs " + std::to_string(N) + " or " + std::to_string(N + 1) + " coordinates");
}

template <int N>
json vec_json(const MinkVector<N>& v) {
  json a = json::array();
  for (int i = 0; i <= N; ++i) a.push_back(v[i]);
  return a;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw ValidationError("cannot write '" + out + "'");
  f << text;
}

AnyScene load(const std::string& path) {
  AnyScene sc = parse_scene_file(path);
  std::visit([](const auto& s) {
    for (const auto& w : s.warnings) std::cerr << json{{"warning", w}}.dump() << std::endl;
  }, sc);
  return sc;
}

struct Options {
  std::string scene, out, point, grid = "-2,2,21", x, y, pairs_file, a_list = "0.01,0.1,1,10,100", word, emit_name;
  std::string weights_mode;
  double a = 1.0, h = 0.1, window = 0.0, core = 0.0, w = 1.0, budget = 0.03;
  std::size_t samples = 20;
  bool list = false, regen = false, exact_only = false;
};

template <int N>
int run_validate(const Scene<N>& sc) {
  const auto s = sc.complex();
  const auto rep = validate_complex(s);
  json out{{"valid", rep.ok()}, {"walls", s.walls().size()}, {"pieces", s.pieces().size()}, {"spines", s.spines().size()},
           {"errors", rep.errors}, {"warnings", rep.warnings}};
  if (sc.group) {
    const auto closure = check_group_closure(sc);
    out["group_closure"] = closure;
    if (!closure.empty()) out["valid"] = false;
  }
  std::cout << out.dump(2) << std::endl;
  return out["valid"].get<bool>() ? 0 : 2;
}

template <int N>
int run_weights(const Scene<N>& sc, const std::string& mode) {
  const auto s = sc.complex();
  if (mode == "check") {
    const WeightFamily a = weights_from_map(s, sc.weights);
    json res = json::array();
    double worst = 0.0;
    for (const auto& r : weight_residuals(s, a)) {
      res.push_back({{"spine", r.spine}, {"residual", {r.residual[0], r.residual[1]}}, {"norm", r.residual.norm()}});
      worst = std::max(worst, r.residual.norm());
    }
    const bool ok = worst <= sc.tolerance("weights", tol::weights);
    std::cout << json{{"ok", ok}, {"max_residual", worst}, {"spines", res}}.dump(2) << std::endl;
    return ok ? 0 : 2;
  }
  const auto sol = solve_weights(s);
  json out{{"walls", sol.walls}, {"spines", sol.spines}, {"cone_dimension", sol.cone_dimension},
           {"dimension_bound_holds", sol.dimension_bound_holds()}};
  std::vector<std::string> ids;
  for (const auto& w : s.walls()) ids.push_back(w.id);
  out["wall_order"] = ids;
  json basis = json::array();
  for (Eigen::Index c = 0; c < sol.nullspace.cols(); ++c) {
    std::vector<double> col(sol.nullspace.col(c).data(), sol.nullspace.col(c).data() + sol.nullspace.rows());
    basis.push_back(col);
  }
  out["nullspace"] = basis;
  if (sol.witness) {
    out["witness"] = std::vector<double>(sol.witness->data(), sol.witness->data() + sol.witness->size());
  } else {
    out["witness"] = nullptr;
    if (sol.certificate)
      out["certificate"] = std::vector<double>(sol.certificate->data(), sol.certificate->data() + sol.certificate->size());
  }
  std::cout << out.dump(2) << std::endl;
  return sol.witness ? 0 : 3;
}

template <int N>
int run_build(const Scene<N>& sc) {
  const auto d = sc.domain();
  json verts = json::object();
  for (std::size_t p = 0; p < d.complex().pieces().size(); ++p) verts[d.complex().pieces()[p].id] = vec_json<N>(d.rho_of_piece(p));
  std::cout << json{{"base_piece", sc.base_piece}, {"cells", d.cells().size()}, {"cycle_residual", d.cycle_residual()},
                    {"vertex_positions", verts}}
                   .dump(2)
            << std::endl;
  return 0;
}

template <int N>
int run_query(const Scene<N>& sc, const std::string& point) {
  const auto d = sc.domain();
  const auto v = parse_list(point);
  if (v.size() != static_cast<std::size_t>(N + 1)) throw ValidationError("--point needs " + std::to_string(N + 1) + " coordinates");
  MinkVector<N> p;
  for (int i = 0; i <= N; ++i) p[i] = v[static_cast<std::size_t>(i)];
  const auto q = d.ct_query(p);
  std::cout << json{{"T", q.T}, {"r", vec_json<N>(q.r)}, {"N", vec_json<N>(q.normal)}, {"cell", d.cell_label(q.cell)},
                    {"cell_dim", q.cell_dim}}
                   .dump(2)
            << std::endl;
  return 0;
}

template <int N>
int run_boundary(const Scene<N>& sc, const std::string& grid, const std::string& out) {
  const auto d = sc.domain();
  const auto g = parse_list(grid);
  if (g.size() != 3 || !(g[2] >= 1) || g[2] != std::floor(g[2])) throw ValidationError("--grid expects lo,hi,count");
  const int n = static_cast<int>(g[2]);
  std::ostringstream os;
  os << std::setprecision(17);
  for (int i = 1; i <= N; ++i) os << "y" << i << ',';
  os << "psi\n";
  auto coord = [&](int i) { return n == 1 ? g[0] : g[0] + (g[1] - g[0]) * i / (n - 1); };
  std::vector<int> idx(N, 0);
  while (true) {
    SpatialVector<N> y;
    for (int k = 0; k < N; ++k) y[k] = coord(idx[static_cast<std::size_t>(k)]);
    for (int k = 0; k < N; ++k) os << y[k] << ',';
    os << d.boundary_height(y) << '\n';
    int k = N - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  emit(out, os.str());
  return 0;
}

template <int N>
int run_level_mesh(const Scene<N>& sc, const Options& o) {
  const auto d = sc.domain();
  const double window = o.window > 0 ? o.window : (N == 2 ? 2.0 : 1.2);
  const auto mesh = level_mesh(d, o.a, o.h, window);
  std::ostringstream os;
  write_obj(os, mesh);
  emit(o.out, os.str());
  std::cerr << json{{"vertices", mesh.size()}, {"triangles", mesh.triangles.size()}, {"edges", mesh.edges.size()}}.dump()
            << std::endl;
  return 0;
}

template <int N>
int run_singularity(const Scene<N>& sc, const std::string& out) {
  const auto d = sc.domain();
  const auto s = build_singularity(d);
  emit(out, singularity_json(d, s).dump(2) + "\n");
  return 0;
}

template <int N>
int run_distance(const Scene<N>& sc, const Options& o) {
  const auto d = sc.domain();
  const MinkVector<N> x = hyperboloid_arg<N>(o.x, "--x"), y = hyperboloid_arg<N>(o.y, "--y");
  const auto r = intrinsic_distance(d, o.a, x, y, o.h);
  json out{{"a", o.a}, {"h", r.h}, {"distance", r.value}, {"crossings", r.crossings}, {"exact", r.exact},
           {"d_H", hyp_distance<N>(x, y)}};
  out["mesh_bound"] = std::isfinite(r.mesh_bound) ? json(r.mesh_bound) : json(nullptr);
  std::cout << out.dump(2) << std::endl;
  return 0;
}

template <int N>
int run_converge(const Scene<N>& sc, const Options& o) {
  const auto d = sc.domain();
  std::ifstream in(o.pairs_file);
  if (!in) throw ValidationError("cannot read pairs file '" + o.pairs_file + "'");
  std::vector<std::pair<MinkVector<N>, MinkVector<N>>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto v = parse_list(line);
    if (v.size() != static_cast<std::size_t>(2 * N)) throw ValidationError("pairs file line needs " + std::to_string(2 * N) + " spatial coordinates: " + line);
    SpatialVector<N> a, b;
    for (int i = 0; i < N; ++i) {
      a[i] = v[static_cast<std::size_t>(i)];
      b[i] = v[static_cast<std::size_t>(N + i)];
    }
    pairs.emplace_back(HyperboloidPoint<N>::from_spatial(a).vec(), HyperboloidPoint<N>::from_spatial(b).vec());
  }
  const auto rep = convergence_report(d, pairs, parse_list(o.a_list), o.h, o.budget, !o.exact_only);
  std::ostringstream os;
  write_convergence_csv(os, rep);
  emit(o.out, os.str());
  for (const auto& v : rep.violations) std::cerr << json{{"warning", v}}.dump() << std::endl;
  return 0;
}

template <int N>
int run_spectra(const Scene<N>& sc, const Options& o) {
  if (!sc.group) throw ValidationError("spectra needs a scene with group data");
  const auto d = sc.domain();
  const double core = o.core > 0 ? o.core : sc.group->core_radius;
  const auto e = spectrum(d, sc.group->presentation, parse_word(o.word), parse_list(o.a_list), o.samples, core, o.h);
  json la = json::array();
  for (const auto& [a, l] : e.ell_a) la.push_back({{"a", a}, {"ell_a", l}, {"ell_a_over_a", l / a}});
  std::cout << json{{"word", word_to_string(e.word)}, {"ell_H", e.ell_hyp}, {"ell_sigma", e.ell_sigma}, {"levels", la},
                    {"samples", e.samples}, {"upper_bounds", true}}
                   .dump(2)
            << std::endl;
  return 0;
}

int run_gallery(const Options& o) {
  if (o.list) {
    for (const auto& n : gallery_names()) std::cout << n << '\n';
    return 0;
  }
  if (o.emit_name.empty()) throw ValidationError("gallery needs --list or --emit NAME");
  GalleryOptions go;
  go.w = o.w;
  AnyScene sc = gallery_scene(o.emit_name, go);
  if (o.regen) regen_oracles(sc);
  emit(o.out, serialize(sc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular domains, cosmological time and level-surface asymptotics"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Options o;
  auto scene_arg = [&](CLI::App* c) { c->add_option("scene", o.scene, "scene JSON file")->required(); };

  auto* validate = app.add_subcommand("validate", "check the stratification and group closure");
  scene_arg(validate);
  auto* weights = app.add_subcommand("weights", "weight equations: check the scene weights or solve for the cone");
  weights->add_option("mode", o.weights_mode, "check | solve")->required()->check(CLI::IsMember({"check", "solve"}));
  scene_arg(weights);
  auto* build = app.add_subcommand("build", "build the domain and print its vertices");
  scene_arg(build);
  auto* query = app.add_subcommand("query", "cosmological time, retraction and normal at a point");
  scene_arg(query);
  query->add_option("--point", o.point, "x0,x1,..")->required();
  auto* boundary = app.add_subcommand("boundary", "psi on a grid, as CSV");
  scene_arg(boundary);
  boundary->add_option("--grid", o.grid, "lo,hi,count per axis");
  boundary->add_option("--out", o.out, "CSV path (default stdout)");
  auto* mesh = app.add_subcommand("level-mesh", "mesh of the level surface T = a, as OBJ");
  scene_arg(mesh);
  mesh->add_option("--a", o.a)->required();
  mesh->add_option("--h", o.h);
  mesh->add_option("--window", o.window, "hyperbolic radius of the Gauss-image window");
  mesh->add_option("--out", o.out)->required();
  auto* sing = app.add_subcommand("singularity", "the singularity complex, as JSON");
  scene_arg(sing);
  sing->add_option("--out", o.out)->required();
  auto* dist = app.add_subcommand("distance", "intrinsic distance on the level surface T = a");
  scene_arg(dist);
  dist->add_option("--a", o.a)->required();
  dist->add_option("--x", o.x, "hyperboloid point (n or n+1 coordinates)")->required();
  dist->add_option("--y", o.y)->required();
  dist->add_option("--h", o.h);
  auto* conv = app.add_subcommand("converge", "convergence report over levels, as CSV");
  scene_arg(conv);
  conv->add_option("--pairs-file", o.pairs_file, "one pair per line: 2n spatial coordinates")->required();
  conv->add_option("--a-list", o.a_list);
  conv->add_option("--h", o.h);
  conv->add_option("--budget", o.budget);
  conv->add_flag("--exact-only", o.exact_only, "n = 2: skip the mesh bound");
  conv->add_option("--out", o.out)->required();
  auto* spec = app.add_subcommand("spectra", "marked length spectrum of a group word");
  scene_arg(spec);
  spec->add_option("--word", o.word, "letters, e.g. \"1 -2\"")->required();
  spec->add_option("--a-list", o.a_list);
  spec->add_option("--samples", o.samples);
  spec->add_option("--core", o.core);
  spec->add_option("--h", o.h);
  auto* gal = app.add_subcommand("gallery", "built-in scenes");
  gal->add_flag("--list", o.list);
  gal->add_option("--emit", o.emit_name);
  gal->add_option("--w", o.w, "single-geodesic weight");
  gal->add_flag("--regen-oracles", o.regen, "attach brute-force oracle values");
  gal->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what(), {});
    return 2;
  }

  try {
    if (gal->parsed()) return run_gallery(o);
    const AnyScene sc = load(o.scene);
    return std::visit(
        [&](const auto& s) -> int {
          if (validate->parsed()) return run_validate(s);
          if (weights->parsed()) return run_weights(s, o.weights_mode);
          if (build->parsed()) return run_build(s);
          if (query->parsed()) return run_query(s, o.point);
          if (boundary->parsed()) return run_boundary(s, o.grid, o.out);
          if (mesh->parsed()) return run_level_mesh(s, o);
          if (sing->parsed()) return run_singularity(s, o.out);
          if (dist->parsed()) return run_distance(s, o);
          if (conv->parsed()) return run_converge(s, o);
          if (spec->parsed()) return run_spectra(s, o);
          return 2;
        },
        sc);
  } catch (const Error& e) {
    report_error(kind_name(e.kind()), e.what(), e.items());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error("numeric", e.what(), {});
    return 3;
  }
}

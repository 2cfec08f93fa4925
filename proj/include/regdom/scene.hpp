#pragma once

// Scene files: a single versioned JSON document holding the stratification,
// weights, base piece, optional group data and tolerance overrides.
//
//   {
//     "format": "regdom-scene", "version": 1, "name": "...", "n": 2,
//     "walls":  [{"id", "normal", "ideal_vertices"?, "bounds"?, "witness"?}],
//     "pieces": [{"id", "bounding": [[wall id, +1|-1], ...], "witness"?}],
//     "spines": [{"id", "endpoints": [u1, u2], "star": [D1, P1, D2, P2, ...]}],
//     "weights": {wall id: a},
//     "base_piece": id,
//     "frame": "standard",
//     "group"?: {"generators", "relations", "cocycle", "word_ball", "core_radius", "enumeration_radius", "builtin"?},
//     "tolerances"?: {name: value},
//     "oracles"?: {...}
//   }
//
// Vectors are Minkowski coordinates (x0, x1, .., xn).

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "regdom/holonomy.hpp"
#include "regdom/singularity.hpp"

namespace regdom {

using json = nlohmann::json;

inline constexpr int scene_version = 1;

template <int N>
struct GroupSection {
  GroupPresentation<N> presentation;
  int word_ball = 4;
  double core_radius = 4.5;
  double enumeration_radius = 8.5;
  std::string builtin;  // informational, e.g. "octagon"
};

template <int N>
struct Scene {
  std::string name;
  std::vector<Wall<N>> walls;
  std::vector<TopPiece<N>> pieces;
  std::vector<SpineGeodesic<N>> spines;
  std::map<std::string, double> weights;
  std::string base_piece;
  std::string frame = "standard";
  std::optional<GroupSection<N>> group;
  std::map<std::string, double> tolerances;
  json oracles;                        // null when absent
  std::vector<std::string> warnings;   // ingest notes, not serialized

  StratComplex<N> complex() const { return StratComplex<N>(walls, pieces, spines); }

  double tolerance(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }

  /// Validates the complex and the weights, then builds the domain.
  RegularDomain<N> domain() const {
    const StratComplex<N> s = complex();
    require_valid(s);
    const WeightFamily a = weights_from_map(s, weights);
    return build_domain(s, a, s.piece_index(base_piece));
  }
};

using AnyScene = std::variant<Scene<2>, Scene<3>>;

namespace detail {

class FieldError {
 public:
  void add(const std::string& path, const std::string& msg) { items_.push_back(path + ": " + msg); }
  bool empty() const { return items_.empty(); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
};

template <int N>
std::optional<MinkVector<N>> read_vector(const json& j, const std::string& path, FieldError& err) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N + 1)) {
    err.add(path, "expected an array of " + std::to_string(N + 1) + " numbers");
    return std::nullopt;
  }
  MinkVector<N> v;
  for (int i = 0; i <= N; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      err.add(path + "[" + std::to_string(i) + "]", "expected a number");
      return std::nullopt;
    }
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
    if (!std::isfinite(v[i])) {
      err.add(path + "[" + std::to_string(i) + "]", "not finite");
      return std::nullopt;
    }
  }
  return v;
}

template <int N>
json write_vector(const MinkVector<N>& v) {
  json a = json::array();
  for (int i = 0; i <= N; ++i) a.push_back(v[i]);
  return a;
}

inline const json* member(const json& obj, const char* key, const std::string& path, FieldError& err, bool required) {
  if (!obj.is_object()) {
    err.add(path, "expected an object");
    return nullptr;
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) err.add(path + "." + key, "missing");
    return nullptr;
  }
  return &*it;
}

inline std::optional<std::string> read_string(const json& obj, const char* key, const std::string& path, FieldError& err) {
  const json* j = member(obj, key, path, err, true);
  if (!j) return std::nullopt;
  if (!j->is_string()) {
    err.add(path + "." + key, "expected a string");
    return std::nullopt;
  }
  return j->get<std::string>();
}

template <int N>
Scene<N> parse_scene_body(const json& doc) {
  FieldError err;
  Scene<N> sc;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) sc.name = it->get<std::string>();

  if (const json* walls = member(doc, "walls", "$", err, true)) {
    if (!walls->is_array()) err.add("$.walls", "expected an array");
    else
      for (std::size_t i = 0; i < walls->size(); ++i) {
        const json& wj = (*walls)[i];
        const std::string path = "$.walls[" + std::to_string(i) + "]";
        Wall<N> w;
        if (auto id = read_string(wj, "id", path, err)) w.id = *id;
        if (const json* nj = member(wj, "normal", path, err, true))
          if (auto v = read_vector<N>(*nj, path + ".normal", err)) {
            const double q = norm2<N>(*v);
            if (!(q > 0)) {
              err.add(path + ".normal", "must be spacelike");
            } else {
              if (std::abs(q - 1.0) > 1e-12 * std::max(1.0, v->squaredNorm())) {
                std::ostringstream os;
                os << path << ".normal: Lorentz norm " << std::sqrt(q) << " != 1, normalized";
                sc.warnings.push_back(os.str());
                w.normal = *v / std::sqrt(q);
              } else {
                w.normal = *v;
              }
            }
          }
        if (const json* vj = member(wj, "ideal_vertices", path, err, false)) {
          for (std::size_t k = 0; vj->is_array() && k < vj->size(); ++k)
            if (auto u = read_vector<N>((*vj)[k], path + ".ideal_vertices[" + std::to_string(k) + "]", err)) {
              try {
                w.ideal_vertices.emplace_back(*u);
              } catch (const Error& e) {
                err.add(path + ".ideal_vertices[" + std::to_string(k) + "]", e.what());
              }
            }
        }
        if (const json* bj = member(wj, "bounds", path, err, false)) {
          for (std::size_t k = 0; bj->is_array() && k < bj->size(); ++k) {
            const std::string bp = path + ".bounds[" + std::to_string(k) + "]";
            HalfSpace<N> hs;
            if (const json* nj = member((*bj)[k], "normal", bp, err, true))
              if (auto v = read_vector<N>(*nj, bp + ".normal", err)) hs.normal = *v;
            if (const json* sj = member((*bj)[k], "side", bp, err, true)) {
              if (!sj->is_number_integer() || std::abs(sj->get<int>()) != 1) err.add(bp + ".side", "expected +1 or -1");
              else hs.side = sj->get<int>();
            }
            w.bounds.push_back(hs);
          }
        }
        if (const json* xj = member(wj, "witness", path, err, false))
          if (auto v = read_vector<N>(*xj, path + ".witness", err)) w.witness = *v;
        sc.walls.push_back(std::move(w));
      }
  }

  if (const json* pieces = member(doc, "pieces", "$", err, true)) {
    if (!pieces->is_array()) err.add("$.pieces", "expected an array");
    else
      for (std::size_t i = 0; i < pieces->size(); ++i) {
        const json& pj = (*pieces)[i];
        const std::string path = "$.pieces[" + std::to_string(i) + "]";
        TopPiece<N> p;
        if (auto id = read_string(pj, "id", path, err)) p.id = *id;
        if (const json* bj = member(pj, "bounding", path, err, true)) {
          for (std::size_t k = 0; bj->is_array() && k < bj->size(); ++k) {
            const json& e = (*bj)[k];
            const std::string bp = path + ".bounding[" + std::to_string(k) + "]";
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number_integer() ||
                std::abs(e[1].get<int>()) != 1) {
              err.add(bp, "expected [wall id, +1|-1]");
              continue;
            }
            p.bounding.emplace_back(e[0].get<std::string>(), e[1].get<int>());
          }
        }
        if (const json* xj = member(pj, "witness", path, err, false))
          if (auto v = read_vector<N>(*xj, path + ".witness", err)) p.witness = *v;
        sc.pieces.push_back(std::move(p));
      }
  }

  if (const json* spines = member(doc, "spines", "$", err, false)) {
    if (N == 2 && spines->is_array() && !spines->empty()) err.add("$.spines", "spines exist only for n = 3");
    for (std::size_t i = 0; spines->is_array() && i < spines->size(); ++i) {
      const json& sj = (*spines)[i];
      const std::string path = "$.spines[" + std::to_string(i) + "]";
      SpineGeodesic<N> sp;
      if (auto id = read_string(sj, "id", path, err)) sp.id = *id;
      if (const json* ej = member(sj, "endpoints", path, err, true)) {
        if (!ej->is_array() || ej->size() != 2) err.add(path + ".endpoints", "expected two null vectors");
        else {
          for (std::size_t k = 0; k < 2; ++k)
            if (auto u = read_vector<N>((*ej)[k], path + ".endpoints[" + std::to_string(k) + "]", err)) {
              try {
                (k == 0 ? sp.u1 : sp.u2) = NullDirection<N>(*u);
              } catch (const Error& e) {
                err.add(path + ".endpoints[" + std::to_string(k) + "]", e.what());
              }
            }
        }
      }
      if (const json* st = member(sj, "star", path, err, true)) {
        if (!st->is_array() || st->size() % 2 != 0 || st->size() < 4) err.add(path + ".star", "expected alternating piece/wall ids, even length >= 4");
        else
          for (std::size_t k = 0; k < st->size(); ++k) {
            if (!(*st)[k].is_string()) {
              err.add(path + ".star[" + std::to_string(k) + "]", "expected an id");
              continue;
            }
            (k % 2 == 0 ? sp.pieces : sp.walls).push_back((*st)[k].get<std::string>());
          }
      }
      sc.spines.push_back(std::move(sp));
    }
  }

  if (const json* wj = member(doc, "weights", "$", err, true)) {
    if (!wj->is_object()) err.add("$.weights", "expected an object wall id -> weight");
    else
      for (auto it = wj->begin(); it != wj->end(); ++it) {
        if (!it->is_number()) {
          err.add("$.weights." + it.key(), "expected a number");
          continue;
        }
        const double a = it->get<double>();
        if (!(a > 0)) err.add("$.weights." + it.key(), "weights must be positive");
        sc.weights[it.key()] = a;
      }
  }
  if (auto b = read_string(doc, "base_piece", "$", err)) sc.base_piece = *b;
  if (auto it = doc.find("frame"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != "standard") err.add("$.frame", "only the \"standard\" frame is supported");
  }
  if (auto it = doc.find("tolerances"); it != doc.end()) {
    for (auto t = it->begin(); it->is_object() && t != it->end(); ++t) {
      if (!t->is_number() || !(t->get<double>() > 0)) err.add("$.tolerances." + t.key(), "expected a positive number");
      else sc.tolerances[t.key()] = t->get<double>();
    }
  }
  if (auto it = doc.find("oracles"); it != doc.end()) sc.oracles = *it;

  if (auto it = doc.find("group"); it != doc.end()) {
    const json& gj = *it;
    GroupSection<N> g;
    if (auto b = gj.find("builtin"); b != gj.end() && b->is_string()) g.builtin = b->get<std::string>();
    if (const json* gens = member(gj, "generators", "$.group", err, true)) {
      for (std::size_t k = 0; gens->is_array() && k < gens->size(); ++k) {
        const json& m = (*gens)[k];
        const std::string path = "$.group.generators[" + std::to_string(k) + "]";
        LorentzMatrix<N> L;
        bool ok = m.is_array() && m.size() == static_cast<std::size_t>(N + 1);
        for (int r = 0; ok && r <= N; ++r) {
          auto row = read_vector<N>(m[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]", err);
          if (!row) ok = false;
          else L.row(r) = row->transpose();
        }
        if (!ok) err.add(path, "expected an (n+1)x(n+1) matrix");
        g.presentation.generators.push_back(L);
      }
    }
    if (const json* rel = member(gj, "relations", "$.group", err, false)) {
      for (std::size_t k = 0; rel->is_array() && k < rel->size(); ++k) {
        Word w;
        for (const auto& l : (*rel)[k])
          if (l.is_number_integer()) w.push_back(l.get<int>());
          else err.add("$.group.relations[" + std::to_string(k) + "]", "letters must be nonzero integers");
        g.presentation.relations.push_back(w);
      }
    }
    if (const json* co = member(gj, "cocycle", "$.group", err, false)) {
      for (std::size_t k = 0; co->is_array() && k < co->size(); ++k)
        if (auto v = read_vector<N>((*co)[k], "$.group.cocycle[" + std::to_string(k) + "]", err))
          g.presentation.cocycle.push_back(*v);
    }
    if (g.presentation.cocycle.empty()) g.presentation.cocycle.assign(g.presentation.generators.size(), MinkVector<N>::Zero());
    if (g.presentation.cocycle.size() != g.presentation.generators.size())
      err.add("$.group.cocycle", "one translation per generator expected");
    if (auto v = gj.find("word_ball"); v != gj.end()) {
      if (!v->is_number_integer() || v->get<int>() < 0) err.add("$.group.word_ball", "expected a non-negative integer");
      else g.word_ball = v->get<int>();
    }
    if (auto v = gj.find("core_radius"); v != gj.end() && v->is_number()) g.core_radius = v->get<double>();
    if (auto v = gj.find("enumeration_radius"); v != gj.end() && v->is_number()) g.enumeration_radius = v->get<double>();
    sc.group = std::move(g);
  }

  if (!err.empty()) throw ValidationError("scene schema violations", err.items());

  // Invariants of the complex, then of the weights.
  const StratComplex<N> s = sc.complex();
  const auto rep = validate_complex(s);
  for (const auto& w : s.walls())
    if (!sc.weights.count(w.id)) err.add("$.weights", "no weight for wall '" + w.id + "'");
  for (const auto& [id, a] : sc.weights) {
    bool known = false;
    for (const auto& w : s.walls()) known = known || w.id == id;
    if (!known) err.add("$.weights." + id, "unknown wall");
  }
  if (!s.has_piece(sc.base_piece)) err.add("$.base_piece", "unknown piece '" + sc.base_piece + "'");
  if (!rep.ok()) {
    std::vector<std::string> items = rep.errors;
    for (const auto& e : err.items()) items.push_back(e);
    throw ValidationError("invalid stratification", items);
  }
  if (!err.empty()) throw ValidationError("scene schema violations", err.items());
  const WeightFamily a = weights_from_map(s, sc.weights);
  std::vector<std::string> bad;
  const double tol_w = sc.tolerance("weights", tol::weights);
  for (const auto& r : weight_residuals(s, a))
    if (r.residual.norm() > tol_w) {
      std::ostringstream os;
      os << "spine '" << r.spine << "': weight residual " << r.residual.norm();
      bad.push_back(os.str());
    }
  if (!bad.empty()) throw ValidationError("weights violate the spine equations", bad);
  if (sc.group) validate_presentation(sc.group->presentation);
  return sc;
}

}  // namespace detail

/// Parses and validates a scene document.
inline AnyScene parse_scene(const json& doc) {
  detail::FieldError err;
  if (!doc.is_object()) throw ValidationError("scene must be a JSON object");
  if (doc.value("format", std::string()) != "regdom-scene") err.add("$.format", "expected \"regdom-scene\"");
  if (!doc.contains("version") || !doc["version"].is_number_integer()) err.add("$.version", "missing");
  else if (doc["version"].get<int>() != scene_version)
    err.add("$.version", "unsupported version " + std::to_string(doc["version"].get<int>()));
  if (!doc.contains("n") || !doc["n"].is_number_integer() || (doc["n"] != 2 && doc["n"] != 3))
    err.add("$.n", "expected 2 or 3");
  if (!err.empty()) throw ValidationError("scene schema violations", err.items());
  if (doc["n"].get<int>() == 2) return detail::parse_scene_body<2>(doc);
  return detail::parse_scene_body<3>(doc);
}

inline AnyScene parse_scene_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("scene is not valid JSON", {e.what()});
  }
  return parse_scene(doc);
}

inline AnyScene parse_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scene file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str());
}

template <int N>
json to_json(const Scene<N>& sc) {
  json doc;
  doc["format"] = "regdom-scene";
  doc["version"] = scene_version;
  doc["name"] = sc.name;
  doc["n"] = N;
  json walls = json::array();
  for (const auto& w : sc.walls) {
    json wj;
    wj["id"] = w.id;
    wj["normal"] = detail::write_vector<N>(w.normal);
    if (!w.ideal_vertices.empty()) {
      json iv = json::array();
      for (const auto& u : w.ideal_vertices) iv.push_back(detail::write_vector<N>(u.vec()));
      wj["ideal_vertices"] = iv;
    }
    if (!w.bounds.empty()) {
      json bj = json::array();
      for (const auto& h : w.bounds) bj.push_back({{"normal", detail::write_vector<N>(h.normal)}, {"side", h.side}});
      wj["bounds"] = bj;
    }
    if (w.witness) wj["witness"] = detail::write_vector<N>(*w.witness);
    walls.push_back(wj);
  }
  doc["walls"] = walls;
  json pieces = json::array();
  for (const auto& p : sc.pieces) {
    json pj;
    pj["id"] = p.id;
    json bj = json::array();
    for (const auto& [w, s] : p.bounding) bj.push_back({w, s});
    pj["bounding"] = bj;
    if (p.witness) pj["witness"] = detail::write_vector<N>(*p.witness);
    pieces.push_back(pj);
  }
  doc["pieces"] = pieces;
  json spines = json::array();
  for (const auto& sp : sc.spines) {
    json st = json::array();
    for (std::size_t i = 0; i < sp.pieces.size(); ++i) {
      st.push_back(sp.pieces[i]);
      if (i < sp.walls.size()) st.push_back(sp.walls[i]);
    }
    spines.push_back({{"id", sp.id},
                      {"endpoints", {detail::write_vector<N>(sp.u1.vec()), detail::write_vector<N>(sp.u2.vec())}},
                      {"star", st}});
  }
  doc["spines"] = spines;
  json weights = json::object();
  for (const auto& [id, a] : sc.weights) weights[id] = a;
  doc["weights"] = weights;
  doc["base_piece"] = sc.base_piece;
  doc["frame"] = sc.frame;
  if (sc.group) {
    const auto& g = *sc.group;
    json gens = json::array();
    for (const auto& L : g.presentation.generators) {
      json m = json::array();
      for (int r = 0; r <= N; ++r) m.push_back(detail::write_vector<N>(L.row(r).transpose()));
      gens.push_back(m);
    }
    json rels = json::array();
    for (const auto& w : g.presentation.relations) rels.push_back(w);
    json co = json::array();
    for (const auto& t : g.presentation.cocycle) co.push_back(detail::write_vector<N>(t));
    json gj{{"generators", gens},
            {"relations", rels},
            {"cocycle", co},
            {"word_ball", g.word_ball},
            {"core_radius", g.core_radius},
            {"enumeration_radius", g.enumeration_radius}};
    if (!g.builtin.empty()) gj["builtin"] = g.builtin;
    doc["group"] = gj;
  }
  if (!sc.tolerances.empty()) doc["tolerances"] = sc.tolerances;
  if (!sc.oracles.is_null()) doc["oracles"] = sc.oracles;
  return doc;
}

/// Doubles are written in the shortest form that reads back bit-exactly.
template <int N>
std::string serialize(const Scene<N>& sc) {
  return to_json(sc).dump(2) + "\n";
}

inline std::string serialize(const AnyScene& sc) {
  return std::visit([](const auto& s) { return serialize(s); }, sc);
}

/// Closure of the listed walls under the word ball, inside the core ball:
/// every image gamma P of a listed wall that meets the core must be listed,
/// with the same weight.
template <int N>
std::vector<std::string> check_group_closure(const Scene<N>& sc, std::size_t max_reports = 20) {
  std::vector<std::string> out;
  if (!sc.group) return out;
  const auto& g = *sc.group;
  const auto elems = enumerate_elements(g.presentation, g.word_ball, g.enumeration_radius);
  const double sinh_core = std::sinh(g.core_radius);
  for (const auto& e : elems) {
    for (const auto& w : sc.walls) {
      const MinkVector<N> v = e.linear * w.normal;
      // Distance from the origin to the carrier is asinh |v0|.
      if (std::abs(v[0]) > sinh_core) continue;
      bool found = false;
      for (const auto& u : sc.walls) {
        if ((u.normal - v).cwiseAbs().maxCoeff() < 1e-7 || (u.normal + v).cwiseAbs().maxCoeff() < 1e-7) {
          found = true;
          const double a0 = sc.weights.at(w.id), a1 = sc.weights.at(u.id);
          if (std::abs(a0 - a1) > 1e-8 * std::max(1.0, a0) && out.size() < max_reports)
            out.push_back("weight of '" + u.id + "' differs from its preimage '" + w.id + "'");
          break;
        }
      }
      if (!found && out.size() < max_reports)
        out.push_back("image of wall '" + w.id + "' under [" + word_to_string(e.word) + "] meets the core but is not listed");
    }
  }
  return out;
}

/// JSON export of the singularity complex.
template <int N>
json singularity_json(const RegularDomain<N>& d, const SingularityComplex<N>& sc) {
  json doc;
  doc["format"] = "regdom-singularity";
  doc["version"] = scene_version;
  doc["n"] = N;
  json verts = json::array();
  for (std::size_t i = 0; i < sc.vertices.size(); ++i)
    verts.push_back({{"id", sc.vertex_ids[i]}, {"position", detail::write_vector<N>(sc.vertices[i])}});
  doc["vertices"] = verts;
  json edges = json::array();
  for (const auto& e : sc.edges)
    edges.push_back({{"id", e.wall}, {"from", sc.vertex_ids[e.from]}, {"to", sc.vertex_ids[e.to]}, {"length", e.length}});
  doc["edges"] = edges;
  json faces = json::array();
  for (const auto& f : sc.faces) {
    json vs = json::array(), es = json::array();
    for (auto v : f.vertices) vs.push_back(sc.vertex_ids[v]);
    for (auto w : f.edges) es.push_back(d.complex().walls()[w].id);
    faces.push_back({{"spine", f.spine},
                     {"vertices", vs},
                     {"edges", es},
                     {"lengths", f.lengths},
                     {"angles", f.angles},
                     {"closure_residual", f.closure_residual}});
  }
  doc["faces"] = faces;
  return doc;
}

}  // namespace regdom

#pragma once

// Discrete-group bookkeeping: words in the generators, translation cocycles
// and the affine deformed action x -> g x + tau_g.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "regdom/lorentz.hpp"

namespace regdom {

/// A word in the generators. Letter +k means generator k-1, letter -k its
/// inverse.
using Word = std::vector<int>;

inline Word reduce_word(const Word& w) {
  Word out;
  for (int l : w) {
    if (!out.empty() && out.back() == -l) out.pop_back();
    else out.push_back(l);
  }
  return out;
}

inline Word inverse_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& l : out) l = -l;
  return out;
}

inline std::string word_to_string(const Word& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  return os.str();
}

/// Parses "1,-2,3"; the empty string is the identity.
inline Word parse_word(const std::string& s) {
  // Letters separated by commas and/or whitespace.
  std::string t(s);
  std::replace(t.begin(), t.end(), ',', ' ');
  Word w;
  std::istringstream ss(t);
  for (std::string tok; ss >> tok;) {
    int l = 0;
    try {
      std::size_t used = 0;
      l = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ValidationError("malformed word '" + s + "'");
    }
    if (l == 0) throw ValidationError("word letters are nonzero generator indices");
    w.push_back(l);
  }
  return w;
}

template <int N>
struct HolonomyDatum {
  Word word;
  LorentzMatrix<N> linear = LorentzMatrix<N>::Identity();
  MinkVector<N> tau = MinkVector<N>::Zero();

  static HolonomyDatum identity() { return {}; }
};

/// (alpha beta): linear part alpha*beta, tau_{alpha beta} = tau_alpha + alpha tau_beta.
template <int N>
HolonomyDatum<N> compose(const HolonomyDatum<N>& a, const HolonomyDatum<N>& b) {
  Word w = a.word;
  w.insert(w.end(), b.word.begin(), b.word.end());
  return {reduce_word(w), a.linear * b.linear, a.tau + a.linear * b.tau};
}

template <int N>
HolonomyDatum<N> inverse(const HolonomyDatum<N>& h) {
  const LorentzMatrix<N> inv = lorentz_inverse<N>(h.linear);
  return {inverse_word(h.word), inv, -(inv * h.tau)};
}

template <int N>
MinkVector<N> deformed_apply(const HolonomyDatum<N>& h, const MinkVector<N>& p) {
  return h.linear * p + h.tau;
}

template <int N>
struct GroupPresentation {
  std::vector<LorentzMatrix<N>> generators;
  std::vector<Word> relations;
  std::vector<MinkVector<N>> cocycle;  // translation part on each generator

  int rank() const { return static_cast<int>(generators.size()); }

  HolonomyDatum<N> letter(int l) const {
    const int k = std::abs(l) - 1;
    if (k < 0 || k >= rank()) throw ValidationError("word letter " + std::to_string(l) + " out of range");
    HolonomyDatum<N> g{{l}, generators[k], cocycle.empty() ? MinkVector<N>::Zero().eval() : cocycle[k]};
    return l > 0 ? g : inverse(HolonomyDatum<N>{{-l}, g.linear, g.tau});
  }

  HolonomyDatum<N> evaluate(const Word& w) const {
    HolonomyDatum<N> acc;
    for (int l : w) acc = compose(acc, letter(l));
    acc.word = reduce_word(w);
    return acc;
  }
};

template <int N>
struct RelationResidual {
  Word relation;
  double linear = 0.0;  // max |M - I|
  double cocycle = 0.0; // |tau|_inf
};

template <int N>
std::vector<RelationResidual<N>> relation_residuals(const GroupPresentation<N>& p) {
  std::vector<RelationResidual<N>> out;
  for (const Word& r : p.relations) {
    const auto h = p.evaluate(r);
    out.push_back({r, (h.linear - LorentzMatrix<N>::Identity()).cwiseAbs().maxCoeff(),
                   h.tau.cwiseAbs().maxCoeff()});
  }
  return out;
}

/// Throws a ValidationError listing every relation whose linear part or
/// cocycle fails to vanish within tol::relation.
template <int N>
void validate_presentation(const GroupPresentation<N>& p) {
  std::vector<std::string> bad;
  if (!p.cocycle.empty() && p.cocycle.size() != p.generators.size())
    bad.push_back("cocycle has " + std::to_string(p.cocycle.size()) + " entries for " +
                  std::to_string(p.generators.size()) + " generators");
  for (std::size_t i = 0; i < p.generators.size(); ++i)
    if (!is_orthochronous_isometry<N>(p.generators[i]))
      bad.push_back("generator " + std::to_string(i + 1) + " is not in SO+(n,1)");
  if (bad.empty()) {
    for (const auto& r : relation_residuals(p)) {
      if (r.linear > tol::relation || r.cocycle > tol::relation) {
        std::ostringstream os;
        os << "relation [" << word_to_string(r.relation) << "]: linear residual " << r.linear
           << ", cocycle residual " << r.cocycle;
        bad.push_back(os.str());
      }
    }
  }
  if (!bad.empty()) throw ValidationError("rejected group presentation", bad);
}

/// Group elements reached by words up to a given length, deduplicated.
template <int N>
struct WordBall {
  std::vector<HolonomyDatum<N>> elements;  // unique elements; word = first word found
  std::map<Word, std::size_t> index;       // every enumerated word -> element
  double max_merge_tau_gap = 0.0;          // worst cocycle disagreement among merged words

  const HolonomyDatum<N>& at(const Word& w) const {
    auto it = index.find(reduce_word(w));
    if (it == index.end()) throw ValidationError("word [" + word_to_string(w) + "] not in ball");
    return elements[it->second];
  }
};

namespace detail {

// Lookup of group elements by matrix, keyed on g_00 = cosh d(o, g o).
template <int N>
class ElementIndex {
 public:
  std::ptrdiff_t find(const LorentzMatrix<N>& g, const std::vector<HolonomyDatum<N>>& elems) const {
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    const double d = tol::dedup * scale;
    for (auto it = keys_.lower_bound(g(0, 0) - d); it != keys_.end() && it->first <= g(0, 0) + d; ++it) {
      if ((elems[it->second].linear - g).cwiseAbs().maxCoeff() <= d) return static_cast<std::ptrdiff_t>(it->second);
    }
    return -1;
  }
  void insert(const LorentzMatrix<N>& g, std::size_t i) { keys_.emplace(g(0, 0), i); }

 private:
  std::multimap<double, std::size_t> keys_;
};

}  // namespace detail

/// Extends the generator cocycle to every reduced word of length <= max_len
/// by the composition rule. Words naming the same element are merged; their
/// cocycle values must agree (this is where relation violations surface).
template <int N>
WordBall<N> extend_cocycle(const GroupPresentation<N>& p, int max_len) {
  validate_presentation(p);
  WordBall<N> ball;
  detail::ElementIndex<N> idx;
  std::vector<std::string> bad;

  auto add = [&](HolonomyDatum<N> h) {
    const std::ptrdiff_t j = idx.find(h.linear, ball.elements);
    if (j >= 0) {
      const auto& e = ball.elements[static_cast<std::size_t>(j)];
      const double scale = std::max({1.0, e.tau.cwiseAbs().maxCoeff(), e.linear.cwiseAbs().maxCoeff()});
      const double gap = (e.tau - h.tau).cwiseAbs().maxCoeff() / scale;
      ball.max_merge_tau_gap = std::max(ball.max_merge_tau_gap, gap);
      if (gap > tol::relation && bad.size() < 20)
        bad.push_back("words [" + word_to_string(e.word) + "] and [" + word_to_string(h.word) +
                      "] disagree on tau by " + std::to_string(gap));
      ball.index[h.word] = static_cast<std::size_t>(j);
    } else {
      ball.index[h.word] = ball.elements.size();
      idx.insert(h.linear, ball.elements.size());
      ball.elements.push_back(std::move(h));
    }
  };

  std::vector<HolonomyDatum<N>> frontier{HolonomyDatum<N>::identity()};
  add(frontier.front());
  std::vector<HolonomyDatum<N>> letters;
  for (int k = 1; k <= p.rank(); ++k) {
    letters.push_back(p.letter(k));
    letters.push_back(p.letter(-k));
  }
  for (int len = 1; len <= max_len; ++len) {
    std::vector<HolonomyDatum<N>> next;
    for (const auto& w : frontier) {
      for (const auto& g : letters) {
        if (!w.word.empty() && w.word.back() == -g.word.front()) continue;
        HolonomyDatum<N> h{w.word, w.linear * g.linear, w.tau + w.linear * g.tau};
        h.word.push_back(g.word.front());
        add(h);
        next.push_back(std::move(h));
      }
    }
    frontier = std::move(next);
  }
  if (!bad.empty()) throw ValidationError("cocycle is inconsistent on merged words", bad);
  return ball;
}

/// Breadth-first enumeration of distinct elements g with word length <=
/// max_len and d(o, g o) <= max_dist. Each element keeps its first word.
template <int N>
std::vector<HolonomyDatum<N>> enumerate_elements(const GroupPresentation<N>& p, int max_len, double max_dist) {
  std::vector<HolonomyDatum<N>> elems{HolonomyDatum<N>::identity()};
  detail::ElementIndex<N> idx;
  idx.insert(elems.front().linear, 0);
  const double cosh_max = std::cosh(max_dist);
  std::vector<HolonomyDatum<N>> letters;
  for (int k = 1; k <= p.rank(); ++k) {
    letters.push_back(p.letter(k));
    letters.push_back(p.letter(-k));
  }
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = elems.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& g : letters) {
        HolonomyDatum<N> h = compose(elems[i], g);
        if (h.linear(0, 0) > cosh_max) continue;
        if (idx.find(h.linear, elems) >= 0) continue;
        idx.insert(h.linear, elems.size());
        elems.push_back(std::move(h));
      }
    }
    if (elems.size() == end) break;
    begin = end;
  }
  return elems;
}

/// tau_g = g v - v on each generator.
template <int N>
std::vector<MinkVector<N>> coboundary(const GroupPresentation<N>& p, const MinkVector<N>& v) {
  std::vector<MinkVector<N>> out;
  out.reserve(p.generators.size());
  for (const auto& g : p.generators) out.push_back(g * v - v);
  return out;
}

/// Genus-2 surface group from the side pairings of the regular octagon with
/// vertex angle pi/4: g_k = R(k pi/4) B(2d) R(-k pi/4), cosh d = 1 + sqrt 2,
/// with the surface relation g1 g2^-1 g3 g4^-1 g1^-1 g2 g3^-1 g4 = 1.
inline GroupPresentation<2> builtin_octagon_group() {
  GroupPresentation<2> p;
  const double d = std::acosh(1.0 + std::numbers::sqrt2);
  for (int k = 0; k < 4; ++k) {
    const double th = k * std::numbers::pi / 4.0;
    p.generators.push_back(rotation<2>(1, 2, th) * boost<2>(1, 2.0 * d) * rotation<2>(1, 2, -th));
  }
  p.relations.push_back({1, -2, 3, -4, -1, 2, -3, 4});
  p.cocycle.assign(4, MinkVector<2>::Zero());
  return p;
}

}  // namespace regdom

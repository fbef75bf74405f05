#pragma once

#include <array>
#include <sstream>
#include <string>
#include <string_view>

#include "attnkit/errors.hpp"
#include "attnkit/matrix.hpp"

namespace attnkit {

// The two-axis taxonomy: conditionality (self vs cross source) crossed with
// causality (whether position i may see positions > i of the target side).
enum class AttentionPattern {
  NoncausalSelf,
  CausalSelf,
  NoncausalCross,
  CausalCross,
};

constexpr bool is_causal(AttentionPattern p) {
  return p == AttentionPattern::CausalSelf || p == AttentionPattern::CausalCross;
}

constexpr bool is_self(AttentionPattern p) {
  return p == AttentionPattern::NoncausalSelf || p == AttentionPattern::CausalSelf;
}

constexpr std::array<AttentionPattern, 4> all_patterns() {
  return {AttentionPattern::NoncausalSelf, AttentionPattern::CausalSelf,
          AttentionPattern::NoncausalCross, AttentionPattern::CausalCross};
}

inline const char* pattern_code(AttentionPattern p) {
  switch (p) {
    case AttentionPattern::NoncausalSelf: return "ns";
    case AttentionPattern::CausalSelf: return "cs";
    case AttentionPattern::NoncausalCross: return "nc";
    case AttentionPattern::CausalCross: return "cc";
  }
  return "?";
}

inline AttentionPattern parse_pattern(std::string_view s) {
  if (s == "ns") return AttentionPattern::NoncausalSelf;
  if (s == "cs") return AttentionPattern::CausalSelf;
  if (s == "nc") return AttentionPattern::NoncausalCross;
  if (s == "cc") return AttentionPattern::CausalCross;
  throw ConfigError("unknown attention pattern: " + std::string(s));
}

enum class Mechanism {
  Vanilla,
  Local,
  Lara,
  Cosformer,
  Performer,
  Nystrom,
  Abc,
  Probsparse,
  Longshort,
  S4d,
};

constexpr std::array<Mechanism, 10> all_mechanisms() {
  return {Mechanism::Vanilla,   Mechanism::Local,      Mechanism::Lara,
          Mechanism::Cosformer, Mechanism::Performer,  Mechanism::Nystrom,
          Mechanism::Abc,       Mechanism::Probsparse, Mechanism::Longshort,
          Mechanism::S4d};
}

inline const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::Vanilla: return "vanilla";
    case Mechanism::Local: return "local";
    case Mechanism::Lara: return "lara";
    case Mechanism::Cosformer: return "cosformer";
    case Mechanism::Performer: return "performer";
    case Mechanism::Nystrom: return "nystrom";
    case Mechanism::Abc: return "abc";
    case Mechanism::Probsparse: return "probsparse";
    case Mechanism::Longshort: return "longshort";
    case Mechanism::S4d: return "s4d";
  }
  return "?";
}

inline Mechanism parse_mechanism(std::string_view s) {
  for (Mechanism m : all_mechanisms()) {
    if (s == mechanism_name(m)) return m;
  }
  throw ConfigError("unknown mechanism: " + std::string(s));
}

// Pattern support matrix. vanilla covers all four patterns; each efficient
// mechanism supports exactly the patterns its construction permits: local
// {ns,cs}; lara {ns}; cosformer {ns,nc}; performer {ns,nc,cc}; nystrom {ns};
// abc {ns,cs,nc,cc}; probsparse {ns}; longshort {ns,cs}; s4d {ns,cs}.
inline bool check_support(Mechanism m, AttentionPattern p) {
  using P = AttentionPattern;
  switch (m) {
    case Mechanism::Vanilla: return true;
    case Mechanism::Local: return p == P::NoncausalSelf || p == P::CausalSelf;
    case Mechanism::Lara: return p == P::NoncausalSelf;
    case Mechanism::Cosformer: return p == P::NoncausalSelf || p == P::NoncausalCross;
    case Mechanism::Performer:
      return p == P::NoncausalSelf || p == P::NoncausalCross || p == P::CausalCross;
    case Mechanism::Nystrom: return p == P::NoncausalSelf;
    case Mechanism::Abc: return true;
    case Mechanism::Probsparse: return p == P::NoncausalSelf;
    case Mechanism::Longshort: return p == P::NoncausalSelf || p == P::CausalSelf;
    case Mechanism::S4d: return p == P::NoncausalSelf || p == P::CausalSelf;
  }
  throw ConfigError("unknown mechanism");
}

inline std::string support_matrix_csv() {
  std::ostringstream out;
  out << "mechanism,ns,cs,nc,cc\n";
  for (Mechanism m : all_mechanisms()) {
    out << mechanism_name(m);
    for (AttentionPattern p : all_patterns()) {
      out << ',' << (check_support(m, p) ? "yes" : "no");
    }
    out << '\n';
  }
  return out.str();
}

// Query/key/value triple tagged with its pattern and head count.
struct AttentionInputs {
  Matrix q;  // n x d
  Matrix k;  // m x d
  Matrix v;  // m x d
  AttentionPattern pattern = AttentionPattern::NoncausalSelf;
  std::size_t heads = 1;

  std::size_t target_len() const { return q.rows(); }
  std::size_t source_len() const { return k.rows(); }
  std::size_t dim() const { return q.cols(); }
  std::size_t head_dim() const { return q.cols() / heads; }

  static AttentionInputs make(Matrix q, Matrix k, Matrix v,
                              AttentionPattern pattern, std::size_t heads) {
    if (heads == 0) throw ConfigError("heads must be >= 1");
    if (q.cols() != k.cols() || q.cols() != v.cols()) {
      throw ShapeError("attention inputs: q, k, v must share the model dimension");
    }
    if (k.rows() != v.rows()) throw ShapeError("attention inputs: k and v lengths differ");
    if (q.cols() % heads != 0) throw ShapeError("attention inputs: dim not divisible by heads");
    if (q.rows() == 0 || k.rows() == 0) throw ShapeError("attention inputs: empty sequence");
    if (is_self(pattern) && q.rows() != k.rows()) {
      throw ShapeError("attention inputs: self patterns require equal lengths");
    }
    AttentionInputs in;
    in.q = std::move(q);
    in.k = std::move(k);
    in.v = std::move(v);
    in.pattern = pattern;
    in.heads = heads;
    return in;
  }
};

struct ProjectionWeights {
  Matrix wq;  // d x d
  Matrix wk;
  Matrix wv;

  static ProjectionWeights make(Matrix wq, Matrix wk, Matrix wv) {
    for (const Matrix* w : {&wq, &wk, &wv}) {
      if (w->rows() != w->cols()) throw ShapeError("projection weights must be square");
      if (!w->all_finite()) throw NumericError("projection weights must be finite");
    }
    if (wq.rows() != wk.rows() || wq.rows() != wv.rows()) {
      throw ShapeError("projection weights must share dimensions");
    }
    ProjectionWeights w;
    w.wq = std::move(wq);
    w.wk = std::move(wk);
    w.wv = std::move(wv);
    return w;
  }
};

// Q = target * Wq, K = source * Wk, V = source * Wv.
inline AttentionInputs project(const Matrix& source, const Matrix& target,
                               const ProjectionWeights& w, AttentionPattern pattern,
                               std::size_t heads) {
  if (source.cols() != w.wk.rows() || target.cols() != w.wq.rows()) {
    throw ShapeError("project: input dimension does not match weights");
  }
  if (is_self(pattern) &&
      (source.rows() != target.rows() || source.cols() != target.cols())) {
    throw ShapeError("project: self patterns require source and target of equal shape");
  }
  return AttentionInputs::make(matmul(target, w.wq), matmul(source, w.wk),
                               matmul(source, w.wv), pattern, heads);
}

}  // namespace attnkit

/* Copyright 2026 The rpsense Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Exact algebra of six-site Pauli operators. Site 0 (radical A) is the most
// significant qubit of the dense basis index, so sigma_z on site 0 is
// diag(+1 x 32, -1 x 32).

#include <rpsense/core.hpp>

#include <algorithm>
#include <initializer_list>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rpsense {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Coefficients below this magnitude are dropped when terms are merged.
inline constexpr double kPruneTolerance = 1e-14;

inline char pauli_char(Pauli p) {
  constexpr std::array<char, 4> chars{'I', 'X', 'Y', 'Z'};
  return chars[static_cast<int>(p)];
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw InvalidInput(std::string("unknown Pauli label '") + c + "'");
  }
}

/// Single-site product p*q = phase * r.
inline std::pair<Pauli, Complex> pauli_product(Pauli p, Pauli q) {
  if (p == Pauli::I) return {q, 1.0};
  if (q == Pauli::I) return {p, 1.0};
  if (p == q) return {Pauli::I, 1.0};
  const int a = static_cast<int>(p);
  const int b = static_cast<int>(q);
  // X,Y,Z are 1,2,3; the remaining label is 6 - a - b. Cyclic order gives +i.
  const auto r = static_cast<Pauli>(6 - a - b);
  const bool cyclic = (b - a + 3) % 3 == 1;
  return {r, cyclic ? kI : -kI};
}

/// A weighted tensor product of six single-site Pauli matrices.
struct PauliString {
  std::array<Pauli, kNumSites> labels{};
  Complex coefficient{1.0, 0.0};

  PauliString() = default;
  PauliString(std::array<Pauli, kNumSites> l, Complex c) : labels(l), coefficient(c) {}

  /// Parses a label string such as "ZIIXII". Shorter strings are padded with
  /// identities on the trailing (environment) sites.
  static PauliString parse(std::string_view text, Complex coeff = 1.0) {
    if (text.size() > kNumSites) {
      throw InvalidInput("Pauli label string longer than " + std::to_string(kNumSites));
    }
    PauliString s;
    s.coefficient = coeff;
    for (std::size_t i = 0; i < text.size(); ++i) s.labels[i] = pauli_from_char(text[i]);
    return s;
  }

  static PauliString single(int site, Pauli p, Complex coeff = 1.0) {
    PauliString s;
    s.labels.at(static_cast<std::size_t>(site)) = p;
    s.coefficient = coeff;
    return s;
  }

  static PauliString pair(int site_a, Pauli pa, int site_b, Pauli pb, Complex coeff = 1.0) {
    PauliString s = single(site_a, pa, coeff);
    s.labels.at(static_cast<std::size_t>(site_b)) = pb;
    return s;
  }

  std::string label_string() const {
    std::string out;
    for (Pauli p : labels) out.push_back(pauli_char(p));
    return out;
  }

  /// Packed key; lexicographic in the label string.
  std::uint16_t key() const {
    std::uint16_t k = 0;
    for (Pauli p : labels) k = static_cast<std::uint16_t>((k << 2) | static_cast<std::uint16_t>(p));
    return k;
  }

  static std::array<Pauli, kNumSites> labels_from_key(std::uint16_t k) {
    std::array<Pauli, kNumSites> l{};
    for (int s = kNumSites - 1; s >= 0; --s) {
      l[static_cast<std::size_t>(s)] = static_cast<Pauli>(k & 3);
      k = static_cast<std::uint16_t>(k >> 2);
    }
    return l;
  }
};

inline PauliString multiply(const PauliString& a, const PauliString& b) {
  PauliString out;
  Complex phase = a.coefficient * b.coefficient;
  for (std::size_t s = 0; s < kNumSites; ++s) {
    auto [r, ph] = pauli_product(a.labels[s], b.labels[s]);
    out.labels[s] = r;
    phase *= ph;
  }
  out.coefficient = phase;
  return out;
}

/// Sparse operator: label string -> complex coefficient.
class PauliSum {
 public:
  using TermMap = std::map<std::uint16_t, Complex>;

  PauliSum() = default;
  PauliSum(const PauliString& s) { add(s); }  // NOLINT(google-explicit-constructor)

  static PauliSum identity(Complex coeff = 1.0) { return PauliSum(PauliString({}, coeff)); }

  static PauliSum single(int site, Pauli p, Complex coeff = 1.0) {
    return PauliSum(PauliString::single(site, p, coeff));
  }

  PauliSum& add(const PauliString& s) {
    accumulate(s.key(), s.coefficient);
    return *this;
  }

  PauliSum& operator+=(const PauliSum& o) {
    for (const auto& [k, c] : o.terms_) accumulate(k, c);
    return *this;
  }
  PauliSum& operator-=(const PauliSum& o) {
    for (const auto& [k, c] : o.terms_) accumulate(k, -c);
    return *this;
  }
  PauliSum& operator*=(Complex scale) {
    if (scale == Complex{0.0, 0.0}) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= scale;
    prune();
    return *this;
  }

  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, Complex s) { return a *= s; }
  friend PauliSum operator*(Complex s, PauliSum a) { return a *= s; }
  friend PauliSum operator*(PauliSum a, double s) { return a *= Complex(s, 0.0); }
  friend PauliSum operator*(double s, PauliSum a) { return a *= Complex(s, 0.0); }

  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    PauliSum out;
    for (const auto& [ka, ca] : a.terms_) {
      const PauliString sa(PauliString::labels_from_key(ka), ca);
      for (const auto& [kb, cb] : b.terms_) {
        const PauliString p = multiply(sa, PauliString(PauliString::labels_from_key(kb), cb));
        out.accumulate_raw(p.key(), p.coefficient);
      }
    }
    out.prune();
    return out;
  }

  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Complex coefficient(std::string_view labels) const {
    auto it = terms_.find(PauliString::parse(labels).key());
    return it == terms_.end() ? Complex{} : it->second;
  }

  /// Sum of |c|^2 over terms.
  double weight() const {
    double w = 0.0;
    for (const auto& [k, c] : terms_) w += std::norm(c);
    return w;
  }

  /// Frobenius norm of the 64x64 dense operator; Pauli strings are
  /// orthogonal with squared norm 64.
  double frobenius_norm() const { return std::sqrt(kJointDim * weight()); }

  double max_coefficient() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  bool is_hermitian(double tol = 1e-12) const {
    for (const auto& [k, c] : terms_) {
      if (std::abs(c.imag()) > tol) return false;
    }
    return true;
  }

  PauliSum adjoint() const {
    PauliSum out = *this;
    for (auto& [k, c] : out.terms_) c = std::conj(c);
    return out;
  }

  /// True if any term acts non-trivially on one of `sites`.
  bool touches(std::initializer_list<int> sites) const {
    for (const auto& [k, c] : terms_) {
      const auto l = PauliString::labels_from_key(k);
      for (int s : sites) {
        if (l[static_cast<std::size_t>(s)] != Pauli::I) return true;
      }
    }
    return false;
  }

  std::vector<PauliString> strings() const {
    std::vector<PauliString> out;
    out.reserve(terms_.size());
    for (const auto& [k, c] : terms_) out.emplace_back(PauliString::labels_from_key(k), c);
    return out;
  }

  /// Drops every term whose magnitude is below `tol`.
  void prune(double tol = kPruneTolerance) {
    std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) < tol; });
  }

 private:
  void accumulate(std::uint16_t key, Complex c) {
    Complex& slot = terms_[key];
    slot += c;
    if (std::abs(slot) < kPruneTolerance) terms_.erase(key);
  }
  void accumulate_raw(std::uint16_t key, Complex c) { terms_[key] += c; }

  TermMap terms_;
};

inline PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  PauliSum out = a * b;
  out -= b * a;
  out.prune();
  return out;
}

namespace detail {

// For basis row r, a Pauli string has its single nonzero in column
// r ^ flip_mask with value coefficient * row_phase(r).
struct StringAction {
  int flip_mask = 0;
  std::array<Complex, kJointDim> row_phase{};
};

inline StringAction string_action(const std::array<Pauli, kNumSites>& labels) {
  StringAction act;
  for (int s = 0; s < kNumSites; ++s) {
    const Pauli p = labels[static_cast<std::size_t>(s)];
    if (p == Pauli::X || p == Pauli::Y) act.flip_mask |= 1 << (kNumSites - 1 - s);
  }
  for (int r = 0; r < kJointDim; ++r) {
    Complex v = 1.0;
    for (int s = 0; s < kNumSites; ++s) {
      const int bit = (r >> (kNumSites - 1 - s)) & 1;
      switch (labels[static_cast<std::size_t>(s)]) {
        case Pauli::I:
        case Pauli::X: break;
        case Pauli::Y: v *= bit == 0 ? -kI : kI; break;
        case Pauli::Z: v *= bit == 0 ? 1.0 : -1.0; break;
      }
    }
    act.row_phase[static_cast<std::size_t>(r)] = v;
  }
  return act;
}

}  // namespace detail

/// Dense 64x64 matrix of a Pauli sum.
inline Matrix to_dense(const PauliSum& op) {
  Matrix m = Matrix::Zero(kJointDim, kJointDim);
  for (const auto& [k, c] : op.terms()) {
    const auto act = detail::string_action(PauliString::labels_from_key(k));
    for (int r = 0; r < kJointDim; ++r) {
      m(r, r ^ act.flip_mask) += c * act.row_phase[static_cast<std::size_t>(r)];
    }
  }
  return m;
}

/// Hilbert-Schmidt expansion: coefficient of P is tr[P^dagger m] / 64.
inline PauliSum from_dense(const Matrix& m) {
  if (m.rows() != kJointDim || m.cols() != kJointDim) {
    throw InvalidInput("from_dense expects a 64x64 matrix, got " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()));
  }
  PauliSum out;
  for (int key = 0; key < (1 << (2 * kNumSites)); ++key) {
    const auto labels = PauliString::labels_from_key(static_cast<std::uint16_t>(key));
    const auto act = detail::string_action(labels);
    Complex acc = 0.0;
    for (int r = 0; r < kJointDim; ++r) {
      acc += std::conj(act.row_phase[static_cast<std::size_t>(r)]) * m(r, r ^ act.flip_mask);
    }
    acc /= static_cast<double>(kJointDim);
    if (std::abs(acc) >= kPruneTolerance) out.add(PauliString(labels, acc));
  }
  return out;
}

/// Debug text form: one `<re> <im> <labels>` line per term, in label order.
inline void write_pauli_sum(std::ostream& os, const PauliSum& op) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  for (const auto& s : op.strings()) {
    os << s.coefficient.real() << ' ' << s.coefficient.imag() << ' ' << s.label_string() << '\n';
  }
  os.flags(old_flags);
  os.precision(old_prec);
}

inline std::string to_string(const PauliSum& op) {
  std::ostringstream os;
  write_pauli_sum(os, op);
  return os.str();
}

inline PauliSum read_pauli_sum(std::istream& is) {
  PauliSum out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    double re = 0.0, im = 0.0;
    std::string labels;
    if (!(ls >> re >> im >> labels)) {
      throw InvalidInput("malformed Pauli term on line " + std::to_string(line_no));
    }
    out.add(PauliString::parse(labels, Complex(re, im)));
  }
  return out;
}

}  // namespace rpsense

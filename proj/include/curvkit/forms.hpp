#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "curvkit/field.hpp"

namespace curvkit {

/// Left-normalization of a coefficient past dn^mu: dn^mu f = (E_mu f) dn^mu.
/// Coefficients commute freely with dx^i.
inline Field normalize_commute(int mu, const Field& f) { return f.shift(mu); }

/// Canonical basis wedge: dn indices strictly ascending, then dx indices
/// strictly ascending. All covector coefficients sit to the left.
struct BasisWedge {
  std::vector<int> dn;
  std::vector<int> dx;

  int degree() const { return static_cast<int>(dn.size() + dx.size()); }

  bool operator<(const BasisWedge& o) const {
    if (dn != o.dn) return dn < o.dn;
    return dx < o.dx;
  }
  bool operator==(const BasisWedge&) const = default;

  std::string to_string() const {
    if (dn.empty() && dx.empty()) return "1";
    std::string s;
    for (int mu : dn) {
      if (!s.empty()) s += "^";
      s += "dn" + std::to_string(mu);
    }
    for (int i : dx) {
      if (!s.empty()) s += "^";
      s += "dx" + std::to_string(i);
    }
    return s;
  }

  void validate(const Domain& dom) const {
    for (size_t k = 0; k < dn.size(); ++k) {
      if (dn[k] < 0 || dn[k] >= dom.p())
        throw ConfigError("wedge uses dn" + std::to_string(dn[k]) +
                          " outside p=" + std::to_string(dom.p()));
      if (k > 0 && dn[k - 1] >= dn[k])
        throw ConfigError("wedge dn indices must be strictly ascending");
    }
    for (size_t k = 0; k < dx.size(); ++k) {
      if (dx[k] < 0 || dx[k] >= dom.q())
        throw ConfigError("wedge uses dx" + std::to_string(dx[k]) +
                          " outside q=" + std::to_string(dom.q()));
      if (k > 0 && dx[k - 1] >= dx[k])
        throw ConfigError("wedge dx indices must be strictly ascending");
    }
  }
};

namespace detail_forms {

/// Sort a concatenated covector id sequence (dn mu -> mu, dx i -> p + i)
/// into canonical ascending order. Returns the permutation sign, or 0 when
/// a covector repeats (the wedge annihilates).
inline int canonical_sign(std::vector<int>& ids) {
  int sign = 1;
  for (size_t a = 0; a < ids.size(); ++a)
    for (size_t b = a + 1; b < ids.size(); ++b) {
      if (ids[a] == ids[b]) return 0;
      if (ids[a] > ids[b]) sign = -sign;
    }
  std::sort(ids.begin(), ids.end());
  return sign;
}

}  // namespace detail_forms

/// Differential form with matrix coefficients, stored as a map from
/// canonical basis wedges to left coefficients. All terms share one
/// coefficient shape; structurally zero coefficients are dropped on entry.
class Form {
 public:
  Form(const Domain& dom, int degree, int rows, int cols)
      : dom_(dom), degree_(degree), rows_(rows), cols_(cols) {
    if (degree < 0) throw ConfigError("form degree must be non-negative");
    if (rows < 1 || cols < 1) throw ConfigError("form shape must be positive");
  }

  static Form from_field(const Field& f) {
    Form w(f.domain(), 0, f.rows(), f.cols());
    w.add_term(BasisWedge{}, f);
    return w;
  }

  const Domain& domain() const { return dom_; }
  int degree() const { return degree_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return terms_.empty(); }
  const std::map<BasisWedge, Field>& terms() const { return terms_; }

  /// Accumulates f against wedge W; drops the entry if it lands
  /// structurally at zero.
  void add_term(const BasisWedge& w, const Field& f) {
    w.validate(dom_);
    if (w.degree() != degree_)
      throw ConfigError("wedge " + w.to_string() + " has degree " +
                        std::to_string(w.degree()) + ", form has degree " +
                        std::to_string(degree_));
    if (!(f.domain() == dom_)) throw ConfigError("coefficient lives on another domain");
    if (f.rows() != rows_ || f.cols() != cols_)
      throw ConfigError("coefficient shape does not match form shape");
    auto it = terms_.find(w);
    if (it == terms_.end()) {
      if (!f.is_zero()) terms_.emplace(w, f);
      return;
    }
    Field sum = it->second + f;
    if (sum.is_zero())
      terms_.erase(it);
    else
      it->second = sum;
  }

  /// Coefficient of W, or a structural zero when absent.
  Field coefficient(const BasisWedge& w) const {
    auto it = terms_.find(w);
    if (it != terms_.end()) return it->second;
    return Field::zero(dom_, rows_, cols_);
  }

  Form operator+(const Form& rhs) const {
    require_compatible(rhs);
    Form out = *this;
    for (const auto& [w, f] : rhs.terms_) out.add_term(w, f);
    return out;
  }

  Form operator-(const Form& rhs) const { return *this + rhs.scaled(-1.0); }

  Form scaled(Complex factor) const {
    Form out(dom_, degree_, rows_, cols_);
    for (const auto& [w, f] : terms_) out.add_term(w, f.scaled(factor));
    return out;
  }

  /// Graded product. Moving a right coefficient past dn^mu applies E_mu;
  /// repeated covectors annihilate; the merged wedge is re-sorted into
  /// canonical order with its permutation sign.
  Form wedge(const Form& rhs) const {
    if (!(dom_ == rhs.dom_)) throw ConfigError("forms live on different domains");
    auto [rr, rc] = product_shape(rhs);
    Form out(dom_, degree_ + rhs.degree_, rr, rc);
    for (const auto& [wa, fa] : terms_) {
      for (const auto& [wb, fb] : rhs.terms_) {
        std::vector<int> ids;
        ids.reserve(static_cast<size_t>(wa.degree() + wb.degree()));
        for (int mu : wa.dn) ids.push_back(mu);
        for (int i : wa.dx) ids.push_back(dom_.p() + i);
        for (int mu : wb.dn) ids.push_back(mu);
        for (int i : wb.dx) ids.push_back(dom_.p() + i);
        const int sign = detail_forms::canonical_sign(ids);
        if (sign == 0) continue;
        Field rf = fb;
        for (int mu : wa.dn) rf = rf.shift(mu);
        Field coeff = fa * rf;
        if (sign < 0) coeff = coeff.scaled(-1.0);
        BasisWedge w;
        for (int id : ids) {
          if (id < dom_.p())
            w.dn.push_back(id);
          else
            w.dx.push_back(id - dom_.p());
        }
        out.add_term(w, coeff);
      }
    }
    return out;
  }

  /// Discrete part of the differential: sum_mu (Delta_mu f) dn^mu ^ W.
  Form d_discrete() const {
    Form out(dom_, degree_ + 1, rows_, cols_);
    for (const auto& [w, f] : terms_) {
      for (int mu = 0; mu < dom_.p(); ++mu) {
        if (std::find(w.dn.begin(), w.dn.end(), mu) != w.dn.end()) continue;
        out.add_term(prepend_dn(w, mu), sign_of_prepend_dn(w, mu) < 0
                                            ? f.delta(mu).scaled(-1.0)
                                            : f.delta(mu));
      }
    }
    return out;
  }

  /// Continuous part: sum_i (partial_i f) dx^i ^ W.
  Form d_continuous(int order = 2) const {
    Form out(dom_, degree_ + 1, rows_, cols_);
    for (const auto& [w, f] : terms_) {
      for (int i = 0; i < dom_.q(); ++i) {
        if (std::find(w.dx.begin(), w.dx.end(), i) != w.dx.end()) continue;
        out.add_term(prepend_dx(w, i), sign_of_prepend_dx(w, i) < 0
                                           ? f.partial(i, order).scaled(-1.0)
                                           : f.partial(i, order));
      }
    }
    return out;
  }

  Form d(int order = 2) const { return d_discrete() + d_continuous(order); }

  /// Largest coefficient max-norm across terms (0 for the empty form).
  double max_norm() const {
    double v = 0.0;
    for (const auto& [w, f] : terms_) v = std::max(v, f.max_norm());
    return v;
  }

  /// Intersection of all coefficient regions (full domain for the empty
  /// form).
  Region common_region() const {
    Region reg = Region::full(dom_);
    for (const auto& [w, f] : terms_) reg = reg.intersect(f.region());
    return reg;
  }

 private:
  void require_compatible(const Form& rhs) const {
    if (!(dom_ == rhs.dom_)) throw ConfigError("forms live on different domains");
    if (degree_ != rhs.degree_)
      throw ConfigError("form degrees differ: " + std::to_string(degree_) + " vs " +
                        std::to_string(rhs.degree_));
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
      throw ConfigError("form shapes differ");
  }

  std::pair<int, int> product_shape(const Form& rhs) const {
    if (rows_ == 1 && cols_ == 1) return {rhs.rows_, rhs.cols_};
    if (rhs.rows_ == 1 && rhs.cols_ == 1) return {rows_, cols_};
    if (cols_ != rhs.rows_)
      throw ConfigError("coefficient shapes do not compose in wedge product");
    return {rows_, rhs.cols_};
  }

  static BasisWedge prepend_dn(const BasisWedge& w, int mu) {
    BasisWedge out = w;
    out.dn.insert(std::upper_bound(out.dn.begin(), out.dn.end(), mu), mu);
    return out;
  }
  static int sign_of_prepend_dn(const BasisWedge& w, int mu) {
    // dn^mu starts in front; each smaller dn index passes over it
    int before = 0;
    for (int nu : w.dn)
      if (nu < mu) ++before;
    return before % 2 == 0 ? 1 : -1;
  }

  static BasisWedge prepend_dx(const BasisWedge& w, int i) {
    BasisWedge out = w;
    out.dx.insert(std::upper_bound(out.dx.begin(), out.dx.end(), i), i);
    return out;
  }
  static int sign_of_prepend_dx(const BasisWedge& w, int i) {
    // dx^i passes every dn and every smaller dx index
    int before = static_cast<int>(w.dn.size());
    for (int j : w.dx)
      if (j < i) ++before;
    return before % 2 == 0 ? 1 : -1;
  }

  Domain dom_;
  int degree_;
  int rows_;
  int cols_;
  std::map<BasisWedge, Field> terms_;
};

inline double max_abs_diff(const Form& a, const Form& b) { return (a - b).max_norm(); }

namespace detail_forms {

/// Anti-difference along mu with base value 0 at the lower region edge:
/// g(n) = sum_{k=lo}^{n-1} f(k), so Delta_mu g = f wherever both sides
/// exist. The result region extends one step past f along mu, clipped to
/// the domain box.
inline Field anti_difference(const Field& f, int mu) {
  Field fs = f.sampled();
  const Region& src = fs.region();
  const size_t m = static_cast<size_t>(mu);
  Region reg = src;
  reg.lat[m].hi = std::min(src.lat[m].hi + 1, f.domain().extent(mu).hi);
  const int rows = f.rows(), cols = f.cols();
  const long blk = static_cast<long>(rows) * cols;
  std::vector<Complex> samples(static_cast<size_t>(reg.points()) * static_cast<size_t>(blk));
  // flat order ascends along mu, so n - e_mu is already filled
  std::vector<long> strides(reg.lat.size() + reg.cont.size(), 1);
  {
    std::vector<long> sizes;
    for (const auto& r : reg.lat) sizes.push_back(r.size());
    for (const auto& r : reg.cont) sizes.push_back(r.size());
    for (size_t d = sizes.size(); d-- > 1;) strides[d - 1] = strides[d] * sizes[d];
  }
  std::vector<long> prev_lat;
  for (RegionIter it(reg); !it.done(); it.next()) {
    const long base = it.flat() * blk;
    if (it.lat()[m] == reg.lat[m].lo) {
      for (long e = 0; e < blk; ++e) samples[static_cast<size_t>(base + e)] = 0.0;
      continue;
    }
    prev_lat = it.lat();
    --prev_lat[m];
    const long prev_base = (it.flat() - strides[m]) * blk;
    const CMatrix fv = fs.at(prev_lat, it.cont());
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        samples[static_cast<size_t>(base + r * cols + c)] =
            samples[static_cast<size_t>(prev_base + r * cols + c)] + fv(r, c);
  }
  return Field::grid(f.domain(), rows, cols, reg, std::move(samples));
}

}  // namespace detail_forms

/// Reconstructs P with d_discrete(P) = omega for a discretely closed form
/// of degree >= 1, by staged anti-differences: direction mu clears every
/// term whose leading dn index is mu, and closedness makes the remainder
/// constant along cleared directions. The primitive is valid on the input
/// box minus the top layer of each direction it anti-differences.
/// Inputs whose discrete differential exceeds tol (relative to the input
/// scale) are rejected, as are forms with dn-free terms, which are never
/// in the image of d_discrete.
inline Form discrete_primitive(const Form& omega, double tol = 1e-10) {
  const Domain& dom = omega.domain();
  if (omega.degree() < 1) throw ConfigError("only forms of degree >= 1 have discrete primitives");
  if (dom.p() == 0) throw ConfigError("domain has no discrete directions");
  for (const auto& [w, f] : omega.terms())
    if (w.dn.empty())
      throw ConfigError("term " + w.to_string() +
                        " carries no dn covector, so the form is not in the image "
                        "of the discrete differential");
  const double scale = 1.0 + omega.max_norm();
  {
    Form ddo = omega.d_discrete();
    const double defect = ddo.max_norm();
    if (defect > tol * scale)
      throw NumericalError("form is not discretely closed: defect " +
                           std::to_string(defect) + " exceeds tolerance " +
                           std::to_string(tol * scale));
  }
  Form P(dom, omega.degree() - 1, omega.rows(), omega.cols());
  Form R = omega;
  for (int mu = 0; mu < dom.p(); ++mu) {
    Form stage(dom, omega.degree() - 1, omega.rows(), omega.cols());
    for (const auto& [w, f] : R.terms()) {
      if (w.dn.empty() || w.dn.front() != mu) continue;
      BasisWedge rest = w;
      rest.dn.erase(rest.dn.begin());
      stage.add_term(rest, detail_forms::anti_difference(f, mu));
    }
    if (stage.empty()) continue;
    P = P + stage;
    R = R - stage.d_discrete();
    // closedness makes every surviving component with dn index <= mu a
    // pure cancellation; measure it, then drop
    Form next(dom, omega.degree(), omega.rows(), omega.cols());
    double leftover = 0.0;
    for (const auto& [w, f] : R.terms()) {
      if (!w.dn.empty() && w.dn.front() > mu)
        next.add_term(w, f);
      else
        leftover = std::max(leftover, f.max_norm());
    }
    if (leftover > tol * scale)
      throw NumericalError("anti-difference stage " + std::to_string(mu) +
                           " left a residual of " + std::to_string(leftover) +
                           "; the form is not discretely closed");
    R = next;
  }
  if (!R.empty()) {
    const double leftover = R.max_norm();
    if (leftover > tol * scale)
      throw NumericalError("discrete primitive reconstruction left a residual of " +
                           std::to_string(leftover));
  }
  return P;
}

}  // namespace curvkit

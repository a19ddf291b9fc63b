#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "curvkit/domain.hpp"
#include "curvkit/threading.hpp"

namespace curvkit {

class Field;

namespace detail {

struct FieldImpl;
using ImplPtr = std::shared_ptr<const FieldImpl>;

struct FieldImpl {
  Domain dom;
  int rows = 1;
  int cols = 1;
  Region reg;
  bool zero = false;
  bool constant = false;

  // grid backend: samples over the region box, points in RegionIter order,
  // each point holding a row-major rows x cols block
  bool is_grid = false;
  std::vector<Complex> samples;
  std::vector<long> sizes;    // per direction, lat then cont
  std::vector<long> strides;  // in blocks

  // analytic backend: pointwise evaluator plus optional differentiation
  // rule per continuous direction
  std::function<CMatrix(const Point&)> eval;
  std::function<ImplPtr(int)> derive;
  mutable std::vector<ImplPtr> dmemo;

  long block() const { return static_cast<long>(rows) * cols; }

  void build_strides() {
    sizes.clear();
    for (const auto& r : reg.lat) sizes.push_back(r.size());
    for (const auto& r : reg.cont) sizes.push_back(r.size());
    strides.assign(sizes.size(), 1);
    for (size_t d = sizes.size(); d-- > 1;)
      strides[d - 1] = strides[d] * sizes[d];
  }

  /// Flat point offset of absolute coordinates within the region box.
  long flat_of(const std::vector<long>& lat, const std::vector<long>& cont) const {
    long off = 0;
    const size_t p = reg.lat.size();
    for (size_t k = 0; k < p; ++k) off += (lat[k] - reg.lat[k].lo) * strides[k];
    for (size_t k = 0; k < reg.cont.size(); ++k)
      off += (cont[k] - reg.cont[k].lo) * strides[p + k];
    return off;
  }
};

}  // namespace detail

/// A matrix-valued function on a domain, valid on a region. Immutable;
/// copies share the underlying data. Two backends: grid (explicit samples)
/// and analytic (evaluator plus exact differentiation rules). Operations
/// combining a grid operand produce grids, eagerly evaluated over the
/// intersected region; all-analytic operations stay lazy.
class Field {
 public:
  using EvalFn = std::function<CMatrix(const Point&)>;
  using DeriveFn = std::function<Field(int)>;

  Field() = default;

  // ---- factories ----

  static Field constant(const Domain& dom, const CMatrix& value) {
    if (value.rows() < 1 || value.cols() < 1)
      throw ConfigError("constant field needs a non-empty value");
    if (!all_finite(value)) throw NumericalError("constant field value is not finite");
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = dom;
    impl->rows = static_cast<int>(value.rows());
    impl->cols = static_cast<int>(value.cols());
    impl->reg = Region::full(dom);
    impl->zero = max_abs(value) == 0.0;
    impl->constant = true;
    CMatrix v = value;
    impl->eval = [v](const Point&) { return v; };
    install_derive(impl, [dom, r = impl->rows, c = impl->cols](int) {
      return Field::zero(dom, r, c);
    });
    return Field(std::move(impl));
  }

  static Field constant_scalar(const Domain& dom, Complex value) {
    CMatrix m(1, 1);
    m(0, 0) = value;
    return constant(dom, m);
  }

  static Field zero(const Domain& dom, int rows, int cols) {
    return constant(dom, CMatrix::Zero(rows, cols));
  }

  /// Scalar field n -> n_mu.
  static Field lattice_coordinate(const Domain& dom, int mu) {
    dom.extent(mu);  // range check
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = dom;
    impl->reg = Region::full(dom);
    impl->eval = [mu](const Point& pt) {
      CMatrix m(1, 1);
      m(0, 0) = static_cast<double>(pt.n[static_cast<size_t>(mu)]);
      return m;
    };
    install_derive(impl, [dom](int) { return Field::zero(dom, 1, 1); });
    return Field(std::move(impl));
  }

  /// Scalar field x -> x_i.
  static Field coordinate(const Domain& dom, int i) {
    dom.range(i);  // range check
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = dom;
    impl->reg = Region::full(dom);
    impl->eval = [i](const Point& pt) {
      CMatrix m(1, 1);
      m(0, 0) = pt.x[static_cast<size_t>(i)];
      return m;
    };
    install_derive(impl, [dom, i](int j) {
      return j == i ? Field::constant_scalar(dom, 1.0) : Field::zero(dom, 1, 1);
    });
    return Field(std::move(impl));
  }

  /// Analytic field with exact differentiation rules. `derive` may be
  /// empty, in which case partial() on the result raises ConfigError.
  static Field analytic(const Domain& dom, int rows, int cols, EvalFn eval,
                        DeriveFn derive = nullptr) {
    if (rows < 1 || cols < 1) throw ConfigError("field shape must be positive");
    if (!eval) throw ConfigError("analytic field needs an evaluator");
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = dom;
    impl->rows = rows;
    impl->cols = cols;
    impl->reg = Region::full(dom);
    impl->eval = std::move(eval);
    if (derive) install_derive(impl, std::move(derive));
    return Field(std::move(impl));
  }

  /// Analytic field whose partial derivatives are given explicitly.
  static Field analytic_with_partials(const Domain& dom, int rows, int cols,
                                      EvalFn eval, std::vector<Field> partials) {
    if (partials.size() != static_cast<size_t>(dom.q()))
      throw ConfigError("need one partial per continuous direction");
    return analytic(dom, rows, cols, std::move(eval),
                    [partials](int i) { return partials[static_cast<size_t>(i)]; });
  }

  /// Grid field from explicit samples in RegionIter order.
  static Field grid(const Domain& dom, int rows, int cols, const Region& reg,
                    std::vector<Complex> samples) {
    if (rows < 1 || cols < 1) throw ConfigError("field shape must be positive");
    check_region(dom, reg);
    const long expect = reg.points() * rows * cols;
    if (static_cast<long>(samples.size()) != expect)
      throw ConfigError("sample count " + std::to_string(samples.size()) +
                        " does not match region size " + std::to_string(expect));
    for (const Complex& z : samples)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw NumericalError("grid field contains non-finite samples");
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = dom;
    impl->rows = rows;
    impl->cols = cols;
    impl->reg = reg;
    impl->is_grid = true;
    impl->samples = std::move(samples);
    impl->build_strides();
    return Field(std::move(impl));
  }

  /// Grid field sampled from a pointwise function over `reg`.
  static Field grid_from(const Domain& dom, int rows, int cols, const Region& reg,
                         const EvalFn& fn) {
    check_region(dom, reg);
    if (reg.empty()) throw ConfigError("cannot sample an empty region");
    std::vector<Complex> samples(static_cast<size_t>(reg.points()) *
                                 static_cast<size_t>(rows) * static_cast<size_t>(cols));
    const long blk = static_cast<long>(rows) * cols;
    for (RegionIter it(reg); !it.done(); it.next()) {
      const CMatrix v = fn(dom.point_at(it.lat(), it.cont()));
      if (v.rows() != rows || v.cols() != cols)
        throw ConfigError("sampled value has wrong shape");
      long base = it.flat() * blk;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) samples[static_cast<size_t>(base + r * cols + c)] = v(r, c);
    }
    return grid(dom, rows, cols, reg, std::move(samples));
  }

  /// Assemble a matrix field from scalar entries (row-major nested list).
  static Field matrix_of(const std::vector<std::vector<Field>>& entries) {
    if (entries.empty() || entries[0].empty())
      throw ConfigError("matrix_of needs at least one entry");
    const int rows = static_cast<int>(entries.size());
    const int cols = static_cast<int>(entries[0].size());
    const Domain dom = entries[0][0].domain();
    Region reg = entries[0][0].region();
    bool any_grid = false, all_zero = true;
    for (const auto& row : entries) {
      if (static_cast<int>(row.size()) != cols)
        throw ConfigError("matrix_of rows have unequal lengths");
      for (const Field& e : row) {
        if (e.rows() != 1 || e.cols() != 1)
          throw ConfigError("matrix_of entries must be scalar fields");
        if (!(e.domain() == dom)) throw ConfigError("fields live on different domains");
        reg = reg.intersect(e.region());
        any_grid |= e.is_grid();
        all_zero &= e.is_zero();
      }
    }
    if (reg.empty()) throw ConfigError("matrix_of entries have no common region");
    auto eval = [entries, rows, cols](const Point& pt) {
      CMatrix m(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          m(r, c) = entries[static_cast<size_t>(r)][static_cast<size_t>(c)].eval_any(pt)(0, 0);
      return m;
    };
    if (any_grid) {
      // grid entries cannot be evaluated at arbitrary points; assemble samples
      std::vector<Complex> samples(static_cast<size_t>(reg.points()) * rows * cols);
      const long blk = static_cast<long>(rows) * cols;
      for (RegionIter it(reg); !it.done(); it.next()) {
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c)
            samples[static_cast<size_t>(it.flat() * blk + r * cols + c)] =
                entries[static_cast<size_t>(r)][static_cast<size_t>(c)].at(it.lat(), it.cont())(0, 0);
      }
      Field out = grid(dom, rows, cols, reg, std::move(samples));
      out.impl_mut()->zero = all_zero;
      return out;
    }
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = dom;
    impl->rows = rows;
    impl->cols = cols;
    impl->reg = reg;
    impl->zero = all_zero;
    impl->eval = std::move(eval);
    install_derive(impl, [entries](int i) {
      std::vector<std::vector<Field>> d(entries.size());
      for (size_t r = 0; r < entries.size(); ++r)
        for (const Field& e : entries[r]) d[r].push_back(e.partial(i));
      return Field::matrix_of(d);
    });
    return Field(std::move(impl));
  }

  /// Stack 1 x c row fields into an r x c matrix field.
  static Field stack_rows(const std::vector<Field>& row_fields) {
    if (row_fields.empty()) throw ConfigError("stack_rows needs at least one row");
    std::vector<std::vector<Field>> entries;
    entries.reserve(row_fields.size());
    for (const Field& rf : row_fields) {
      if (rf.rows() != 1) throw ConfigError("stack_rows expects 1 x c rows");
      std::vector<Field> e;
      e.reserve(static_cast<size_t>(rf.cols()));
      for (int c = 0; c < rf.cols(); ++c) e.push_back(rf.entry(0, c));
      entries.push_back(std::move(e));
    }
    return matrix_of(entries);
  }

  // ---- observers ----

  bool valid() const { return impl_ != nullptr; }
  const Domain& domain() const { return impl()->dom; }
  int rows() const { return impl()->rows; }
  int cols() const { return impl()->cols; }
  const Region& region() const { return impl()->reg; }
  bool is_grid() const { return impl()->is_grid; }
  bool is_zero() const { return impl()->zero; }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }

  const std::vector<Complex>& grid_samples() const {
    if (!is_grid()) throw ConfigError("field has no grid samples");
    return impl()->samples;
  }

  /// True when partial() can produce a derivative: grids differentiate by
  /// stencils, analytic fields need an attached rule.
  bool differentiable() const { return impl()->is_grid || impl()->derive != nullptr; }

  /// Formal pointwise evaluation for analytic fields; grids are indexed
  /// with at().
  CMatrix value_at(const Point& pt) const {
    const auto& im = *impl();
    if (im.is_grid) throw ConfigError("grid fields are indexed with at(), not value_at()");
    return eval_checked(im, pt);
  }

  /// Value at absolute lattice coordinates + continuous sample indices.
  CMatrix at(const std::vector<long>& lat, const std::vector<long>& cont) const {
    const auto& im = *impl();
    if (lat.size() != im.reg.lat.size() || cont.size() != im.reg.cont.size())
      throw ConfigError("coordinate arity does not match domain");
    for (size_t k = 0; k < lat.size(); ++k)
      if (lat[k] < im.reg.lat[k].lo || lat[k] > im.reg.lat[k].hi)
        throw ConfigError("lattice coordinate outside valid region");
    for (size_t k = 0; k < cont.size(); ++k)
      if (cont[k] < im.reg.cont[k].lo || cont[k] > im.reg.cont[k].hi)
        throw ConfigError("continuous index outside valid region");
    if (im.is_grid) {
      CMatrix m(im.rows, im.cols);
      const long base = im.flat_of(lat, cont) * im.block();
      for (int r = 0; r < im.rows; ++r)
        for (int c = 0; c < im.cols; ++c)
          m(r, c) = im.samples[static_cast<size_t>(base + r * im.cols + c)];
      return m;
    }
    return eval_checked(im, im.dom.point_at(lat, cont));
  }

  // ---- calculus ----

  /// Forward shift E_mu: (E_mu f)(n, x) = f(n + e_mu, x).
  Field shift(int mu) const { return translate(mu, 1); }

  /// Lattice reindex by `steps` along direction mu (either sign). The
  /// valid region moves opposite to the reference and is clipped to the
  /// domain box.
  Field translate(int mu, long steps) const {
    const auto& im = *impl();
    im.dom.extent(mu);  // range check
    if (steps == 0) return *this;
    const size_t m = static_cast<size_t>(mu);
    Region reg = im.reg;
    reg.lat[m].lo -= steps;
    reg.lat[m].hi -= steps;
    reg.lat[m].lo = std::max(reg.lat[m].lo, im.dom.extent(mu).lo);
    reg.lat[m].hi = std::min(reg.lat[m].hi, im.dom.extent(mu).hi);
    if (reg.empty())
      throw ConfigError("translate by " + std::to_string(steps) + " along direction " +
                        std::to_string(mu) + " leaves an empty region");
    if (im.is_grid) {
      std::vector<long> offsets(im.reg.lat.size(), 0);
      offsets[m] = steps;
      return gather(*this, reg, offsets);
    }
    Field self = *this;
    auto impl = clone_meta(im, reg);
    impl->eval = [self, mu, steps](const Point& pt) {
      Point shifted = pt;
      shifted.n[static_cast<size_t>(mu)] += steps;
      return self.impl()->eval(shifted);
    };
    if (im.derive)
      install_derive(impl, [self, mu, steps](int i) { return self.partial(i).translate(mu, steps); });
    return Field(std::move(impl));
  }

  /// Forward difference Delta_mu = E_mu - id; shift-invariant constants
  /// short-circuit to a structural zero on the shifted region.
  Field delta(int mu) const {
    Field s = shift(mu);
    if (impl()->constant) return zero(domain(), rows(), cols()).restricted(s.region());
    return s - *this;
  }

  /// Partial derivative along continuous direction i. Analytic fields use
  /// their exact rule (order is ignored); grid fields use centered stencils
  /// of the requested order (2 or 4) with one-sided closures at region
  /// edges, keeping the region unchanged.
  Field partial(int i, int order = 2) const {
    const auto& im = *impl();
    im.dom.range(i);  // range check
    if (order != 2 && order != 4)
      throw ConfigError("stencil order must be 2 or 4, got " + std::to_string(order));
    if (!im.is_grid) {
      if (!im.derive)
        throw ConfigError("field has no differentiation rule along direction " +
                          std::to_string(i));
      const size_t idx = static_cast<size_t>(i);
      if (!im.dmemo[idx]) {
        Field d = Field(im.derive(i)).restricted_clipped(im.reg);
        im.dmemo[idx] = d.impl_;
      }
      return Field(im.dmemo[idx]);
    }
    return grid_partial(i, order);
  }

  // ---- algebra ----

  Field operator+(const Field& rhs) const { return combine_linear(rhs, 1.0); }
  Field operator-(const Field& rhs) const { return combine_linear(rhs, -1.0); }
  Field operator-() const { return scaled(-1.0); }

  Field scaled(Complex factor) const {
    const auto& im = *impl();
    if (im.is_grid) {
      auto impl = clone_meta(im, im.reg);
      impl->is_grid = true;
      impl->samples = im.samples;
      for (Complex& z : impl->samples) z *= factor;
      impl->build_strides();
      impl->zero = im.zero || factor == Complex(0.0);
      return Field(std::move(impl));
    }
    Field self = *this;
    auto impl = clone_meta(im, im.reg);
    impl->zero = im.zero || factor == Complex(0.0);
    impl->eval = [self, factor](const Point& pt) -> CMatrix {
      return factor * self.impl()->eval(pt);
    };
    if (im.derive)
      install_derive(impl, [self, factor](int i) { return self.partial(i).scaled(factor); });
    return Field(std::move(impl));
  }

  /// Matrix product, or entrywise scale when either operand is scalar.
  Field operator*(const Field& rhs) const {
    const Field& a = *this;
    const Field& b = rhs;
    if (!(a.domain() == b.domain())) throw ConfigError("fields live on different domains");
    int rr, rc;
    enum class Mode { ScaleLeft, ScaleRight, MatMul } mode;
    if (a.is_scalar() && !b.is_scalar()) {
      mode = Mode::ScaleLeft;
      rr = b.rows(); rc = b.cols();
    } else if (b.is_scalar() && !a.is_scalar()) {
      mode = Mode::ScaleRight;
      rr = a.rows(); rc = a.cols();
    } else if (a.is_scalar() && b.is_scalar()) {
      mode = Mode::MatMul;
      rr = 1; rc = 1;
    } else {
      if (a.cols() != b.rows())
        throw ConfigError("shape mismatch in product: " + shape_str(a) + " * " + shape_str(b));
      mode = Mode::MatMul;
      rr = a.rows(); rc = b.cols();
    }
    auto compute = [mode](const CMatrix& x, const CMatrix& y) -> CMatrix {
      switch (mode) {
        case Mode::ScaleLeft: return x(0, 0) * y;
        case Mode::ScaleRight: return y(0, 0) * x;
        default: return x * y;
      }
    };
    Region reg = a.region().intersect(b.region());
    if (reg.empty()) throw ConfigError("operands have no common region");
    const bool zero = a.is_zero() || b.is_zero();
    if (a.is_grid() || b.is_grid()) {
      Field out = eager_binary(a, b, reg, rr, rc, compute);
      out.impl_mut()->zero = zero;
      return out;
    }
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = a.domain();
    impl->rows = rr;
    impl->cols = rc;
    impl->reg = reg;
    impl->zero = zero;
    impl->eval = [a, b, compute](const Point& pt) {
      return compute(a.impl()->eval(pt), b.impl()->eval(pt));
    };
    if (a.impl()->derive && b.impl()->derive)
      install_derive(impl, [a, b](int i) { return a.partial(i) * b + a * b.partial(i); });
    return Field(std::move(impl));
  }

  Field conjugate() const {
    return unary_structural([](const CMatrix& v) -> CMatrix { return v.conjugate(); },
                            [](const Field& f, int i) { return f.partial(i).conjugate(); },
                            is_zero());
  }

  /// Pointwise matrix inverse (square shapes). Singular points surface as
  /// NumericalError.
  Field inverse() const {
    if (rows() != cols()) throw ConfigError("inverse needs a square-valued field");
    auto inv = [](const CMatrix& v) -> CMatrix {
      CMatrix r = v.inverse();
      if (!all_finite(r)) throw NumericalError("field is singular at a sample point");
      return r;
    };
    return unary_structural(inv,
                            [](const Field& f, int i) {
                              Field fi = f.inverse();
                              return (fi * f.partial(i) * fi).scaled(-1.0);
                            },
                            false);
  }

  /// Entrywise map without a differentiation rule; partial() on the result
  /// raises ConfigError. Intended for pointwise reparametrizations such as
  /// exp/log of lattice data.
  Field map(const std::function<Complex(Complex)>& fn) const {
    auto apply = [fn](const CMatrix& v) -> CMatrix {
      CMatrix r(v.rows(), v.cols());
      for (Eigen::Index a = 0; a < v.rows(); ++a)
        for (Eigen::Index b = 0; b < v.cols(); ++b) r(a, b) = fn(v(a, b));
      return r;
    };
    const auto& im = *impl();
    if (im.is_grid) return unary_structural(apply, nullptr, false);
    Field self = *this;
    auto impl2 = clone_meta(im, im.reg);
    impl2->eval = [self, apply](const Point& pt) { return apply(self.impl()->eval(pt)); };
    return Field(std::move(impl2));
  }

  Field entry(int r, int c) const {
    if (r < 0 || r >= rows() || c < 0 || c >= cols())
      throw ConfigError("entry index outside field shape");
    return slice(r, c, 1, 1);
  }

  Field row(int r) const {
    if (r < 0 || r >= rows()) throw ConfigError("row index outside field shape");
    return slice(r, 0, 1, cols());
  }

  Field restricted(const Region& reg) const {
    check_region(domain(), reg);
    Region inter = region().intersect(reg);
    if (inter.empty()) throw ConfigError("restriction leaves an empty region");
    return restricted_clipped(inter);
  }

  /// Grid copy of this field (identity on grids).
  Field sampled() const {
    if (is_grid()) return *this;
    Field self = *this;
    return grid_from(domain(), rows(), cols(), region(),
                     [self](const Point& pt) { return eval_checked(*self.impl(), pt); });
  }

  // ---- reductions ----

  double max_norm() const {
    double mx = 0.0, sum = 0.0;
    reduce(mx, sum);
    return mx;
  }

  /// Unweighted l2 norm over region samples: sqrt(sum |entry|^2).
  /// Chunked with a fixed layout so the result is bit-stable across thread
  /// counts.
  double l2_norm() const {
    double mx = 0.0, sum = 0.0;
    reduce(mx, sum);
    return std::sqrt(sum);
  }

  double max_imag_abs() const {
    double v = 0.0;
    scan([&](const CMatrix& m) {
      for (Eigen::Index a = 0; a < m.rows(); ++a)
        for (Eigen::Index b = 0; b < m.cols(); ++b)
          v = std::max(v, std::abs(m(a, b).imag()));
    });
    return v;
  }

  double min_real() const {
    double v = std::numeric_limits<double>::infinity();
    scan([&](const CMatrix& m) {
      for (Eigen::Index a = 0; a < m.rows(); ++a)
        for (Eigen::Index b = 0; b < m.cols(); ++b) v = std::min(v, m(a, b).real());
    });
    return v;
  }

 private:
  explicit Field(detail::ImplPtr impl) : impl_(std::move(impl)) {}

  const detail::FieldImpl* impl() const {
    if (!impl_) throw ConfigError("use of an empty field");
    return impl_.get();
  }
  detail::FieldImpl* impl_mut() {
    // only used by factories before the impl is shared
    return const_cast<detail::FieldImpl*>(impl_.get());
  }

  static std::string shape_str(const Field& f) {
    return std::to_string(f.rows()) + "x" + std::to_string(f.cols());
  }

  static void check_region(const Domain& dom, const Region& reg) {
    if (static_cast<int>(reg.lat.size()) != dom.p() ||
        static_cast<int>(reg.cont.size()) != dom.q())
      throw ConfigError("region arity does not match domain");
    if (!Region::full(dom).contains(reg))
      throw ConfigError("region exceeds the domain box");
  }

  static CMatrix eval_checked(const detail::FieldImpl& im, const Point& pt) {
    CMatrix v = im.eval(pt);
    if (v.rows() != im.rows || v.cols() != im.cols)
      throw ConfigError("evaluator returned a wrong-shaped value");
    return v;
  }

  static std::shared_ptr<detail::FieldImpl> clone_meta(const detail::FieldImpl& im,
                                                       const Region& reg) {
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = im.dom;
    impl->rows = im.rows;
    impl->cols = im.cols;
    impl->reg = reg;
    impl->zero = im.zero;
    impl->constant = im.constant;
    return impl;
  }

  static void install_derive(const std::shared_ptr<detail::FieldImpl>& impl,
                             DeriveFn derive) {
    impl->dmemo.assign(static_cast<size_t>(impl->dom.q()), nullptr);
    impl->derive = [derive = std::move(derive)](int i) { return derive(i).impl_; };
  }

  Field restricted_clipped(const Region& reg) const {
    const auto& im = *impl();
    Region inter = im.reg.intersect(reg);
    if (inter.empty()) throw ConfigError("restriction leaves an empty region");
    if (inter == im.reg) return *this;
    if (im.is_grid) return gather(*this, inter, std::vector<long>(im.reg.lat.size(), 0));
    Field self = *this;
    auto impl2 = clone_meta(im, inter);
    impl2->eval = im.eval;
    if (im.derive)
      install_derive(impl2, [self](int i) { return self.partial(i); });
    return Field(std::move(impl2));
  }

  /// Copy grid samples for `reg`, reading source at lattice + offsets.
  static Field gather(const Field& src, const Region& reg,
                      const std::vector<long>& lat_offsets) {
    const auto& im = *src.impl();
    std::vector<Complex> samples(static_cast<size_t>(reg.points()) *
                                 static_cast<size_t>(im.block()));
    std::vector<long> lat;
    for (RegionIter it(reg); !it.done(); it.next()) {
      lat = it.lat();
      for (size_t k = 0; k < lat.size(); ++k) lat[k] += lat_offsets[k];
      const long sbase = im.flat_of(lat, it.cont()) * im.block();
      const long dbase = it.flat() * im.block();
      for (long e = 0; e < im.block(); ++e)
        samples[static_cast<size_t>(dbase + e)] = im.samples[static_cast<size_t>(sbase + e)];
    }
    Field out = grid(im.dom, im.rows, im.cols, reg, std::move(samples));
    out.impl_mut()->zero = im.zero;
    return out;
  }

  Field combine_linear(const Field& rhs, double sign) const {
    const Field& a = *this;
    const Field& b = rhs;
    if (!(a.domain() == b.domain())) throw ConfigError("fields live on different domains");
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw ConfigError("shape mismatch: " + shape_str(a) + " vs " + shape_str(b));
    Region reg = a.region().intersect(b.region());
    if (reg.empty()) throw ConfigError("operands have no common region");
    const bool zero = a.is_zero() && b.is_zero();
    auto compute = [sign](const CMatrix& x, const CMatrix& y) -> CMatrix {
      return x + sign * y;
    };
    if (a.is_grid() || b.is_grid()) {
      Field out = eager_binary(a, b, reg, a.rows(), a.cols(), compute);
      out.impl_mut()->zero = zero;
      return out;
    }
    auto impl = std::make_shared<detail::FieldImpl>();
    impl->dom = a.domain();
    impl->rows = a.rows();
    impl->cols = a.cols();
    impl->reg = reg;
    impl->zero = zero;
    impl->eval = [a, b, compute](const Point& pt) {
      return compute(a.impl()->eval(pt), b.impl()->eval(pt));
    };
    if (a.impl()->derive && b.impl()->derive)
      install_derive(impl, [a, b, sign](int i) {
        return a.partial(i).combine_linear(b.partial(i), sign);
      });
    return Field(std::move(impl));
  }

  static Field eager_binary(const Field& a, const Field& b, const Region& reg, int rr,
                            int rc, const std::function<CMatrix(const CMatrix&, const CMatrix&)>& compute) {
    std::vector<Complex> samples(static_cast<size_t>(reg.points()) *
                                 static_cast<size_t>(rr) * static_cast<size_t>(rc));
    const long blk = static_cast<long>(rr) * rc;
    for (RegionIter it(reg); !it.done(); it.next()) {
      const CMatrix v = compute(a.at(it.lat(), it.cont()), b.at(it.lat(), it.cont()));
      const long base = it.flat() * blk;
      for (int r = 0; r < rr; ++r)
        for (int c = 0; c < rc; ++c)
          samples[static_cast<size_t>(base + r * rc + c)] = v(r, c);
    }
    return grid(a.domain(), rr, rc, reg, std::move(samples));
  }

  Field unary_structural(const std::function<CMatrix(const CMatrix&)>& apply,
                         const std::function<Field(const Field&, int)>& derive_rule,
                         bool zero) const {
    const auto& im = *impl();
    if (im.is_grid) {
      std::vector<Complex> samples(im.samples.size());
      const long blk = im.block();
      const long npts = im.reg.points();
      for (long pnt = 0; pnt < npts; ++pnt) {
        CMatrix v(im.rows, im.cols);
        for (int r = 0; r < im.rows; ++r)
          for (int c = 0; c < im.cols; ++c)
            v(r, c) = im.samples[static_cast<size_t>(pnt * blk + r * im.cols + c)];
        CMatrix w = apply(v);
        for (int r = 0; r < im.rows; ++r)
          for (int c = 0; c < im.cols; ++c)
            samples[static_cast<size_t>(pnt * blk + r * im.cols + c)] = w(r, c);
      }
      Field out = grid(im.dom, im.rows, im.cols, im.reg, std::move(samples));
      out.impl_mut()->zero = zero;
      return out;
    }
    Field self = *this;
    auto impl2 = clone_meta(im, im.reg);
    impl2->zero = zero;
    impl2->eval = [self, apply](const Point& pt) { return apply(self.impl()->eval(pt)); };
    if (im.derive && derive_rule)
      install_derive(impl2, [self, derive_rule](int i) { return derive_rule(self, i); });
    return Field(std::move(impl2));
  }

  Field slice(int r0, int c0, int nr, int nc) const {
    const auto& im = *impl();
    if (im.is_grid) {
      std::vector<Complex> samples(static_cast<size_t>(im.reg.points()) *
                                   static_cast<size_t>(nr) * static_cast<size_t>(nc));
      const long blk = im.block();
      const long npts = im.reg.points();
      for (long pnt = 0; pnt < npts; ++pnt)
        for (int r = 0; r < nr; ++r)
          for (int c = 0; c < nc; ++c)
            samples[static_cast<size_t>((pnt * nr + r) * nc + c)] =
                im.samples[static_cast<size_t>(pnt * blk + (r0 + r) * im.cols + (c0 + c))];
      Field out = grid(im.dom, nr, nc, im.reg, std::move(samples));
      out.impl_mut()->zero = im.zero;
      return out;
    }
    Field self = *this;
    auto impl2 = clone_meta(im, im.reg);
    impl2->rows = nr;
    impl2->cols = nc;
    impl2->eval = [self, r0, c0, nr, nc](const Point& pt) -> CMatrix {
      return self.impl()->eval(pt).block(r0, c0, nr, nc);
    };
    if (im.derive)
      install_derive(impl2, [self, r0, c0, nr, nc](int i) {
        return self.partial(i).slice(r0, c0, nr, nc);
      });
    return Field(std::move(impl2));
  }

  Field grid_partial(int i, int order) const {
    const auto& im = *impl();
    const size_t dim = static_cast<size_t>(im.reg.lat.size()) + static_cast<size_t>(i);
    const long n = im.sizes[dim];
    const long need = order == 2 ? 3 : 5;
    if (n < need)
      throw ConfigError("need at least " + std::to_string(need) +
                        " samples along direction " + std::to_string(i) +
                        " for an order-" + std::to_string(order) + " stencil, have " +
                        std::to_string(n));
    const double h = im.dom.range(i).spacing;
    const long stride = im.strides[dim] * im.block();
    const long blk = im.block();
    const long npts = im.reg.points();
    std::vector<Complex> out(im.samples.size());
    const Complex* s = im.samples.data();
    // local index along direction i recovered from the flat point index
    const long inner = im.strides[dim];
    for (long pnt = 0; pnt < npts; ++pnt) {
      const long k = (pnt / inner) % n;
      const long base = pnt * blk;
      for (long e = 0; e < blk; ++e) {
        const long o = base + e;
        Complex d;
        if (order == 2) {
          if (k == 0)
            d = (-3.0 * s[o] + 4.0 * s[o + stride] - s[o + 2 * stride]) / (2.0 * h);
          else if (k == n - 1)
            d = (3.0 * s[o] - 4.0 * s[o - stride] + s[o - 2 * stride]) / (2.0 * h);
          else
            d = (s[o + stride] - s[o - stride]) / (2.0 * h);
        } else {
          if (k == 0)
            d = (-25.0 * s[o] + 48.0 * s[o + stride] - 36.0 * s[o + 2 * stride] +
                 16.0 * s[o + 3 * stride] - 3.0 * s[o + 4 * stride]) /
                (12.0 * h);
          else if (k == 1)
            d = (-3.0 * s[o - stride] - 10.0 * s[o] + 18.0 * s[o + stride] -
                 6.0 * s[o + 2 * stride] + s[o + 3 * stride]) /
                (12.0 * h);
          else if (k == n - 2)
            d = (3.0 * s[o + stride] + 10.0 * s[o] - 18.0 * s[o - stride] +
                 6.0 * s[o - 2 * stride] - s[o - 3 * stride]) /
                (12.0 * h);
          else if (k == n - 1)
            d = (25.0 * s[o] - 48.0 * s[o - stride] + 36.0 * s[o - 2 * stride] -
                 16.0 * s[o - 3 * stride] + 3.0 * s[o - 4 * stride]) /
                (12.0 * h);
          else
            d = (s[o - 2 * stride] - 8.0 * s[o - stride] + 8.0 * s[o + stride] -
                 s[o + 2 * stride]) /
                (12.0 * h);
        }
        out[static_cast<size_t>(o)] = d;
      }
    }
    Field res = grid(im.dom, im.rows, im.cols, im.reg, std::move(out));
    res.impl_mut()->zero = im.zero;
    return res;
  }

  void scan(const std::function<void(const CMatrix&)>& visit) const {
    const auto& im = *impl();
    if (im.reg.empty()) throw ConfigError("reduction over an empty region");
    for (RegionIter it(im.reg); !it.done(); it.next()) visit(at(it.lat(), it.cont()));
  }

  void reduce(double& mx_out, double& sumsq_out) const {
    const auto& im = *impl();
    if (im.reg.empty()) throw ConfigError("reduction over an empty region");
    const long npts = im.reg.points();
    std::vector<double> cmax(64, 0.0), csum(64, 0.0);
    RegionIter base(im.reg);
    parallel_chunks(npts, [&](long b, long e, int chunk) {
      double mx = 0.0, sum = 0.0;
      std::vector<long> lat, cont;
      if (im.is_grid) {
        const long blk = im.block();
        for (long o = b * blk; o < e * blk; ++o) {
          const Complex z = im.samples[static_cast<size_t>(o)];
          const double a2 = z.real() * z.real() + z.imag() * z.imag();
          sum += a2;
          mx = std::max(mx, a2);
        }
      } else {
        for (long pnt = b; pnt < e; ++pnt) {
          base.at(pnt, lat, cont);
          const CMatrix v = eval_checked(im, im.dom.point_at(lat, cont));
          for (Eigen::Index r = 0; r < v.rows(); ++r)
            for (Eigen::Index c = 0; c < v.cols(); ++c) {
              const Complex z = v(r, c);
              const double a2 = z.real() * z.real() + z.imag() * z.imag();
              sum += a2;
              mx = std::max(mx, a2);
            }
        }
      }
      cmax[static_cast<size_t>(chunk)] = mx;
      csum[static_cast<size_t>(chunk)] = sum;
    });
    double mx = 0.0, sum = 0.0;
    for (int c = 0; c < 64; ++c) {
      mx = std::max(mx, cmax[static_cast<size_t>(c)]);
      sum += csum[static_cast<size_t>(c)];
    }
    if (!std::isfinite(sum) || !std::isfinite(mx))
      throw NumericalError("field contains non-finite values");
    mx_out = std::sqrt(mx);
    sumsq_out = sum;
  }

  CMatrix eval_any(const Point& pt) const { return impl()->eval(pt); }

  detail::ImplPtr impl_;

  friend class Form;
};

/// Max-norm of a - b over their common region.
inline double max_abs_diff(const Field& a, const Field& b) { return (a - b).max_norm(); }

}  // namespace curvkit

#include "thmm/charfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "thmm/rng.hpp"

namespace thmm {

namespace {

constexpr double kTaylorThreshold = 1e-4;

inline Complex unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Plain complex product; identical arithmetic on every call site so cached
// and uncached paths round the same way.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// sum_{j=0}^{n-2} term(j), divided by n.
template <class Term>
Complex pair_average(std::size_t n, Term&& term) {
  Complex acc{0.0, 0.0};
  for (std::size_t j = 0; j + 1 < n; ++j) acc += term(j);
  return acc / static_cast<double>(n);
}

// The three branches must match between EmpCharFn::operator() and the node cache.
template <class FirstUnit, class SecondUnit>
Complex emp_value(std::size_t n, double t1, double t2, FirstUnit&& e1, SecondUnit&& e2) {
  if (t1 == 0.0 && t2 == 0.0) {
    return pair_average(n, [](std::size_t) { return Complex{1.0, 0.0}; });
  }
  if (t2 == 0.0) return pair_average(n, [&](std::size_t j) { return e1(j); });
  if (t1 == 0.0) return pair_average(n, [&](std::size_t j) { return e2(j + 1); });
  return pair_average(n, [&](std::size_t j) { return mul(e1(j), e2(j + 1)); });
}

struct CellTables {
  Eigen::MatrixXd a_re, a_im, b_re, b_im;
};

CellTables build_cell_tables(const WeightNodes& nodes, std::size_t r, double shift) {
  const auto rr = static_cast<Eigen::Index>(r);
  const auto nn = static_cast<Eigen::Index>(nodes.size());
  CellTables t{Eigen::MatrixXd(rr, nn), Eigen::MatrixXd(rr, nn), Eigen::MatrixXd(rr, nn),
               Eigen::MatrixXd(rr, nn)};
  GridDensity2D geometry = GridDensity2D::uniform(r);
  geometry.shift = shift;
  for (Eigen::Index l = 0; l < nn; ++l) {
    const auto& u = nodes.nodes[static_cast<std::size_t>(l)];
    for (Eigen::Index i = 0; i < rr; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double lo = geometry.edge(ui);
      const double hi = geometry.edge(ui + 1);
      const Complex ca = cell_charfn(lo, hi, u[0]);
      const Complex cb = cell_charfn(lo, hi, u[1]);
      t.a_re(i, l) = ca.real();
      t.a_im(i, l) = ca.imag();
      t.b_re(i, l) = cb.real();
      t.b_im(i, l) = cb.imag();
    }
  }
  return t;
}

double criterion_kernel(const GridDensity2D& density, const Eigen::MatrixXd& a_re,
                        const Eigen::MatrixXd& a_im, const Eigen::MatrixXd& b_re,
                        const Eigen::MatrixXd& b_im, const MnCriterion::NodeValues& target) {
  const auto rr = static_cast<Eigen::Index>(density.r);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      prob(density.p.data(), rr, rr);

  const Eigen::MatrixXd pb_re = prob * b_re;
  const Eigen::MatrixXd pb_im = prob * b_im;
  const Eigen::VectorXd rows = prob.rowwise().sum();
  const Eigen::VectorXd cols = prob.colwise().sum().transpose();

  const Eigen::Index nn = a_re.cols();
  double acc = 0.0;
  for (Eigen::Index l = 0; l < nn; ++l) {
    double joint_re = 0.0, joint_im = 0.0, m1_re = 0.0, m1_im = 0.0, m2_re = 0.0, m2_im = 0.0;
    for (Eigen::Index i = 0; i < rr; ++i) {
      const double ar = a_re(i, l), ai = a_im(i, l);
      const double pr = pb_re(i, l), pi = pb_im(i, l);
      joint_re += ar * pr - ai * pi;
      joint_im += ar * pi + ai * pr;
      m1_re += rows[i] * ar;
      m1_im += rows[i] * ai;
      m2_re += cols[i] * b_re(i, l);
      m2_im += cols[i] * b_im(i, l);
    }
    const auto ul = static_cast<std::size_t>(l);
    const Complex model_joint{joint_re, joint_im};
    const Complex model_first{m1_re, m1_im};
    const Complex model_second{m2_re, m2_im};
    const Complex lhs = mul(mul(target.joint[ul], model_first), model_second);
    const Complex rhs = mul(mul(model_joint, target.first[ul]), target.second[ul]);
    acc += std::norm(lhs - rhs);
  }
  return acc / static_cast<double>(nn);
}

}  // namespace

GridDensity2D GridDensity2D::uniform(std::size_t r) {
  if (r == 0) throw std::invalid_argument("GridDensity2D: r must be positive");
  GridDensity2D g;
  g.r = r;
  g.p.assign(r * r, 1.0 / static_cast<double>(r * r));
  return g;
}

GridDensity2D GridDensity2D::translated(double m) const {
  GridDensity2D out = *this;
  out.shift += m;
  return out;
}

std::vector<double> GridDensity2D::marginal_first() const {
  std::vector<double> out(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) out[i] += prob(i, j);
  }
  return out;
}

std::size_t GridDensity2D::cell_of(double v) const {
  const double lo = edge(0);
  const double hi = edge(r);
  if (!(v >= lo && v <= hi)) {
    throw std::out_of_range("GridDensity2D: value " + std::to_string(v) + " outside grid");
  }
  const double scaled = (v - lo) * static_cast<double>(r) / (hi - lo);
  auto idx = static_cast<std::size_t>(std::floor(scaled));
  return idx >= r ? r - 1 : idx;
}

void GridDensity2D::validate() const {
  if (r == 0) throw std::invalid_argument("GridDensity2D: r must be positive");
  if (p.size() != r * r) throw std::invalid_argument("GridDensity2D: p must have r*r entries");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("GridDensity2D: negative or NaN probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("GridDensity2D: probabilities sum to " + std::to_string(sum));
  }
  if (!std::isfinite(shift)) throw std::invalid_argument("GridDensity2D: non-finite shift");
}

Complex cell_charfn(double a, double b, double t) {
  if (!(a < b)) throw std::invalid_argument("cell_charfn: requires a < b");
  if (t == 0.0) return {1.0, 0.0};
  // (e^{itb} - e^{ita}) / (it(b-a)) = e^{it(a+b)/2} sinc(t(b-a)/2)
  const double half = 0.5 * (b - a);
  const double u = t * half;
  double sinc;
  if (std::abs(t) * (b - a) < kTaylorThreshold) {
    const double u2 = u * u;
    sinc = 1.0 - u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0));
  } else {
    sinc = std::sin(u) / u;
  }
  const Complex phase = unit(t * 0.5 * (a + b));
  return {phase.real() * sinc, phase.imag() * sinc};
}

Complex grid_charfn(const GridDensity2D& density, double t1, double t2) {
  const std::size_t r = density.r;
  std::vector<Complex> c1(r), c2(r);
  for (std::size_t i = 0; i < r; ++i) {
    c1[i] = cell_charfn(density.edge(i), density.edge(i + 1), t1);
    c2[i] = cell_charfn(density.edge(i), density.edge(i + 1), t2);
  }
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < r; ++i) {
    Complex row{0.0, 0.0};
    for (std::size_t j = 0; j < r; ++j) row += density.prob(i, j) * c2[j];
    acc += mul(c1[i], row);
  }
  return acc;
}

EmpCharFn::EmpCharFn(std::vector<double> y) : y_(std::move(y)) {
  if (y_.size() < 2) throw std::invalid_argument("EmpCharFn: need at least 2 observations");
}

Complex EmpCharFn::operator()(double t1, double t2) const {
  return emp_value(
      y_.size(), t1, t2, [&](std::size_t j) { return unit(t1 * y_[j]); },
      [&](std::size_t j) { return unit(t2 * y_[j]); });
}

Complex emp_charfn(const TimeSeries& series, double t1, double t2) {
  return EmpCharFn(series.y)(t1, t2);
}

WeightNodes WeightNodes::draw(std::uint64_t seed, std::size_t count, double sigma_w) {
  if (count == 0) throw std::invalid_argument("WeightNodes: need at least one node");
  if (!(sigma_w > 0.0)) throw std::invalid_argument("WeightNodes: sigma_w must be positive");
  CounterRng rng(seed, 0x4e4f444553ULL);
  WeightNodes out;
  out.sigma_w = sigma_w;
  out.seed = seed;
  out.nodes.resize(count);
  for (auto& u : out.nodes) {
    u[0] = sigma_w * rng.normal();
    u[1] = sigma_w * rng.normal();
  }
  return out;
}

double mn_criterion(const EmpCharFn& phi_hat, const GridDensity2D& density,
                    const WeightNodes& nodes) {
  return mn_criterion(CharFn2D([&phi_hat](double t1, double t2) { return phi_hat(t1, t2); }),
                      density, nodes);
}

double mn_criterion(const CharFn2D& target, const GridDensity2D& density,
                    const WeightNodes& nodes) {
  if (nodes.size() == 0) throw std::invalid_argument("mn_criterion: empty node set");
  density.validate();
  MnCriterion::NodeValues values;
  values.joint.reserve(nodes.size());
  values.first.reserve(nodes.size());
  values.second.reserve(nodes.size());
  for (const auto& u : nodes.nodes) {
    values.joint.push_back(target(u[0], u[1]));
    values.first.push_back(target(u[0], 0.0));
    values.second.push_back(target(0.0, u[1]));
  }
  const CellTables t = build_cell_tables(nodes, density.r, density.shift);
  return criterion_kernel(density, t.a_re, t.a_im, t.b_re, t.b_im, values);
}

MnCriterion::MnCriterion(const EmpCharFn& phi_hat, WeightNodes nodes, std::size_t r, double shift)
    : nodes_(std::move(nodes)), r_(r), shift_(shift) {
  if (nodes_.size() == 0) throw std::invalid_argument("MnCriterion: empty node set");
  if (r_ == 0) throw std::invalid_argument("MnCriterion: r must be positive");

  const auto y = phi_hat.observations();
  const std::size_t n = y.size();
  const std::size_t count = nodes_.size();
  target_.joint.resize(count);
  target_.first.resize(count);
  target_.second.resize(count);

  std::vector<Complex> e1(n), e2(n);
  for (std::size_t l = 0; l < count; ++l) {
    const double t1 = nodes_.nodes[l][0];
    const double t2 = nodes_.nodes[l][1];
    for (std::size_t j = 0; j < n; ++j) {
      e1[j] = unit(t1 * y[j]);
      e2[j] = unit(t2 * y[j]);
    }
    auto first = [&](std::size_t j) { return e1[j]; };
    auto second = [&](std::size_t j) { return e2[j]; };
    target_.joint[l] = emp_value(n, t1, t2, first, second);
    target_.first[l] = emp_value(n, t1, 0.0, first, second);
    target_.second[l] = emp_value(n, 0.0, t2, first, second);
  }

  CellTables t = build_cell_tables(nodes_, r_, shift_);
  a_re_ = std::move(t.a_re);
  a_im_ = std::move(t.a_im);
  b_re_ = std::move(t.b_re);
  b_im_ = std::move(t.b_im);
}

double MnCriterion::operator()(const GridDensity2D& density) const {
  if (density.r != r_ || density.shift != shift_) {
    throw std::invalid_argument("MnCriterion: density geometry differs from the cached grid");
  }
  if (density.p.size() != r_ * r_) throw std::invalid_argument("MnCriterion: bad density size");
  return criterion_kernel(density, a_re_, a_im_, b_re_, b_im_, target_);
}

}  // namespace thmm

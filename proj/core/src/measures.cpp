#include "urbanot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "urbanot/error.hpp"

namespace urbanot {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, "bad number '" + s + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------- Domain

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw Error(ErrorCode::ConfigError, "domain bounds must be nonempty and of equal length");
  for (std::size_t a = 0; a < lo.size(); ++a) {
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(lo[a] < hi[a]))
      throw Error(ErrorCode::ConfigError, "domain requires lo < hi on every axis");
  }
  Domain d;
  d.dim_ = static_cast<int>(lo.size());
  d.bounded_ = true;
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

Domain Domain::unbounded(int dim) {
  if (dim < 1) throw Error(ErrorCode::ConfigError, "dimension must be >= 1");
  Domain d;
  d.dim_ = dim;
  d.bounded_ = false;
  return d;
}

double Domain::diameter() const {
  if (!bounded_) throw Error(ErrorCode::UnboundedDomain, "diameter of R^n");
  double s = 0.0;
  for (std::size_t a = 0; a < lo_.size(); ++a) s += (hi_[a] - lo_[a]) * (hi_[a] - lo_[a]);
  return std::sqrt(s);
}

bool Domain::contains(std::span<const double> x, double slack) const {
  if (x.size() != static_cast<std::size_t>(dim_)) return false;
  if (!bounded_) return true;
  for (std::size_t a = 0; a < x.size(); ++a)
    if (x[a] < lo_[a] - slack || x[a] > hi_[a] + slack) return false;
  return true;
}

// ------------------------------------------------------------------ Grid

Grid::Grid(Domain domain, std::vector<int> resolution)
    : domain_(std::move(domain)), resolution_(std::move(resolution)) {
  if (!domain_.bounded()) throw Error(ErrorCode::UnboundedDomain, "grid over R^n");
  if (resolution_.size() != static_cast<std::size_t>(domain_.dim()))
    throw Error(ErrorCode::ConfigError, "resolution must have one entry per axis");
  cell_count_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t a = 0; a < resolution_.size(); ++a) {
    if (resolution_[a] < 1) throw Error(ErrorCode::ConfigError, "resolution must be >= 1");
    const double h = (domain_.hi()[a] - domain_.lo()[a]) / resolution_[a];
    step_.push_back(h);
    cell_volume_ *= h;
    cell_count_ *= static_cast<std::size_t>(resolution_[a]);
  }
}

Grid::Grid(Domain domain, int cells_per_axis)
    : Grid(domain, std::vector<int>(static_cast<std::size_t>(domain.dim()), cells_per_axis)) {}

double Grid::max_step() const noexcept {
  return *std::max_element(step_.begin(), step_.end());
}

double Grid::half_diagonal() const noexcept {
  double s = 0.0;
  for (double h : step_) s += 0.25 * h * h;
  return std::sqrt(s);
}

void Grid::cell_center(std::size_t index, std::span<double> out) const {
  for (std::size_t a = resolution_.size(); a-- > 0;) {
    const auto r = static_cast<std::size_t>(resolution_[a]);
    const std::size_t i = index % r;
    index /= r;
    out[a] = domain_.lo()[a] + (static_cast<double>(i) + 0.5) * step_[a];
  }
}

Point Grid::cell_center(std::size_t index) const {
  Point p(resolution_.size());
  cell_center(index, p);
  return p;
}

// ----------------------------------------------------------- GridDensity

GridDensity::GridDensity(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count())
    throw Error(ErrorCode::ConfigError, "density has " + std::to_string(values_.size()) +
                                            " values for " + std::to_string(grid_.cell_count()) +
                                            " cells");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::NegativeDensity, "cell value " + format_double(v));
}

double GridDensity::total_mass() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0) * grid_.cell_volume();
}

bool GridDensity::is_probability(double tol) const noexcept {
  return std::abs(total_mass() - 1.0) <= tol;
}

// --------------------------------------------------------- AtomicMeasure

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorCode::InvalidMeasure, "atomic measure needs at least one atom");
  dim_ = static_cast<int>(atoms_.front().position.size());
  if (dim_ < 1) throw Error(ErrorCode::InvalidMeasure, "atom position is empty");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (a.position.size() != static_cast<std::size_t>(dim_))
      throw Error(ErrorCode::InvalidMeasure, "atoms of mixed dimension");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass))
      throw Error(ErrorCode::InvalidMeasure, "atom mass must be positive, got " + format_double(a.mass));
    for (double c : a.position)
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidMeasure, "non-finite atom position");
    for (std::size_t j = 0; j < i; ++j)
      if (atoms_[j].position == a.position)
        throw Error(ErrorCode::InvalidMeasure, "duplicate atom position");
  }
}

double AtomicMeasure::total_mass() const noexcept {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.mass;
  return s;
}

bool AtomicMeasure::is_probability(double tol) const noexcept {
  return std::abs(total_mass() - 1.0) <= tol;
}

std::vector<double> AtomicMeasure::masses() const {
  std::vector<double> m;
  m.reserve(atoms_.size());
  for (const Atom& a : atoms_) m.push_back(a.mass);
  return m;
}

// ---------------------------------------------------- WeightedPointCloud

WeightedPointCloud::WeightedPointCloud(int dim, std::vector<double> coords,
                                       std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ < 1) throw Error(ErrorCode::InvalidMeasure, "point cloud dimension must be >= 1");
  if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim_))
    throw Error(ErrorCode::InvalidMeasure, "points and weights differ in cardinality");
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidMeasure, "point cloud weights must be positive");
}

double WeightedPointCloud::total_weight() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

// ------------------------------------------------------------ operations

GridDensity make_grid_density(const Domain& domain, std::vector<int> resolution,
                              std::vector<double> cell_values) {
  if (!domain.bounded()) throw Error(ErrorCode::UnboundedDomain, "grid density over R^n");
  return GridDensity(Grid(domain, std::move(resolution)), std::move(cell_values));
}

GridDensity normalize(const GridDensity& density) {
  const double mass = density.total_mass();
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroMass, "cannot normalize a density of zero mass");
  std::vector<double> v = density.values();
  for (double& x : v) x /= mass;
  return GridDensity(density.grid(), std::move(v));
}

WeightedPointCloud to_point_cloud(const GridDensity& density) {
  if (!density.is_probability())
    throw Error(ErrorCode::NotProbability,
                "density has total mass " + format_double(density.total_mass()));
  const Grid& grid = density.grid();
  const auto dim = static_cast<std::size_t>(grid.dim());
  std::vector<double> coords;
  std::vector<double> weights;
  Point center(dim);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double w = density.values()[c] * grid.cell_volume();
    if (!(w > 0.0)) continue;
    grid.cell_center(c, center);
    coords.insert(coords.end(), center.begin(), center.end());
    weights.push_back(w);
  }
  if (weights.empty()) throw Error(ErrorCode::ZeroMass, "density has no positive cell");
  return WeightedPointCloud(grid.dim(), std::move(coords), std::move(weights));
}

WeightedPointCloud to_point_cloud(const AtomicMeasure& measure) {
  std::vector<double> coords;
  std::vector<double> weights;
  for (const Atom& a : measure.atoms()) {
    coords.insert(coords.end(), a.position.begin(), a.position.end());
    weights.push_back(a.mass);
  }
  return WeightedPointCloud(measure.dim(), std::move(coords), std::move(weights));
}

double distance(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) s += (x[a] - y[a]) * (x[a] - y[a]);
  return std::sqrt(s);
}

double distance_pow(std::span<const double> x, std::span<const double> y, double p) noexcept {
  if (x.size() == 1) {
    const double d = std::abs(x[0] - y[0]);
    if (p == 1.0) return d;
    if (p == 2.0) return d * d;
    return std::pow(d, p);
  }
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) s += (x[a] - y[a]) * (x[a] - y[a]);
  if (p == 2.0) return s;
  if (p == 1.0) return std::sqrt(s);
  return std::pow(s, 0.5 * p);
}

// --------------------------------------------------------- serialization

void write_density_csv(const GridDensity& density, std::ostream& out) {
  const Grid& grid = density.grid();
  const Domain& dom = grid.domain();
  out << "dim," << grid.dim() << '\n';
  out << "bounds";
  for (int a = 0; a < grid.dim(); ++a)
    out << ',' << format_double(dom.lo()[static_cast<std::size_t>(a)]) << ','
        << format_double(dom.hi()[static_cast<std::size_t>(a)]);
  out << "\nresolution";
  for (int r : grid.resolution()) out << ',' << r;
  out << '\n';
  const auto run = static_cast<std::size_t>(grid.resolution().back());
  const auto& v = density.values();
  for (std::size_t c = 0; c < v.size(); ++c) {
    out << format_double(v[c]) << ((c + 1) % run == 0 ? '\n' : ',');
  }
}

GridDensity read_density_csv(std::istream& in) {
  std::string line;
  auto next_fields = [&](const char* tag) {
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, std::string("missing header line ") + tag);
    auto f = split_csv_line(line);
    if (f.empty() || f.front() != tag) throw Error(ErrorCode::IoError, std::string("expected header ") + tag);
    return f;
  };
  auto dim_fields = next_fields("dim");
  if (dim_fields.size() != 2) throw Error(ErrorCode::IoError, "malformed dim line");
  const int dim = static_cast<int>(parse_double(dim_fields[1]));
  auto bounds = next_fields("bounds");
  if (bounds.size() != static_cast<std::size_t>(1 + 2 * dim)) throw Error(ErrorCode::IoError, "malformed bounds line");
  std::vector<double> lo, hi;
  for (int a = 0; a < dim; ++a) {
    lo.push_back(parse_double(bounds[static_cast<std::size_t>(1 + 2 * a)]));
    hi.push_back(parse_double(bounds[static_cast<std::size_t>(2 + 2 * a)]));
  }
  auto res = next_fields("resolution");
  if (res.size() != static_cast<std::size_t>(1 + dim)) throw Error(ErrorCode::IoError, "malformed resolution line");
  std::vector<int> resolution;
  for (int a = 0; a < dim; ++a) resolution.push_back(static_cast<int>(parse_double(res[static_cast<std::size_t>(1 + a)])));
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    for (const auto& f : split_csv_line(line)) values.push_back(parse_double(f));
  }
  return make_grid_density(Domain::box(lo, hi), resolution, std::move(values));
}

void write_density_pgm(const GridDensity& density, std::ostream& out) {
  const Grid& grid = density.grid();
  if (grid.dim() > 2) throw Error(ErrorCode::IoError, "PGM export supports 1D and 2D densities");
  const int width = grid.resolution()[0];
  const int height = grid.dim() == 2 ? grid.resolution()[1] : 1;
  const auto& v = density.values();
  const double vmax = *std::max_element(v.begin(), v.end());
  out << "P2\n" << width << ' ' << height << "\n255\n";
  for (int row = 0; row < height; ++row) {
    const int j = height - 1 - row;
    for (int i = 0; i < width; ++i) {
      const std::size_t c = grid.dim() == 2 ? static_cast<std::size_t>(i) * static_cast<std::size_t>(height) +
                                                  static_cast<std::size_t>(j)
                                            : static_cast<std::size_t>(i);
      const int level = vmax > 0.0 ? static_cast<int>(std::lround(255.0 * v[c] / vmax)) : 0;
      out << level << (i + 1 == width ? '\n' : ' ');
    }
  }
}

}  // namespace urbanot

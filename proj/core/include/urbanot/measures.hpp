#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace urbanot {

using Point = std::vector<double>;

/// Tolerance applied when checking that user-supplied measures are
/// probabilities.
inline constexpr double kInputProbabilityTol = 1e-8;
/// Tolerance applied to measures produced internally (normalization, etc.).
inline constexpr double kInternalProbabilityTol = 1e-12;

/// Axis-aligned box in R^n, or all of R^n when unbounded.
class Domain {
 public:
  static Domain box(std::vector<double> lo, std::vector<double> hi);
  static Domain interval(double lo, double hi) { return box({lo}, {hi}); }
  static Domain unbounded(int dim);

  int dim() const noexcept { return dim_; }
  bool bounded() const noexcept { return bounded_; }
  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }

  /// Euclidean length of the box diagonal. Throws UnboundedDomain.
  double diameter() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;

  bool operator==(const Domain&) const = default;

 private:
  Domain() = default;
  int dim_ = 0;
  bool bounded_ = false;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Regular cell-centred grid over a bounded domain. Cells are stored row-major
/// with the last axis varying fastest.
class Grid {
 public:
  Grid(Domain domain, std::vector<int> resolution);
  /// Same number of cells along every axis.
  Grid(Domain domain, int cells_per_axis);

  const Domain& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.dim(); }
  const std::vector<int>& resolution() const noexcept { return resolution_; }
  std::size_t cell_count() const noexcept { return cell_count_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double step(int axis) const { return step_[static_cast<std::size_t>(axis)]; }
  /// Largest cell edge.
  double max_step() const noexcept;
  /// Half the cell diagonal: the distance from a cell centre to its corners.
  double half_diagonal() const noexcept;

  /// Writes the centre of cell `index` into `out` (size dim()).
  void cell_center(std::size_t index, std::span<double> out) const;
  Point cell_center(std::size_t index) const;

  bool operator==(const Grid&) const = default;

 private:
  Domain domain_;
  std::vector<int> resolution_;
  std::vector<double> step_;
  std::size_t cell_count_ = 0;
  double cell_volume_ = 0.0;
};

/// Discretised absolutely continuous measure: one density value per grid cell.
class GridDensity {
 public:
  GridDensity(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double cell_volume() const noexcept { return grid_.cell_volume(); }
  double total_mass() const noexcept;
  bool is_probability(double tol = kInputProbabilityTol) const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

struct Atom {
  Point position;
  double mass = 0.0;
};

/// Finite sum of weighted Dirac masses.
class AtomicMeasure {
 public:
  explicit AtomicMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  int dim() const noexcept { return dim_; }
  double total_mass() const noexcept;
  bool is_probability(double tol = kInputProbabilityTol) const noexcept;
  std::vector<double> masses() const;

 private:
  std::vector<Atom> atoms_;
  int dim_ = 0;
};

/// Flat point/weight storage shared by the transport solver.
class WeightedPointCloud {
 public:
  WeightedPointCloud(int dim, std::vector<double> coords,
                     std::vector<double> weights);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double total_weight() const noexcept;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

GridDensity make_grid_density(const Domain& domain,
                              std::vector<int> resolution,
                              std::vector<double> cell_values);

/// Rescales to unit mass. Throws ZeroMass.
GridDensity normalize(const GridDensity& density);

/// One point per cell with positive mass, placed at the cell centre.
/// Throws NotProbability.
WeightedPointCloud to_point_cloud(const GridDensity& density);

WeightedPointCloud to_point_cloud(const AtomicMeasure& measure);

/// Euclidean distance raised to `p`.
double distance_pow(std::span<const double> x, std::span<const double> y,
                    double p) noexcept;
double distance(std::span<const double> x, std::span<const double> y) noexcept;

// Serialization. The CSV layout is a three-line header
//   dim,<n>
//   bounds,<lo_0>,<hi_0>,...,<lo_{n-1}>,<hi_{n-1}>
//   resolution,<r_0>,...,<r_{n-1}>
// followed by the cell values, one line per run of the last axis.
void write_density_csv(const GridDensity& density, std::ostream& out);
GridDensity read_density_csv(std::istream& in);
/// Plain-text (P2) grayscale image, largest value mapped to 255. 1D densities
/// become a single row; 2D densities put axis 1 on the vertical, increasing
/// upward.
void write_density_pgm(const GridDensity& density, std::ostream& out);

}  // namespace urbanot

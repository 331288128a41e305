#pragma once

// Uniform tensor-product grids and node-sampled fields, plus their JSON file
// format. Fields are immutable value types; all node data is row-major with
// the x index fastest.

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacdet/core.hpp"

namespace jacdet {

/// Cell-count / spacing description of a rectangle [x0, x0+nx*hx] x [y0, y0+ny*hy].
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double hx = 0.0;
  double hy = 0.0;

  GridSpec() = default;
  GridSpec(int nx_, int ny_, double x0_, double y0_, double hx_, double hy_)
      : nx(nx_), ny(ny_), x0(x0_), y0(y0_), hx(hx_), hy(hy_) {
    validate();
  }

  /// Convenience: grid over [x0,x1] x [y0,y1] with nx x ny cells.
  static GridSpec over_rect(double x0, double y0, double x1, double y1, int nx, int ny) {
    if (nx < 8 || ny < 8) throw config_error("GridSpec: need at least 8 cells per axis");
    if (!(x1 > x0) || !(y1 > y0)) throw config_error("GridSpec: empty rectangle");
    return GridSpec(nx, ny, x0, y0, (x1 - x0) / nx, (y1 - y0) / ny);
  }

  void validate() const {
    if (nx < 8 || ny < 8) throw config_error("GridSpec: need at least 8 cells per axis");
    if (!(hx > 0.0) || !(hy > 0.0)) throw config_error("GridSpec: spacings must be positive");
  }

  int nodes_x() const { return nx + 1; }
  int nodes_y() const { return ny + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1);
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) +
           static_cast<std::size_t>(i);
  }
  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return y0 + j * hy; }
  double x1() const { return x0 + nx * hx; }
  double y1() const { return y0 + ny * hy; }
  Vec2 node(int i, int j) const { return {x(i), y(j)}; }
  bool boundary(int i, int j) const { return i == 0 || j == 0 || i == nx || j == ny; }

  bool same_as(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && hx == o.hx && hy == o.hy;
  }

  /// Closed disk B(c, r) contained in the closed grid rectangle?
  bool contains_disk(const Vec2& c, double r) const {
    return c.x - r >= x0 && c.x + r <= x1() && c.y - r >= y0 && c.y + r <= y1();
  }
};

/// Real-valued function sampled at grid nodes.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridSpec grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.node_count())
      throw config_error("ScalarField: value count does not match grid");
    for (double v : values_)
      if (!finite(v)) throw config_error("ScalarField: non-finite sample");
  }

  template <class Fn>
  static ScalarField sample(const GridSpec& grid, Fn&& fn) {
    std::vector<double> vals(grid.node_count());
    for (int j = 0; j <= grid.ny; ++j)
      for (int i = 0; i <= grid.nx; ++i) vals[grid.index(i, j)] = fn(grid.x(i), grid.y(j));
    return ScalarField(grid, std::move(vals));
  }

  static ScalarField zero(const GridSpec& grid) {
    return ScalarField(grid, std::vector<double>(grid.node_count(), 0.0));
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& at(int i, int j) { return values_[grid_.index(i, j)]; }

  /// Bilinear interpolation at an interior point of the grid rectangle.
  double interp(double x, double y) const {
    double tx = (x - grid_.x0) / grid_.hx;
    double ty = (y - grid_.y0) / grid_.hy;
    int i = std::clamp(static_cast<int>(std::floor(tx)), 0, grid_.nx - 1);
    int j = std::clamp(static_cast<int>(std::floor(ty)), 0, grid_.ny - 1);
    double ax = tx - i, ay = ty - j;
    return (1 - ax) * (1 - ay) * (*this)(i, j) + ax * (1 - ay) * (*this)(i + 1, j) +
           (1 - ax) * ay * (*this)(i, j + 1) + ax * ay * (*this)(i + 1, j + 1);
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Two-component field with the ScalarField layout per component.
class VectorField {
 public:
  VectorField() = default;
  VectorField(GridSpec grid, std::vector<double> c1, std::vector<double> c2)
      : grid_(grid), comp1_(std::move(c1)), comp2_(std::move(c2)) {
    grid_.validate();
    if (comp1_.size() != grid_.node_count() || comp2_.size() != grid_.node_count())
      throw config_error("VectorField: component size does not match grid");
    for (std::size_t k = 0; k < comp1_.size(); ++k)
      if (!finite(comp1_[k]) || !finite(comp2_[k]))
        throw config_error("VectorField: non-finite sample");
  }

  template <class Fn>
  static VectorField sample(const GridSpec& grid, Fn&& fn) {
    std::vector<double> c1(grid.node_count()), c2(grid.node_count());
    for (int j = 0; j <= grid.ny; ++j)
      for (int i = 0; i <= grid.nx; ++i) {
        Vec2 v = fn(grid.x(i), grid.y(j));
        c1[grid.index(i, j)] = v.x;
        c2[grid.index(i, j)] = v.y;
      }
    return VectorField(grid, std::move(c1), std::move(c2));
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& comp1() const { return comp1_; }
  const std::vector<double>& comp2() const { return comp2_; }
  Vec2 operator()(int i, int j) const {
    std::size_t k = grid_.index(i, j);
    return {comp1_[k], comp2_[k]};
  }

 private:
  GridSpec grid_;
  std::vector<double> comp1_, comp2_;
};

// ---------------------------------------------------------------------------
// Field file format (JSON). Doubles survive a write/parse cycle bit-exactly.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const GridSpec& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0}, {"hx", g.hx}, {"hy", g.hy}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  return GridSpec(j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("x0").get<double>(),
                  j.at("y0").get<double>(), j.at("hx").get<double>(), j.at("hy").get<double>());
}

inline nlohmann::json to_json(const ScalarField& f) {
  return {{"grid", to_json(f.grid())}, {"values", f.values()}};
}

inline ScalarField scalar_from_json(const nlohmann::json& j) {
  return ScalarField(grid_from_json(j.at("grid")), j.at("values").get<std::vector<double>>());
}

inline nlohmann::json to_json(const VectorField& f) {
  return {{"grid", to_json(f.grid())}, {"comp1", f.comp1()}, {"comp2", f.comp2()}};
}

inline VectorField vector_from_json(const nlohmann::json& j) {
  return VectorField(grid_from_json(j.at("grid")), j.at("comp1").get<std::vector<double>>(),
                     j.at("comp2").get<std::vector<double>>());
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open for reading: " + path);
  return nlohmann::json::parse(in);
}

}  // namespace jacdet

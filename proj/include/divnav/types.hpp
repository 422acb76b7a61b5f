#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace divnav {

struct BoundsError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ProviderContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VocabularyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
  TransportError(const std::string& what, int attempts)
      : std::runtime_error(what), attempts(attempts) {}
  int attempts{0};
};

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cell {
  int col{0};
  int row{0};
  auto operator<=>(const Cell&) const = default;
};

// Row-major order: by row, then by column. Used for all deterministic
// orderings of cell lists.
inline bool row_major_less(Cell a, Cell b) {
  if (a.row != b.row) return a.row < b.row;
  return a.col < b.col;
}

struct GridPose {
  double x{0.0};
  double y{0.0};
  double heading{0.0};  // radians, 0 = +x, counter-clockwise
};

struct GridSpec {
  double resolution{0.1};  // meters per cell
  int width{1};
  int height{1};
  double origin_x{0.0};  // world coordinates of cell (0,0)
  double origin_y{0.0};

  bool operator==(const GridSpec&) const = default;

  void validate() const {
    if (resolution <= 0.0) throw DimensionError("GridSpec: resolution must be positive");
    if (width < 1 || height < 1) throw DimensionError("GridSpec: width and height must be >= 1");
  }

  int cells() const { return width * height; }

  bool contains(Cell c) const {
    return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height;
  }

  int index(Cell c) const { return c.row * width + c.col; }

  Cell cell_of(int index) const { return Cell{index % width, index / width}; }

  Cell world_to_cell(double x, double y) const {
    return Cell{static_cast<int>(std::floor((x - origin_x) / resolution)),
                static_cast<int>(std::floor((y - origin_y) / resolution))};
  }

  std::pair<double, double> cell_center(Cell c) const {
    return {origin_x + (c.col + 0.5) * resolution, origin_y + (c.row + 0.5) * resolution};
  }
};

template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(const GridSpec& spec, T fill = T{})
      : spec_(spec), data_(static_cast<size_t>(spec.cells()), fill) {
    spec_.validate();
  }

  const GridSpec& spec() const { return spec_; }
  bool empty() const { return data_.empty(); }

  T& at(Cell c) {
    check(c);
    return data_[static_cast<size_t>(spec_.index(c))];
  }
  const T& at(Cell c) const {
    check(c);
    return data_[static_cast<size_t>(spec_.index(c))];
  }
  T& operator[](int i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int i) const { return data_[static_cast<size_t>(i)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(T value) { data_.assign(data_.size(), value); }

  bool operator==(const Grid&) const = default;

 private:
  void check(Cell c) const {
    if (!spec_.contains(c))
      throw BoundsError("cell (" + std::to_string(c.col) + "," + std::to_string(c.row) +
                        ") outside grid " + std::to_string(spec_.width) + "x" +
                        std::to_string(spec_.height));
  }

  GridSpec spec_{};
  std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;

inline double euclidean(Cell a, Cell b) {
  const double dc = a.col - b.col;
  const double dr = a.row - b.row;
  return std::sqrt(dc * dc + dr * dr);
}

// 8-neighborhood offsets, row-major scan order.
inline const std::vector<Cell>& neighbor_offsets_8() {
  static const std::vector<Cell> k = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                      {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
  return k;
}

}  // namespace divnav

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace uav2x {

// Minimal dense row-major matrix.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T init = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, init) {}

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Grid& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using BinaryMatrix = Grid<std::uint8_t>;

// Subchannel pairing matrices for U2I/CU links (rows = U2I UAVs then CUs)
// and for U2U links.
using PhiMatrix = BinaryMatrix;
using PsiMatrix = BinaryMatrix;

}  // namespace uav2x

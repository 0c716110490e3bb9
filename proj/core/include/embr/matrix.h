// embr/matrix.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMBR_MATRIX_H_
#define EMBR_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace embr {

// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t Rows() const { return rows_; }
  std::size_t Cols() const { return cols_; }

  T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T &operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> Row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> Row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> Data() { return data_; }
  std::span<const T> Data() const { return data_; }

  bool operator==(const Matrix &) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace embr

#endif  // EMBR_MATRIX_H_

#include "hdapprox/tables.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hdapprox/errors.hpp"

namespace hdapprox {

LevelTable LevelTable::generate(std::size_t dim, std::size_t levels, Rng& rng) {
  require_valid_dim(dim);
  if (levels < 2) throw Error(ErrorCode::invalid_argument, "level table needs at least 2 levels");
  if (dim % (2 * levels) != 0) {
    throw Error(ErrorCode::non_integer_flip_count,
                "dimension " + std::to_string(dim) + " is not divisible by 2*L = " + std::to_string(2 * levels));
  }
  const std::size_t flips = dim / (2 * levels);

  // One permutation of all coordinates; step m flips the m-th block of it,
  // so every coordinate is flipped at most once across the table.
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});

  LevelTable table;
  table.rows_.reserve(levels);
  table.rows_.push_back(Hypervector::random(dim, rng));
  std::shuffle(order.begin(), order.end(), rng);

  for (std::size_t m = 1; m < levels; ++m) {
    Hypervector next = table.rows_.back();
    for (std::size_t i = (m - 1) * flips; i < m * flips; ++i) next.flip(order[i]);
    table.rows_.push_back(std::move(next));
  }
  return table;
}

LevelTable LevelTable::from_rows(std::vector<Hypervector> rows) {
  if (rows.size() < 2) throw Error(ErrorCode::invalid_argument, "level table needs at least 2 levels");
  for (const auto& r : rows) {
    if (r.dim() != rows.front().dim()) throw Error(ErrorCode::dimension_mismatch, "level rows differ in length");
  }
  LevelTable table;
  table.rows_ = std::move(rows);
  return table;
}

IdTable::IdTable(Hypervector seed, std::size_t features) : seed_(std::move(seed)), features_(features) {
  require_valid_dim(seed_.dim());
  if (features_ == 0) throw Error(ErrorCode::invalid_argument, "id table needs at least one feature");
}

IdTable IdTable::generate(std::size_t dim, std::size_t features, Rng& rng) {
  require_valid_dim(dim);
  return IdTable(Hypervector::random(dim, rng), features);
}

}  // namespace hdapprox

#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "ionboost/labels.hpp"
#include "ionboost/population.hpp"

namespace ionboost {

// Brute-force 1-nearest-neighbour under the Euclidean metric.
// Distance ties go to the lowest stored index.
class NearestNeighborModel {
 public:
  explicit NearestNeighborModel(TrainingSet points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("fit_1nn: empty training set");
  }

  const TrainingSet& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dimension() const noexcept { return points_.dimension(); }

  std::size_t nearest_index(std::span<const double> x) const {
    const std::size_t d = points_.dimension();
    if (x.size() != d)
      throw std::invalid_argument("predict_1nn: expected dimension " + std::to_string(d) + ", got " +
                                  std::to_string(x.size()));
    const double* p = points_.coordinates().data();
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < points_.size(); ++i, p += d) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = p[j] - x[j];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        arg = i;
      }
    }
    return arg;
  }

  Label predict(std::span<const double> x) const { return points_.y(nearest_index(x)); }

 private:
  TrainingSet points_;
};

inline NearestNeighborModel fit_1nn(const TrainingSet& t) { return NearestNeighborModel(t); }
inline Label predict_1nn(const NearestNeighborModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace ionboost

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace polite {

/// Posts x categories, row i belongs to post_ids[i].
struct FeatureMatrix {
  std::vector<std::string> post_ids;
  std::vector<std::string> categories;
  Eigen::MatrixXd values;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }

  std::optional<Eigen::Index> column_of(std::string_view category) const {
    for (std::size_t c = 0; c < categories.size(); ++c) {
      if (categories[c] == category) return static_cast<Eigen::Index>(c);
    }
    return std::nullopt;
  }
};

}  // namespace polite

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace roshap::svg {

/// Histogram of samples (density scale) with a KDE curve and the normal
/// density with the samples' mean and SD. A sample set without spread
/// yields the histogram alone.
std::string histogram_with_overlays(const Eigen::Ref<const Eigen::VectorXd>& samples, const std::string& title,
                                    int bins = 30);

struct BarGroup {
  std::string label;         // x-axis group
  std::vector<double> mean;  // one per series
  std::vector<double> sd;
};

/// Grouped bars with +-1 SD error bars.
std::string grouped_bars(const std::vector<BarGroup>& groups, const std::vector<std::string>& series,
                         const std::string& title, const std::string& y_label);

void write_file(const std::string& path, const std::string& content);

}  // namespace roshap::svg

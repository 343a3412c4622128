#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sorterlab::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Self-contained line chart (inline styles, no external references).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series);

// Self-contained heatmap; z(i, j) maps row i to the y axis (range y0..y1)
// and column j to the x axis (range x0..x1). Large matrices are max-pooled
// down to a manageable cell count.
void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::string& ylabel,
                   const Eigen::MatrixXd& z, double x0, double x1, double y0,
                   double y1);

} // namespace sorterlab::cli

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace delaycert {

/// Delayed neural network zdot = -C z + A f(z) + B f(z(t - h(t))) with
/// sector-bounded activations 0 <= f_j(s)/s <= L_j.
struct NetworkModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C; ///< diagonal, strictly positive
    Eigen::VectorXd L; ///< sector slopes

    [[nodiscard]] Eigen::Index dimension() const { return A.rows(); }
    [[nodiscard]] double min_self_feedback() const { return C.diagonal().minCoeff(); }
    [[nodiscard]] Eigen::MatrixXd slope_matrix() const { return L.asDiagonal(); }

    /// Throws InvalidModel on shape or sign violations.
    void validate() const;
};

struct AnalysisParams {
    double h = 1.0;  ///< delay upper bound
    double mu = 0.0; ///< bound on |hdot|
    double k = 0.0;  ///< exponential rate

    /// Throws InvalidParams unless h > 0, 0 <= mu < 1 and 0 < k < min c_i.
    void validate(const NetworkModel& model) const;
};

/// Which delay offset stands in for the interior split point of the
/// weighted inequality applied on [t - h, t].
enum class SplitReading {
    FromIntervalEnd, ///< z(t - (h - split)): consistent with the inequality's own limits
    SplitAsDelay,    ///< z(t - split)
};

/// Built-in benchmark networks.
NetworkModel example_model(int id);
std::optional<NetworkModel> preset_model(std::string_view name);
std::vector<std::string> preset_names();

} // namespace delaycert

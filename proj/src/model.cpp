#include "delaycert/model.hpp"

#include "delaycert/error.hpp"

#include <cmath>
#include <sstream>

namespace delaycert {

void NetworkModel::validate() const
{
    const auto n = A.rows();
    if (n < 1) throw Error(ErrorCode::InvalidModel, "empty model");
    if (A.cols() != n || B.rows() != n || B.cols() != n || C.rows() != n || C.cols() != n || L.size() != n)
        throw Error(ErrorCode::InvalidModel, "A, B, C, L must share the dimension n");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !L.allFinite())
        throw Error(ErrorCode::InvalidModel, "non-finite model entries");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && C(i, j) != 0.0) throw Error(ErrorCode::InvalidModel, "C must be diagonal");
        if (!(C(i, i) > 0.0)) throw Error(ErrorCode::InvalidModel, "C must have positive diagonal");
        if (!(L(i) > 0.0)) throw Error(ErrorCode::InvalidModel, "sector slopes must be positive");
    }
}

void AnalysisParams::validate(const NetworkModel& model) const
{
    std::ostringstream msg;
    if (!(std::isfinite(h) && h > 0.0)) msg << "h must be positive; ";
    if (!(mu >= 0.0 && mu < 1.0)) msg << "mu must lie in [0, 1); ";
    if (!(k > 0.0 && k < model.min_self_feedback())) msg << "k must lie in (0, min c_i); ";
    if (!msg.str().empty()) throw Error(ErrorCode::InvalidParams, msg.str());
}

NetworkModel example_model(int id)
{
    NetworkModel m;
    switch (id) {
    case 1:
        m.A.resize(2, 2);
        m.A << -1.0, 0.5, 0.5, -1.0;
        m.B.resize(2, 2);
        m.B << -0.5, 0.5, 0.5, 0.5;
        m.C = Eigen::Vector2d(2.0, 3.5).asDiagonal();
        m.L = Eigen::Vector2d(1.0, 1.0);
        break;
    case 2:
        m.A.resize(4, 4);
        m.A << -0.0373, 0.4852, -0.3351, 0.2336,
               -1.6033, 0.5988, -0.3224, 1.2352,
               0.3394, -0.0860, -0.3824, -0.5785,
               -0.1311, 0.3253, -0.9534, -0.5015;
        m.B.resize(4, 4);
        m.B << 0.8674, -1.2405, -0.5325, -0.0220,
               0.0474, -0.9164, 0.0360, 0.9816,
               1.8495, 2.6117, -0.3788, 0.0824,
               -2.0413, 0.5179, 1.1734, -0.2775;
        m.C = Eigen::Vector4d(1.2769, 0.6231, 0.9230, 0.4480).asDiagonal();
        m.L = Eigen::Vector4d(0.1137, 0.1279, 0.7994, 0.2368);
        break;
    case 3:
        m.A.resize(2, 2);
        m.A << 1.0, 1.0, -1.0, -1.0;
        m.B.resize(2, 2);
        m.B << 0.88, 1.0, 1.0, 1.0;
        m.C = Eigen::Vector2d(2.0, 2.0).asDiagonal();
        m.L = Eigen::Vector2d(0.4, 0.8);
        break;
    default:
        throw Error(ErrorCode::InvalidModel, "unknown example id " + std::to_string(id));
    }
    return m;
}

std::optional<NetworkModel> preset_model(std::string_view name)
{
    if (name == "example1") return example_model(1);
    if (name == "example2") return example_model(2);
    if (name == "example3") return example_model(3);
    return std::nullopt;
}

std::vector<std::string> preset_names() { return {"example1", "example2", "example3"}; }

} // namespace delaycert

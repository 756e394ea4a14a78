#include "formstab/linmodel.hpp"

#include "formstab/errors.hpp"

namespace formstab {

void AircraftParams::validate() const {
    const double fields[] = {mass, wingspan, mean_chord, cruise_speed, air_density, tail_span,
                             vertical_tail_span, trimmed_thrust, zero_lift_drag, wake_circulation};
    for (double f : fields)
        if (!(f > 0.0)) throw ConfigError("aircraft parameters must all be strictly positive");
    if (!(aspect_ratio() > 1.0)) throw ConfigError("aspect ratio must exceed one");
}

void LtiModel::validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n) throw ConfigError("model A/B dimensions are inconsistent");
    for (const auto* C : {&Cp, &Cv, &Calpha})
        if (C->size() != 0 && C->cols() != n) throw ConfigError("model selector has wrong column count");
}

Eigen::MatrixXd position_selector() { return Eigen::MatrixXd::Identity(12, 12).topRows(3); }
Eigen::MatrixXd velocity_selector() { return Eigen::MatrixXd::Identity(12, 12).middleRows(3, 3); }
Eigen::MatrixXd attitude_selector() { return Eigen::MatrixXd::Identity(12, 12).bottomRows(6); }

Eigen::MatrixXd a320_longitudinal_A() {
    Eigen::MatrixXd A(6, 6);
    A << 0, 0, 1, 0, 0, 0,
         0, 0, 0, 1, 0, 0,
         0, 0, -5.45e-3, 3.61e-2, -1.51, -6.42e-2,
         0, 0, -8.52e-2, -0.445, -102, 227,
         0, 0, 0, 0, 0, 1,
         0, 0, 0, -4.18e-2, -9.62, -0.960;
    return A;
}

Eigen::MatrixXd a320_lateral_A() {
    Eigen::MatrixXd A(6, 6);
    A << 0, 1, 0, 0, 0, 0,
         0, -3.57e-2, 9.81, 8.22, -0.167, -230,
         0, 0, 0, 0, 1, 0,
         0, 0, 0, 0, 0, 1,
         0, -1.10e-2, 0, 2.52, -0.395, 0.193,
         0, 6.29e-3, 0, -1.45, -4.76e-3, -0.135;
    return A;
}

Eigen::MatrixXd a320_longitudinal_B() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 4);
    B(2, 0) = 1.25e-5;
    B(2, 2) = -0.138;
    B(3, 2) = -7.20;
    B(5, 2) = -3.50;
    return B;
}

Eigen::MatrixXd a320_lateral_B() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 4);
    B(1, 1) = 0.487;
    B(1, 3) = 4.59;
    B(4, 1) = 1.08;
    B(4, 3) = 0.418;
    B(5, 1) = -1.82e-2;
    B(5, 3) = -0.960;
    return B;
}

BuiltinModel builtin_a320() {
    BuiltinModel out;
    auto& m = out.model;
    m.A = Eigen::MatrixXd::Zero(12, 12);
    m.B = Eigen::MatrixXd::Zero(12, 4);
    const auto scatter = [&](const std::array<int, 6>& idx, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
        for (int i = 0; i < 6; ++i) {
            m.B.row(idx[i]) = B.row(i);
            for (int j = 0; j < 6; ++j) m.A(idx[i], idx[j]) = A(i, j);
        }
    };
    scatter(kLongitudinal, a320_longitudinal_A(), a320_longitudinal_B());
    scatter(kLateral, a320_lateral_A(), a320_lateral_B());
    m.Cp = position_selector();
    m.Cv = velocity_selector();
    m.Calpha = attitude_selector();

    auto& p = out.params;
    p.mass = 80000.0;
    p.wingspan = 34.1;
    p.mean_chord = 3.6;
    p.cruise_speed = 230.0;
    p.air_density = 0.458;
    p.tail_span = 12.5;
    p.vertical_tail_span = 6.2;
    p.trimmed_thrust = 5.02e4;
    p.zero_lift_drag = 0.03;
    p.wake_circulation = 278.0;
    return out;
}

LtiModel extract_block(const LtiModel& model, std::span<const int> states) {
    const int k = static_cast<int>(states.size());
    LtiModel out;
    out.A.resize(k, k);
    out.B.resize(k, model.B.cols());
    for (int i = 0; i < k; ++i) {
        if (states[i] < 0 || states[i] >= model.states()) throw ConfigError("state index out of range");
        out.B.row(i) = model.B.row(states[i]);
        for (int j = 0; j < k; ++j) out.A(i, j) = model.A(states[i], states[j]);
    }
    return out;
}

RationalTF transfer_function(const LtiModel& model, int input_index, int output_index) {
    model.validate();
    if (input_index < 0 || input_index >= model.inputs() || output_index < 0 || output_index >= model.states())
        throw ConfigError("transfer function channel index out of range");
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(model.states());
    c(output_index) = 1.0;
    return ss_to_tf(model.A, model.B.col(input_index), c);
}

std::vector<cdouble> eigenvalues(const LtiModel& model) { return sorted_eigenvalues(model.A); }

} // namespace formstab

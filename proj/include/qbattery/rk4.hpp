// rk4.hpp: classical fixed-step fourth-order Runge-Kutta step

#pragma once

namespace qbattery {

// State must support State + State and double * State. Rhs is callable as rhs(t, y) -> State.
template <class State, class Rhs>
State rk4_step(const Rhs& rhs, double t, const State& y, double h) {
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
    const State k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
    const State k4 = rhs(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace qbattery

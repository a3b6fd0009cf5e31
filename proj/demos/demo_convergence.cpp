// Runs the model for a few signal speeds and prints how far it lands from
// the Newtonian motion x'' = gamma / (2 x^2) over the same time window.

#include <cstdio>

#include "virtdyn/virtdyn.hpp"

int main()
{
    const double gamma = 1.0, y0 = 1.0, w0 = 0.0, horizon = 1.0;
    std::printf("%8s %14s %14s %14s %14s\n", "c", "sup|y-x|", "sup|w-v|", "c*sup|y-x|", "c*sup|w-v|");
    for (double c : {100.0, 200.0, 400.0, 800.0, 1600.0}) {
        const virtdyn::ModelParams p(c, gamma);
        const auto traj = virtdyn::run(p, y0, w0, virtdyn::horizon_steps(p, horizon));
        const auto ref = virtdyn::solve(gamma, y0, w0, traj.last().t);
        const auto e = virtdyn::sup_error(traj, ref, virtdyn::InterpolationMode::jump, horizon);
        std::printf("%8.0f %14.6e %14.6e %14.6e %14.6e\n", c, e.sup_y, e.sup_w, c * e.sup_y, c * e.sup_w);
    }
    std::printf("terminal velocity sqrt(w0^2 + gamma/y0) = %.6f\n",
                virtdyn::terminal_velocity(gamma, y0, w0));
}

#include "switchgame/value.hpp"

#include "switchgame/errors.hpp"

namespace switchgame {

int ValueGraph::resolve(int i, double x) const {
    int steps = 0;
    for (;;) {
        const ValueNode& n = nodes_[i];
        if (n.up >= 0 && x >= n.s_up) {
            i = n.up;
        } else if (n.down >= 0 && x <= n.s_down) {
            i = n.down;
        } else {
            return i;
        }
        if (++steps > size()) throw CascadeLoop("switching cascade does not terminate");
    }
}

ValueD ValueGraph::eval(int i, double x) const {
    double cost = 0.0, dcost = 0.0;
    int steps = 0;
    for (;;) {
        const ValueNode& n = nodes_[i];
        if (n.up >= 0 && x >= n.s_up) {
            if (n.up_cost) {
                cost += n.up_cost->value(x);
                dcost += n.up_cost->deriv(x);
            }
            i = n.up;
        } else if (n.down >= 0 && x <= n.s_down) {
            if (n.down_cost) {
                cost += n.down_cost->value(x);
                dcost += n.down_cost->deriv(x);
            }
            i = n.down;
        } else {
            break;
        }
        if (++steps > size()) throw CascadeLoop("switching cascade does not terminate");
    }
    const ValueNode& n = nodes_[i];
    double v = n.d - cost, dv = -dcost;
    if (n.omega != 0.0 || n.nu != 0.0) {
        FG f = (*fg_)(x);
        v += n.omega * f.F + n.nu * f.G;
        dv += n.omega * f.dF + n.nu * f.dG;
    }
    return {v, dv};
}

} // namespace switchgame

#pragma once

#include "switchgame/diffusion.hpp"
#include "switchgame/gamespec.hpp"

#include <limits>
#include <vector>

namespace switchgame {

/// One regime's value piece for one player. Inside (s_down, s_up) the value
/// is d + omega F + nu G. At or above s_up the up-neighbour applies (less
/// up_cost), at or below s_down the down-neighbour (less down_cost).
/// The up move is checked first (P1 priority).
struct ValueNode {
    double d = 0.0;
    double omega = 0.0;
    double nu = 0.0;
    double s_up = std::numeric_limits<double>::infinity();
    double s_down = -std::numeric_limits<double>::infinity();
    int up = -1;
    int down = -1;
    const CostFunction* up_cost = nullptr;
    const CostFunction* down_cost = nullptr;
};

/// Piecewise value functions linked through switching regions; evaluation
/// follows switch cascades and sums the costs paid along the way.
class ValueGraph {
public:
    explicit ValueGraph(const Fundamentals& fg) : fg_(&fg) {}

    int add(const ValueNode& n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }
    ValueNode& node(int i) { return nodes_[i]; }
    const ValueNode& node(int i) const { return nodes_[i]; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const Fundamentals& fundamentals() const { return *fg_; }

    /// Value and derivative of node i at x. Throws CascadeLoop if a cascade
    /// does not terminate.
    ValueD eval(int i, double x) const;
    /// Node whose continuation piece applies at x, starting from node i.
    int resolve(int i, double x) const;

private:
    const Fundamentals* fg_;
    std::vector<ValueNode> nodes_;
};

} // namespace switchgame

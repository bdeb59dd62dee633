#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "seats/errors.hpp"
#include "seats/types.hpp"

namespace seats {

/// UCT score of a child under its parent (exploitation + exploration).
/// In-flight nodes (visits == 0) have no defined score and must be
/// excluded by the caller.
inline double uct_score(double child_value, int child_visits, int parent_visits, double c) {
    if (child_visits <= 0) throw InvariantViolation("uct_score: child_visits must be >= 1");
    if (parent_visits < child_visits) throw InvariantViolation("uct_score: parent_visits < child_visits");
    return child_value / child_visits + c * std::sqrt(std::log(static_cast<double>(parent_visits)) / child_visits);
}

/// Solution tree with UCT selection and inclusive-path backpropagation.
/// Node 0 is always the root (the reference implementation).
class Tree {
  public:
    explicit Tree(int max_children = 5) : max_children_(max_children) {
        if (max_children_ < 1) throw InvariantViolation("tree: max_children must be positive");
    }

    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }
    int max_children() const { return max_children_; }
    NodeId root_id() const { return 0; }
    NodeId next_id() const { return static_cast<NodeId>(nodes_.size()); }

    const SolutionNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    SolutionNode& node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
    const std::vector<SolutionNode>& nodes() const { return nodes_; }

    /// Creates a node with the next id. The first created node is the root
    /// and must have no parent; every later node needs an existing parent.
    NodeId create_node(std::optional<NodeId> parent_id, std::string code, std::string plan,
                       BehaviorDescriptor descriptor, int created_at_iteration) {
        NodeId id = next_id();
        if (id == 0) {
            if (parent_id) throw InvariantViolation("tree: root must have no parent");
        } else {
            if (!parent_id) throw InvariantViolation("tree: non-root node needs a parent");
            if (*parent_id < 0 || *parent_id >= id) throw InvariantViolation("tree: parent_id must reference an earlier node");
        }
        SolutionNode n;
        n.id = id;
        n.parent_id = parent_id;
        n.code = std::move(code);
        n.plan = std::move(plan);
        n.descriptor = descriptor;
        n.created_at_iteration = created_at_iteration;
        nodes_.push_back(std::move(n));
        if (parent_id) nodes_[static_cast<std::size_t>(*parent_id)].children.push_back(id);
        return id;
    }

    /// Descends from the root and returns the first node that still has
    /// room for a child; fully expanded nodes descend into the child with
    /// the highest UCT score (ties broken by lowest child id).
    NodeId select_expansion_target(double c) const {
        if (nodes_.empty()) throw InvariantViolation("tree: selection on empty tree");
        NodeId cur = root_id();
        for (;;) {
            const SolutionNode& n = nodes_[static_cast<std::size_t>(cur)];
            if (static_cast<int>(n.children.size()) < max_children_) return cur;
            NodeId best = -1;
            double best_score = -std::numeric_limits<double>::infinity();
            for (NodeId child_id : n.children) {
                const SolutionNode& child = nodes_[static_cast<std::size_t>(child_id)];
                if (child.visits == 0) continue; // in-flight, not scoreable
                double s = uct_score(child.value, child.visits, n.visits, c);
                if (s > best_score) {
                    best_score = s;
                    best = child_id;
                }
            }
            if (best < 0) return cur; // every child in flight; expand here is not possible, but cap check above already failed
            cur = best;
        }
    }

    /// Adds `reward` to every node on the inclusive path node -> root and
    /// increments their visit counts. Returns the path in application
    /// order. A node's own reward can be backpropagated only once.
    std::vector<NodeId> backpropagate(NodeId node_id, double reward) {
        SolutionNode& target = node(node_id);
        if (target.rewarded) throw InvariantViolation("tree: node " + std::to_string(node_id) + " already backpropagated");
        target.rewarded = true;
        std::vector<NodeId> path;
        std::optional<NodeId> cur = node_id;
        while (cur) {
            SolutionNode& n = node(*cur);
            n.value += reward;
            n.visits += 1;
            path.push_back(*cur);
            cur = n.parent_id;
        }
        return path;
    }

    /// Pessimistic placeholder visit for an in-flight expansion target so
    /// that concurrent selections diverge; reverted before the real reward
    /// is backpropagated.
    void apply_virtual_visit(NodeId id) {
        SolutionNode& n = node(id);
        n.visits += 1;
        n.value += -1.0;
    }

    void revert_virtual_visit(NodeId id) {
        SolutionNode& n = node(id);
        if (n.visits <= 0) throw InvariantViolation("tree: revert_virtual_visit underflow");
        n.visits -= 1;
        n.value -= -1.0;
    }

  private:
    std::vector<SolutionNode> nodes_;
    int max_children_;
};

} // namespace seats

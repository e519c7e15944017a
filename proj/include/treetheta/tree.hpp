#pragma once

// Paired tree-shaped data: two series (x and y) observed on the nodes of a
// common rooted tree. Generations are recomputed from the parent links
// (root = generation 1), never trusted from input. A tree where every node
// carries exactly one observation is in "unit-series form"; trees with
// longer per-node series are reduced to that form by expanding each node
// into a chain of single-observation nodes.

#include <cstddef>
#include <string>
#include <vector>

#include "treetheta/errors.hpp"

namespace treetheta {

struct TreeNode {
    std::string id;
    std::string parent_id;  // empty for the root
    std::vector<double> x;  // observation series, length >= 1
    std::vector<double> y;  // same length as x
};

struct PairedTree {
    std::vector<TreeNode> nodes;  // input order is preserved everywhere
    double anchor_x = 0.0;        // fixed pre-root point the root grows from
    double anchor_y = 0.0;
};

struct Violation {
    std::string node_id;  // empty when the problem is tree-wide
    std::string rule;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Structural checks: unique ids, exactly one root, known parents, no
// cycles, non-empty series, x/y series of equal length per node.
ValidationReport validate(const PairedTree& tree);

// Generation per node (parallel to tree.nodes, 1-based; root = 1).
// Throws DataError when the tree fails validation.
std::vector<int> node_generations(const PairedTree& tree);

// Expand every node with a series of length T into a chain of T
// single-observation nodes (k-th chain node holds the k-th observation;
// children reattach to the last chain node). A tree already in unit-series
// form comes back identical.
PairedTree expand_to_unit_series(const PairedTree& tree);

struct IncrementPair {
    double dx = 0.0;
    double dy = 0.0;
};

struct GenerationIncrements {
    // by_generation[0] holds generation 1 (the root's step from the anchor).
    std::vector<std::vector<IncrementPair>> by_generation;

    int max_generation() const { return static_cast<int>(by_generation.size()); }
    std::size_t total() const;
};

// Per-node increment relative to the parent's value (anchor for the root),
// grouped by generation, node input order preserved within a generation.
// Requires unit-series form.
GenerationIncrements extract_increments(const PairedTree& tree);

}  // namespace treetheta

#include "treetheta/tree.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "treetheta/errors.hpp"

namespace treetheta {

namespace {

// id -> index map; reports duplicates instead of throwing so validation can
// collect every problem in one pass.
std::unordered_map<std::string, std::size_t> index_nodes(
    const PairedTree& tree, ValidationReport* report) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& node = tree.nodes[i];
        if (node.id.empty()) {
            if (report) report->violations.push_back({node.id, "empty node id"});
            continue;
        }
        if (!index.emplace(node.id, i).second && report)
            report->violations.push_back({node.id, "duplicate node id"});
    }
    return index;
}

}  // namespace

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        if (!out.view().empty()) out << "; ";
        out << (v.node_id.empty() ? std::string("<unnamed>") : v.node_id) << ": "
            << v.rule;
    }
    return std::move(out).str();
}

ValidationReport validate(const PairedTree& tree) {
    ValidationReport report;
    if (tree.nodes.empty()) {
        report.violations.push_back({"", "tree has no nodes"});
        return report;
    }
    const auto index = index_nodes(tree, &report);

    std::size_t roots = 0;
    for (const auto& node : tree.nodes) {
        if (node.parent_id.empty()) {
            ++roots;
            continue;
        }
        if (!index.count(node.parent_id))
            report.violations.push_back(
                {node.id, "unknown parent '" + node.parent_id + "'"});
        else if (node.parent_id == node.id)
            report.violations.push_back({node.id, "node is its own parent"});
    }
    if (roots == 0) report.violations.push_back({"", "no root node"});
    if (roots > 1) report.violations.push_back({"", "multiple root nodes"});

    for (const auto& node : tree.nodes) {
        if (node.x.empty())
            report.violations.push_back({node.id, "empty observation series"});
        if (node.x.size() != node.y.size())
            report.violations.push_back(
                {node.id, "x and y series lengths differ"});
    }

    // Walk each parent chain; revisiting a node means a cycle.
    if (roots == 1) {
        for (const auto& node : tree.nodes) {
            std::unordered_set<std::string> seen;
            const TreeNode* cur = &node;
            while (!cur->parent_id.empty()) {
                if (!seen.insert(cur->id).second) {
                    report.violations.push_back({node.id, "parent cycle"});
                    break;
                }
                const auto it = index.find(cur->parent_id);
                if (it == index.end()) break;
                cur = &tree.nodes[it->second];
            }
        }
    }
    return report;
}

std::vector<int> node_generations(const PairedTree& tree) {
    const auto report = validate(tree);
    if (!report.ok()) throw DataError("invalid tree: " + report.to_string());

    const auto index = index_nodes(tree, nullptr);
    std::vector<int> gen(tree.nodes.size(), 0);
    // Memoized depth walk; validation already ruled out cycles.
    const auto depth_of = [&](std::size_t i, const auto& self) -> int {
        if (gen[i] != 0) return gen[i];
        const auto& node = tree.nodes[i];
        if (node.parent_id.empty()) return gen[i] = 1;
        return gen[i] = self(index.at(node.parent_id), self) + 1;
    };
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) depth_of(i, depth_of);
    return gen;
}

PairedTree expand_to_unit_series(const PairedTree& tree) {
    const auto report = validate(tree);
    if (!report.ok()) throw DataError("invalid tree: " + report.to_string());

    PairedTree out;
    out.anchor_x = tree.anchor_x;
    out.anchor_y = tree.anchor_y;
    out.nodes.reserve(tree.nodes.size());

    // Nodes with a k-observation series become a k-link chain; children of
    // the original node hang off the last link so every parent-child step
    // still spans consecutive observations.
    std::unordered_map<std::string, std::string> tail_id;
    tail_id.reserve(tree.nodes.size());
    for (const auto& node : tree.nodes) {
        tail_id[node.id] = node.x.size() == 1
                               ? node.id
                               : node.id + "#" + std::to_string(node.x.size());
    }
    for (const auto& node : tree.nodes) {
        const std::string parent_tail =
            node.parent_id.empty() ? std::string() : tail_id.at(node.parent_id);
        if (node.x.size() == 1) {
            out.nodes.push_back({node.id, parent_tail, node.x, node.y});
            continue;
        }
        std::string prev = parent_tail;
        for (std::size_t k = 0; k < node.x.size(); ++k) {
            const std::string id = node.id + "#" + std::to_string(k + 1);
            out.nodes.push_back({id, prev, {node.x[k]}, {node.y[k]}});
            prev = id;
        }
    }
    return out;
}

GenerationIncrements extract_increments(const PairedTree& tree) {
    const auto gens = node_generations(tree);
    for (const auto& node : tree.nodes) {
        if (node.x.size() != 1)
            throw DataError("node '" + node.id +
                            "' holds a series; expand to unit form first");
    }
    const auto index = index_nodes(tree, nullptr);
    GenerationIncrements out;
    const int max_gen = *std::max_element(gens.begin(), gens.end());
    out.by_generation.resize(static_cast<std::size_t>(max_gen));
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& node = tree.nodes[i];
        double px = tree.anchor_x;
        double py = tree.anchor_y;
        if (!node.parent_id.empty()) {
            const auto& parent = tree.nodes[index.at(node.parent_id)];
            px = parent.x[0];
            py = parent.y[0];
        }
        out.by_generation[static_cast<std::size_t>(gens[i] - 1)].push_back(
            {node.x[0] - px, node.y[0] - py});
    }
    return out;
}

std::size_t GenerationIncrements::total() const {
    std::size_t n = 0;
    for (const auto& g : by_generation) n += g.size();
    return n;
}

}  // namespace treetheta

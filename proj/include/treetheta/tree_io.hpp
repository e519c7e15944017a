#pragma once

// Text format for paired tree data, one file per (x, y) pair:
//
//   # free comment lines start with '#'
//   #anchor<TAB>x0<TAB>y0
//   node_id<TAB>parent_id<TAB>x<TAB>y
//   n1<TAB>-<TAB>1.5<TAB>2.5
//   n2<TAB>n1<TAB>0.25,0.5<TAB>1,2
//
// Tab-separated columns; x and y are comma-separated series of equal
// length; the root's parent is "-". A missing #anchor line means (0, 0).
// Values are written with 17 significant digits, so serialize -> parse ->
// serialize is byte-identical.

#include <string>

#include "treetheta/tree.hpp"

namespace treetheta {

// Parses and validates; throws ParseError (with line number) on malformed
// text and DataError when the parsed tree fails validation.
PairedTree parse_paired_tree(const std::string& text);

std::string serialize_paired_tree(const PairedTree& tree);

PairedTree load_paired_tree(const std::string& path);
void save_paired_tree(const PairedTree& tree, const std::string& path);

}  // namespace treetheta

#include "treetheta/tree_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace treetheta {

namespace {

constexpr std::string_view kHeader = "node_id\tparent_id\tx\ty";
constexpr std::string_view kAnchorPrefix = "#anchor\t";

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

double parse_double(std::string_view field, int line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError(line, "bad number '" + std::string(field) + "'");
    return v;
}

std::vector<double> parse_series(std::string_view field, int line) {
    if (field.empty()) throw ParseError(line, "empty series field");
    std::vector<double> out;
    for (const auto part : split(field, ','))
        out.push_back(parse_double(part, line));
    return out;
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void check_id_serializable(const std::string& id) {
    const bool bad = id.empty() || id == "-" || id.front() == '#' ||
                     id.find_first_of("\t\r\n") != std::string::npos;
    if (bad)
        throw DataError("node id '" + id + "' cannot be written to the text format");
}

}  // namespace

PairedTree parse_paired_tree(const std::string& text) {
    PairedTree tree;
    bool saw_anchor = false;
    bool saw_header = false;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (line.front() == '#') {
            if (line.substr(0, kAnchorPrefix.size()) == kAnchorPrefix) {
                if (saw_anchor) throw ParseError(line_no, "duplicate anchor line");
                const auto fields =
                    split(line.substr(kAnchorPrefix.size()), '\t');
                if (fields.size() != 2)
                    throw ParseError(line_no, "anchor needs exactly two values");
                tree.anchor_x = parse_double(fields[0], line_no);
                tree.anchor_y = parse_double(fields[1], line_no);
                saw_anchor = true;
            }
            continue;  // plain comment
        }

        if (!saw_header) {
            if (line != kHeader)
                throw ParseError(line_no,
                                 "expected header 'node_id<TAB>parent_id<TAB>x<TAB>y'");
            saw_header = true;
            continue;
        }

        const auto fields = split(line, '\t');
        if (fields.size() != 4)
            throw ParseError(line_no, "expected 4 tab-separated fields");
        if (fields[0].empty() || fields[0] == "-")
            throw ParseError(line_no, "invalid node id");
        if (fields[1].empty())
            throw ParseError(line_no, "empty parent field (use '-' for the root)");
        TreeNode node;
        node.id = std::string(fields[0]);
        node.parent_id = fields[1] == "-" ? std::string() : std::string(fields[1]);
        node.x = parse_series(fields[2], line_no);
        node.y = parse_series(fields[3], line_no);
        tree.nodes.push_back(std::move(node));
    }

    if (!saw_header) throw ParseError(line_no, "missing header line");
    const ValidationReport report = validate(tree);
    if (!report.ok()) throw DataError("invalid tree: " + report.to_string());
    return tree;
}

std::string serialize_paired_tree(const PairedTree& tree) {
    std::string out;
    out += "#anchor\t";
    format_double(out, tree.anchor_x);
    out += '\t';
    format_double(out, tree.anchor_y);
    out += '\n';
    out += kHeader;
    out += '\n';
    for (const auto& node : tree.nodes) {
        check_id_serializable(node.id);
        if (!node.parent_id.empty()) check_id_serializable(node.parent_id);
        out += node.id;
        out += '\t';
        out += node.parent_id.empty() ? "-" : node.parent_id;
        out += '\t';
        for (std::size_t k = 0; k < node.x.size(); ++k) {
            if (k) out += ',';
            format_double(out, node.x[k]);
        }
        out += '\t';
        for (std::size_t k = 0; k < node.y.size(); ++k) {
            if (k) out += ',';
            format_double(out, node.y[k]);
        }
        out += '\n';
    }
    return out;
}

PairedTree load_paired_tree(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_paired_tree(buf.str());
}

void save_paired_tree(const PairedTree& tree, const std::string& path) {
    const std::string text = serialize_paired_tree(tree);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw DataError("failed writing file: " + path);
}

}  // namespace treetheta

#include "formats.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace storval {

namespace {

// One significant line of a storval-* file, split into a keyword and either
// positional words or key=value fields.
struct Record {
    int line = 0;
    std::string keyword;
    std::vector<std::string> words;
};

std::vector<Record> tokenize(std::string_view text) {
    std::vector<Record> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::istringstream words{std::string(line)};
        Record r;
        r.line = line_no;
        if (!(words >> r.keyword)) {
            if (end == text.size()) break;
            continue;
        }
        for (std::string w; words >> w;) r.words.push_back(w);
        out.push_back(std::move(r));
        if (end == text.size()) break;
    }
    return out;
}

class FieldReader {
public:
    FieldReader(const std::string& source, const Record& record,
                std::initializer_list<std::string_view> allowed)
        : source_(source), record_(record) {
        for (const std::string& w : record.words) {
            const auto eq = w.find('=');
            if (eq == std::string::npos || eq == 0)
                fail("expected key=value, got '" + w + "'");
            std::string key = w.substr(0, eq);
            bool known = false;
            for (std::string_view a : allowed) known = known || a == key;
            if (!known) fail("unknown field '" + key + "' in " + record.keyword + " record");
            if (!fields_.emplace(key, w.substr(eq + 1)).second) fail("duplicate field '" + key + "'");
        }
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, record_.line, what); }

    bool has(const std::string& key) const { return fields_.count(key) != 0; }

    const std::string& text(const std::string& key) const {
        auto it = fields_.find(key);
        if (it == fields_.end()) fail("missing field '" + key + "' in " + record_.keyword + " record");
        return it->second;
    }

    double number(const std::string& key) const { return parse_number(text(key), key); }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    long integer(const std::string& key) const {
        const std::string& s = text(key);
        long v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) fail("field '" + key + "' is not an integer: '" + s + "'");
        return v;
    }

    Vector vector(const std::string& key) const {
        const std::string& s = text(key);
        std::vector<double> values;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = s.find(',', start);
            values.push_back(parse_number(s.substr(start, comma - start), key));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }

private:
    double parse_number(const std::string& s, const std::string& key) const {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            fail("field '" + key + "' is not a number: '" + s + "'");
        return v;
    }

    const std::string& source_;
    const Record& record_;
    std::map<std::string, std::string> fields_;
};

std::size_t positional_count(const std::string& source, const Record& r) {
    if (r.words.size() != 1) throw ParseError(source, r.line, "'" + r.keyword + "' takes exactly one value");
    const std::string& s = r.words[0];
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0)
        throw ParseError(source, r.line, "'" + r.keyword + "' must be a positive integer");
    return v;
}

void expect_schema(const std::string& source, const std::vector<Record>& records, std::string_view schema) {
    if (records.empty()) throw ParseError(source, 1, "empty file, expected 'schema " + std::string(schema) + "'");
    const Record& r = records.front();
    if (r.keyword != "schema" || r.words.size() != 1 || r.words[0] != schema)
        throw ParseError(source, r.line, "expected 'schema " + std::string(schema) + "' as the first record");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Network parse_network(std::string_view text, const std::string& source) {
    const std::vector<Record> records = tokenize(text);
    expect_schema(source, records, kNetworkSchema);

    Network net;
    std::vector<bool> seen;
    for (std::size_t k = 1; k < records.size(); ++k) {
        const Record& r = records[k];
        if (r.keyword == "nodes") {
            if (net.node_count) throw ParseError(source, r.line, "'nodes' given twice");
            net.node_count = positional_count(source, r);
            net.alpha.assign(net.node_count, 0.0);
            net.beta.assign(net.node_count, 0.0);
            net.shunt_susceptances.assign(net.node_count, 0.0);
            seen.assign(net.node_count, false);
        } else if (r.keyword == "node") {
            FieldReader f(source, r, {"id", "alpha", "beta", "shunt"});
            if (!net.node_count) f.fail("'nodes' must precede node records");
            const long id = f.integer("id");
            if (id < 1 || static_cast<std::size_t>(id) > net.node_count) f.fail("node id out of range");
            const auto i = static_cast<std::size_t>(id - 1);
            if (seen[i]) f.fail("node " + std::to_string(id) + " defined twice");
            seen[i] = true;
            net.alpha[i] = f.number("alpha");
            net.beta[i] = f.number("beta");
            net.shunt_susceptances[i] = f.number_or("shunt", 0.0);
        } else if (r.keyword == "line") {
            FieldReader f(source, r, {"from", "to", "susceptance", "capacity"});
            if (!net.node_count) f.fail("'nodes' must precede line records");
            const long from = f.integer("from"), to = f.integer("to");
            if (from < 1 || to < 1 || static_cast<std::size_t>(from) > net.node_count ||
                static_cast<std::size_t>(to) > net.node_count)
                f.fail("line endpoint out of range");
            net.lines.push_back({static_cast<std::size_t>(from - 1), static_cast<std::size_t>(to - 1),
                                 f.number("susceptance"), f.number("capacity")});
        } else {
            throw ParseError(source, r.line, "unknown record '" + r.keyword + "'");
        }
    }
    if (!net.node_count) throw ParseError(source, records.back().line, "missing 'nodes' record");
    for (std::size_t i = 0; i < net.node_count; ++i)
        if (!seen[i]) throw ParseError(source, records.back().line, "node " + std::to_string(i + 1) + " not defined");
    try {
        net.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(source, records.back().line, e.what());
    }
    return net;
}

ScenarioTree parse_tree(std::string_view text, const std::string& source, std::size_t node_budget) {
    const std::vector<Record> records = tokenize(text);
    expect_schema(source, records, kTreeSchema);

    std::size_t horizon = 0, dimension = 0;
    std::vector<NodeRecord> nodes;
    for (std::size_t k = 1; k < records.size(); ++k) {
        const Record& r = records[k];
        if (r.keyword == "horizon") {
            if (horizon) throw ParseError(source, r.line, "'horizon' given twice");
            horizon = positional_count(source, r);
        } else if (r.keyword == "dimension") {
            if (dimension) throw ParseError(source, r.line, "'dimension' given twice");
            dimension = positional_count(source, r);
        } else if (r.keyword == "node") {
            FieldReader f(source, r, {"id", "stage", "parent", "prob", "xi"});
            if (!horizon || !dimension) f.fail("'horizon' and 'dimension' must precede node records");
            if (nodes.size() >= node_budget)
                throw BudgetExceeded(source + ": scenario tree exceeds node budget of " + std::to_string(node_budget));
            NodeRecord n;
            n.id = f.integer("id");
            const long stage = f.integer("stage");
            if (stage < 0) f.fail("stage must be >= 0");
            n.stage = static_cast<std::size_t>(stage);
            if (f.text("parent") != "-") n.parent = f.integer("parent");
            n.probability = f.number("prob");
            n.xi = f.vector("xi");
            if (static_cast<std::size_t>(n.xi.size()) != dimension)
                f.fail("xi has " + std::to_string(n.xi.size()) + " entries, expected " + std::to_string(dimension));
            nodes.push_back(std::move(n));
        } else {
            throw ParseError(source, r.line, "unknown record '" + r.keyword + "'");
        }
    }
    const int last = records.back().line;
    if (!horizon) throw ParseError(source, last, "missing 'horizon' record");
    if (!dimension) throw ParseError(source, last, "missing 'dimension' record");
    try {
        return ScenarioTree::from_records(horizon, dimension, std::move(nodes), node_budget);
    } catch (const InvalidInput& e) {
        throw ParseError(source, last, e.what());
    }
}

Network load_network(const std::string& path) { return parse_network(read_file(path), path); }

ScenarioTree load_tree(const std::string& path, std::size_t node_budget) {
    return parse_tree(read_file(path), path, node_budget);
}

std::string format_network(const Network& net) {
    std::ostringstream out;
    out << "schema " << kNetworkSchema << "\n";
    out << "nodes " << net.node_count << "\n";
    for (std::size_t i = 0; i < net.node_count; ++i)
        out << "node id=" << i + 1 << " alpha=" << format_double(net.alpha[i]) << " beta="
            << format_double(net.beta[i]) << " shunt=" << format_double(net.shunt_susceptances[i]) << "\n";
    for (const Line& l : net.lines)
        out << "line from=" << l.from + 1 << " to=" << l.to + 1 << " susceptance=" << format_double(l.susceptance)
            << " capacity=" << format_double(l.capacity) << "\n";
    return out.str();
}

std::string format_tree(const ScenarioTree& tree) {
    std::ostringstream out;
    out << "schema " << kTreeSchema << "\n";
    out << "horizon " << tree.horizon() << "\n";
    out << "dimension " << tree.dimension() << "\n";
    for (const TreeNode& n : tree.nodes()) {
        out << "node id=" << n.id << " stage=" << n.stage << " parent=";
        if (n.parent)
            out << tree.node(*n.parent).id;
        else
            out << "-";
        out << " prob=" << format_double(n.probability) << " xi=";
        for (Eigen::Index i = 0; i < n.xi.size(); ++i) out << (i ? "," : "") << format_double(n.xi(i));
        out << "\n";
    }
    return out.str();
}

}  // namespace storval

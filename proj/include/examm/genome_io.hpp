#pragma once

// Genome files: a versioned little-endian binary container ("EXMG"), a JSON
// debugging export and a Graphviz DOT rendering.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "examm/genome.hpp"

namespace examm {

class DecodeError : public std::runtime_error {
  public:
    DecodeError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

inline constexpr std::uint32_t kGenomeFormatVersion = 1;

namespace detail {

constexpr std::uint32_t tag(const char (&s)[5]) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

inline constexpr std::uint32_t kMetaTag = tag("META");
inline constexpr std::uint32_t kNodeTag = tag("NODE");
inline constexpr std::uint32_t kEdgeTag = tag("EDGE");
inline constexpr std::uint32_t kRecTag = tag("RECE");
inline constexpr std::uint32_t kBindTag = tag("BIND");

class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    void bytes(const std::vector<std::uint8_t>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void section(std::uint32_t t, const ByteWriter& body) {
        u32(t);
        u64(body.buf_.size());
        bytes(body.buf_);
    }
    std::vector<std::uint8_t>& data() { return buf_; }

  private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
  public:
    ByteReader(const std::vector<std::uint8_t>& buf, std::size_t begin, std::size_t end)
        : buf_(buf), pos_(begin), end_(end) {}

    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == end_; }

    void need(std::size_t n, const char* what) const {
        if (end_ - pos_ < n) throw DecodeError(std::string("truncated ") + what, pos_);
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return buf_[pos_++];
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
        return v;
    }
    std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
    std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string str(const char* what) {
        const std::uint32_t n = u32(what);
        need(n, what);
        std::string s(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    // Guards count fields against absurd values before allocating.
    std::uint32_t count(const char* what, std::size_t min_item_bytes) {
        const std::size_t at = pos_;
        const std::uint32_t n = u32(what);
        if (min_item_bytes > 0 && n > (end_ - pos_) / min_item_bytes)
            throw DecodeError(std::string("count exceeds section size for ") + what, at);
        return n;
    }

  private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_;
    std::size_t end_;
};

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const Genome& g) {
    using detail::ByteWriter;
    ByteWriter out;
    out.bytes({'E', 'X', 'M', 'G'});
    out.u32(kGenomeFormatVersion);

    ByteWriter meta;
    meta.f64(g.fitness);
    meta.i32(g.island);
    meta.i64(g.generation_id);
    meta.str(g.lineage.op);
    meta.u32(static_cast<std::uint32_t>(g.lineage.parents.size()));
    for (GenomeId p : g.lineage.parents) meta.i64(p);
    out.section(detail::kMetaTag, meta);

    ByteWriter nodes;
    nodes.u32(static_cast<std::uint32_t>(g.nodes.size()));
    for (const Node& n : g.nodes) {
        nodes.i32(n.innovation);
        nodes.u8(static_cast<std::uint8_t>(n.role));
        nodes.u8(static_cast<std::uint8_t>(n.cell));
        nodes.f64(n.depth);
        nodes.u8(n.enabled ? 1 : 0);
        nodes.i32(n.slot);
        nodes.u32(static_cast<std::uint32_t>(n.params.size()));
        for (double p : n.params) nodes.f64(p);
    }
    out.section(detail::kNodeTag, nodes);

    ByteWriter edges;
    edges.u32(static_cast<std::uint32_t>(g.edges.size()));
    for (const Edge& e : g.edges) {
        edges.i32(e.innovation);
        edges.i32(e.from);
        edges.i32(e.to);
        edges.f64(e.weight);
        edges.u8(e.enabled ? 1 : 0);
    }
    out.section(detail::kEdgeTag, edges);

    ByteWriter recs;
    recs.u32(static_cast<std::uint32_t>(g.rec_edges.size()));
    for (const RecurrentEdge& e : g.rec_edges) {
        recs.i32(e.innovation);
        recs.i32(e.from);
        recs.i32(e.to);
        recs.i32(e.time_skip);
        recs.f64(e.weight);
        recs.u8(e.enabled ? 1 : 0);
    }
    out.section(detail::kRecTag, recs);

    ByteWriter bind;
    bind.u32(static_cast<std::uint32_t>(g.binding.inputs.size()));
    for (const auto& s : g.binding.inputs) bind.str(s);
    bind.u32(static_cast<std::uint32_t>(g.binding.outputs.size()));
    for (const auto& s : g.binding.outputs) bind.str(s);
    bind.u32(static_cast<std::uint32_t>(g.binding.scaling.size()));
    for (const auto& c : g.binding.scaling) {
        bind.str(c.column);
        bind.f64(c.min);
        bind.f64(c.max);
    }
    out.section(detail::kBindTag, bind);
    return std::move(out.data());
}

inline Genome deserialize(const std::vector<std::uint8_t>& bytes) {
    using detail::ByteReader;
    if (bytes.size() < 8) throw DecodeError("truncated header", bytes.size());
    if (!(bytes[0] == 'E' && bytes[1] == 'X' && bytes[2] == 'M' && bytes[3] == 'G'))
        throw DecodeError("bad magic", 0);
    ByteReader head(bytes, 4, bytes.size());
    const std::uint32_t version = head.u32("version");
    if (version != kGenomeFormatVersion)
        throw DecodeError("unsupported genome format version " + std::to_string(version), 4);

    Genome g;
    bool seen_meta = false, seen_nodes = false, seen_edges = false, seen_recs = false, seen_bind = false;
    std::size_t pos = 8;
    while (pos < bytes.size()) {
        ByteReader hdr(bytes, pos, bytes.size());
        const std::uint32_t t = hdr.u32("section tag");
        const std::uint64_t len = hdr.u64("section length");
        const std::size_t body = hdr.pos();
        if (len > bytes.size() - body) throw DecodeError("truncated section", body);
        const std::size_t end = body + static_cast<std::size_t>(len);
        ByteReader r(bytes, body, end);

        if (t == detail::kMetaTag) {
            g.fitness = r.f64("fitness");
            g.island = r.i32("island");
            g.generation_id = r.i64("generation id");
            g.lineage.op = r.str("lineage op");
            const auto n = r.count("lineage parents", 8);
            for (std::uint32_t i = 0; i < n; ++i) g.lineage.parents.push_back(r.i64("parent id"));
            seen_meta = true;
        } else if (t == detail::kNodeTag) {
            const auto n = r.count("nodes", 23);
            g.nodes.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                Node node;
                node.innovation = r.i32("node innovation");
                const std::size_t role_at = r.pos();
                const std::uint8_t role = r.u8("node role");
                if (role > 2) throw DecodeError("invalid node role", role_at);
                node.role = static_cast<NodeRole>(role);
                const std::size_t cell_at = r.pos();
                const std::uint8_t cell = r.u8("cell kind");
                if (cell > static_cast<std::uint8_t>(CellKind::ugrnn))
                    throw DecodeError("invalid cell kind", cell_at);
                node.cell = static_cast<CellKind>(cell);
                node.depth = r.f64("node depth");
                node.enabled = r.u8("node enabled") != 0;
                node.slot = r.i32("node slot");
                const auto np = r.count("node params", 8);
                node.params.reserve(np);
                for (std::uint32_t k = 0; k < np; ++k) node.params.push_back(r.f64("node param"));
                g.nodes.push_back(std::move(node));
            }
            seen_nodes = true;
        } else if (t == detail::kEdgeTag) {
            const auto n = r.count("edges", 21);
            g.edges.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                Edge e;
                e.innovation = r.i32("edge innovation");
                e.from = r.i32("edge from");
                e.to = r.i32("edge to");
                e.weight = r.f64("edge weight");
                e.enabled = r.u8("edge enabled") != 0;
                g.edges.push_back(e);
            }
            seen_edges = true;
        } else if (t == detail::kRecTag) {
            const auto n = r.count("recurrent edges", 25);
            g.rec_edges.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                RecurrentEdge e;
                e.innovation = r.i32("recurrent edge innovation");
                e.from = r.i32("recurrent edge from");
                e.to = r.i32("recurrent edge to");
                e.time_skip = r.i32("time skip");
                e.weight = r.f64("recurrent edge weight");
                e.enabled = r.u8("recurrent edge enabled") != 0;
                g.rec_edges.push_back(e);
            }
            seen_recs = true;
        } else if (t == detail::kBindTag) {
            const auto ni = r.count("input names", 4);
            for (std::uint32_t i = 0; i < ni; ++i) g.binding.inputs.push_back(r.str("input name"));
            const auto no = r.count("output names", 4);
            for (std::uint32_t i = 0; i < no; ++i) g.binding.outputs.push_back(r.str("output name"));
            const auto ns = r.count("scaling", 20);
            for (std::uint32_t i = 0; i < ns; ++i) {
                ColumnRange c;
                c.column = r.str("scaling column");
                c.min = r.f64("scaling min");
                c.max = r.f64("scaling max");
                g.binding.scaling.push_back(std::move(c));
            }
            seen_bind = true;
        }
        // Unknown sections are skipped so later versions can append data.
        if (t != detail::kMetaTag && t != detail::kNodeTag && t != detail::kEdgeTag &&
            t != detail::kRecTag && t != detail::kBindTag) {
            pos = end;
            continue;
        }
        if (!r.done()) throw DecodeError("trailing bytes in section", r.pos());
        pos = end;
    }
    if (!seen_meta || !seen_nodes || !seen_edges || !seen_recs || !seen_bind)
        throw DecodeError("missing required section", bytes.size());
    return g;
}

inline void save_genome(const Genome& g, const std::string& path) {
    const auto bytes = serialize(g);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Genome load_genome(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

inline nlohmann::json to_json(const Genome& g) {
    using nlohmann::json;
    json j;
    j["format_version"] = kGenomeFormatVersion;
    j["fitness"] = std::isfinite(g.fitness) ? json(g.fitness) : json(nullptr);
    j["island"] = g.island;
    j["generation_id"] = g.generation_id;
    j["lineage"] = {{"op", g.lineage.op}, {"parents", g.lineage.parents}};
    j["nodes"] = json::array();
    for (const Node& n : g.nodes) {
        json params = json::object();
        if (n.role != NodeRole::input) {
            const auto names = param_names(n.cell);
            for (std::size_t i = 0; i < n.params.size() && i < names.size(); ++i)
                params[std::string(names[i])] = n.params[i];
        }
        j["nodes"].push_back({{"innovation", n.innovation},
                              {"role", to_string(n.role)},
                              {"cell", to_string(n.cell)},
                              {"depth", n.depth},
                              {"enabled", n.enabled},
                              {"slot", n.slot},
                              {"params", params}});
    }
    j["edges"] = json::array();
    for (const Edge& e : g.edges)
        j["edges"].push_back({{"innovation", e.innovation},
                              {"from", e.from},
                              {"to", e.to},
                              {"weight", e.weight},
                              {"enabled", e.enabled}});
    j["recurrent_edges"] = json::array();
    for (const RecurrentEdge& e : g.rec_edges)
        j["recurrent_edges"].push_back({{"innovation", e.innovation},
                                        {"from", e.from},
                                        {"to", e.to},
                                        {"time_skip", e.time_skip},
                                        {"weight", e.weight},
                                        {"enabled", e.enabled}});
    j["binding"] = {{"inputs", g.binding.inputs}, {"outputs", g.binding.outputs}};
    j["binding"]["scaling"] = json::array();
    for (const auto& c : g.binding.scaling)
        j["binding"]["scaling"].push_back({{"column", c.column}, {"min", c.min}, {"max", c.max}});
    return j;
}

/// Graphviz rendering. Disabled elements are grey and dashed; recurrent edges
/// are dotted and labelled with their time skip.
inline std::string export_dot(const Genome& g) {
    std::ostringstream out;
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    auto node_label = [&](const Node& n) {
        std::string label;
        if (n.role == NodeRole::input && n.slot >= 0 &&
            static_cast<std::size_t>(n.slot) < g.binding.inputs.size())
            label = g.binding.inputs[static_cast<std::size_t>(n.slot)];
        else if (n.role == NodeRole::output && n.slot >= 0 &&
                 static_cast<std::size_t>(n.slot) < g.binding.outputs.size())
            label = g.binding.outputs[static_cast<std::size_t>(n.slot)];
        else
            label = std::string(to_string(n.role)) + " " + std::to_string(n.innovation);
        if (n.role == NodeRole::hidden) label += "\\n" + std::string(to_string(n.cell));
        return label + "\\nIN " + std::to_string(n.innovation) + " d=" + fmt(n.depth);
    };

    out << "digraph genome {\n";
    out << "  rankdir=TB;\n";
    for (const Node& n : g.nodes) {
        out << "  n" << n.innovation << " [label=\"" << node_label(n) << "\"";
        if (n.role == NodeRole::input) out << ", shape=box";
        if (n.role == NodeRole::output) out << ", shape=doublecircle";
        if (!n.enabled) out << ", color=\"grey\", fontcolor=\"grey\", style=\"dashed\"";
        out << "];\n";
    }
    for (const Edge& e : g.edges) {
        out << "  n" << e.from << " -> n" << e.to << " [label=\"" << fmt(e.weight) << "\"";
        if (!e.enabled) out << ", color=\"grey\", style=\"dashed\"";
        out << "];\n";
    }
    for (const RecurrentEdge& e : g.rec_edges) {
        out << "  n" << e.from << " -> n" << e.to << " [label=\"k=" << e.time_skip << " "
            << fmt(e.weight) << "\", constraint=false";
        if (e.enabled)
            out << ", style=\"dotted\"";
        else
            out << ", color=\"grey\", style=\"dashed\"";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace examm

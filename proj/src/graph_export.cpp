#include "idnet/graph_export.hpp"

#include <fstream>
#include <sstream>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"

namespace idnet {
namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void check(const GraphExport& g) {
  const auto n = g.network.nodes();
  if (g.vocabulary.size() != n) throw InputError("vocabulary size does not match the network");
  if (g.communities.nodes() != n) throw InputError("community assignment does not match the network");
  if (!g.publication_share.empty() && g.publication_share.size() != n) {
    throw InputError("publication shares do not match the network");
  }
}

double share_of(const GraphExport& g, std::size_t i) {
  return g.publication_share.empty() ? 0.0 : g.publication_share[i];
}

}  // namespace

GraphFormat parse_graph_format(std::string_view text) {
  if (text == "graphml") return GraphFormat::graphml;
  if (text == "dot") return GraphFormat::dot;
  throw InputError("unknown graph format '" + std::string(text) + "' (expected graphml or dot)");
}

std::string format_graphml(const GraphExport& g) {
  check(g);
  const auto n = g.network.nodes();
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
      << "  <key id=\"share\" for=\"node\" attr.name=\"publication_share\" attr.type=\"double\"/>\n"
      << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "    <node id=\"n" << i << "\">"
        << "<data key=\"label\">" << xml_escape(g.vocabulary.term(i)) << "</data>"
        << "<data key=\"share\">" << csv::format_real(share_of(g, i)) << "</data>"
        << "<data key=\"community\">" << g.communities.of(i) << "</data></node>\n";
  }
  std::size_t edge = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = g.network.weight(i, j);
      if (w <= 0.0) continue;
      out << "    <edge id=\"e" << edge++ << "\" source=\"n" << i << "\" target=\"n" << j << "\">"
          << "<data key=\"weight\">" << csv::format_real(w) << "</data></edge>\n";
    }
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string format_dot(const GraphExport& g) {
  check(g);
  const auto n = g.network.nodes();
  std::ostringstream out;
  out << "graph G {\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "  n" << i << " [label=" << dot_quote(g.vocabulary.term(i))
        << ", publication_share=" << csv::format_real(share_of(g, i))
        << ", community=" << g.communities.of(i) << "];\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = g.network.weight(i, j);
      if (w <= 0.0) continue;
      out << "  n" << i << " -- n" << j << " [weight=" << csv::format_real(w) << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

void export_graph(const GraphExport& graph, GraphFormat format, const std::filesystem::path& path) {
  const auto text = format == GraphFormat::graphml ? format_graphml(graph) : format_dot(graph);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace idnet

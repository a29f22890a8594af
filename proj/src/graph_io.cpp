#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dgopt/digraph.hpp"

namespace dgopt {

namespace {

std::string strip_comment(const std::string& line) {
  auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Digraph parse_graph(std::istream& in) {
  std::string line;
  int n = -1;
  int line_no = 0;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(strip_comment(line));
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (n < 0) {
      if (fields >> b) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": expected node count on its own line");
      }
      n = parse_number<int>(a, "node count");
      continue;
    }
    if (!(fields >> b) || (fields >> extra)) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'j i'");
    }
    edges.push_back({parse_number<int>(a, "node index"), parse_number<int>(b, "node index")});
  }
  if (n < 0) throw std::invalid_argument("graph file has no node count");
  return Digraph(n, std::move(edges));
}

Digraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file " + path.string());
  return parse_graph(in);
}

void write_graph(std::ostream& out, const Digraph& g) {
  out << g.size() << '\n';
  for (const Edge& e : g.edges()) out << e.from << ' ' << e.to << '\n';
}

Digraph resolve_graph(std::string_view source) {
  if (source == "fig1") return fig1_graph();
  auto split = [](std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto colon = s.find(':', start);
      parts.push_back(s.substr(start, colon - start));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    return parts;
  };
  if (source.starts_with("ring:") || source.starts_with("complete:")) {
    auto parts = split(source);
    if (parts.size() != 2) throw std::invalid_argument("expected ring:N or complete:N");
    int n = parse_number<int>(parts[1], "node count");
    return parts[0] == "ring" ? ring_graph(n) : complete_graph(n);
  }
  if (source.starts_with("random:")) {
    auto parts = split(source);
    if (parts.size() != 4) throw std::invalid_argument("expected random:N:P:SEED");
    return random_strongly_connected(parse_number<int>(parts[1], "node count"),
                                     std::stod(std::string(parts[2])),
                                     parse_number<std::uint64_t>(parts[3], "seed"));
  }
  return load_graph(std::filesystem::path(source));
}

}  // namespace dgopt

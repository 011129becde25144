#include "seqfuzz/spec_graph.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <tuple>

namespace seqfuzz {

std::string NormalizedName::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i != 0) out.push_back('_');
    out += tokens[i];
  }
  return out;
}

namespace {

bool is_delimiter(char c) { return c == '_' || c == '-' || c == '.' || c == ' '; }

std::string stem(std::string token) {
  auto ends_with = [&](std::string_view suffix) {
    return token.size() > suffix.size() &&
           token.compare(token.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (token.size() > 3 && ends_with("ies")) {
    token.replace(token.size() - 3, 3, "y");
  } else if (token.size() > 3 && (ends_with("sses") || ends_with("xes") || ends_with("ches") ||
                                  ends_with("shes") || ends_with("zes"))) {
    token.erase(token.size() - 2);
  } else if (token.size() > 2 && ends_with("s") && !ends_with("ss") && !ends_with("us") &&
             !ends_with("is")) {
    token.pop_back();
  }
  return token;
}

std::string last_segment(std::string_view dotted) {
  std::size_t dot = dotted.rfind('.');
  return std::string(dot == std::string_view::npos ? dotted : dotted.substr(dot + 1));
}

} // namespace

NormalizedName normalize_name(std::string_view raw) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (is_delimiter(c)) {
      flush();
      continue;
    }
    bool upper = std::isupper(static_cast<unsigned char>(c)) != 0;
    if (upper && !current.empty()) {
      char prev = raw[i - 1];
      bool prev_lower = std::islower(static_cast<unsigned char>(prev)) != 0 ||
                        std::isdigit(static_cast<unsigned char>(prev)) != 0;
      bool next_lower = i + 1 < raw.size() && std::islower(static_cast<unsigned char>(raw[i + 1])) != 0;
      // "petId" -> pet|Id, "HTTPServer" -> HTTP|Server
      if (prev_lower || (next_lower && std::isupper(static_cast<unsigned char>(prev)) != 0)) flush();
    }
    current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  flush();

  NormalizedName out;
  for (auto& w : words) out.tokens.push_back(stem(std::move(w)));
  if (out.tokens.empty()) {
    std::string lowered(raw);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (!lowered.empty()) out.tokens.push_back(std::move(lowered));
  }
  return out;
}

std::string path_context(std::string_view path) {
  std::string context;
  std::size_t pos = 0;
  while (pos < path.size()) {
    std::size_t next = path.find('/', pos);
    std::string_view seg = path.substr(pos, next == std::string_view::npos ? path.npos : next - pos);
    if (!seg.empty() && seg.front() != '{') context = std::string(seg);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return context;
}

bool names_related(std::string_view producer_field, std::string_view producer_context,
                   std::string_view consumer_param) {
  const auto param = normalize_name(last_segment(consumer_param)).tokens;
  const auto field = normalize_name(last_segment(producer_field)).tokens;
  if (param == field) return true;
  if (producer_context.empty()) return false;
  const auto ctx = normalize_name(producer_context).tokens;
  std::vector<std::string> prefixed = ctx;
  prefixed.insert(prefixed.end(), field.begin(), field.end());
  if (param == prefixed) return true;
  std::vector<std::string> suffixed = field;
  suffixed.insert(suffixed.end(), ctx.begin(), ctx.end());
  return param == suffixed;
}

int crud_rank(Method method) {
  switch (method) {
  case Method::Post: return 0;
  case Method::Get: return 1;
  case Method::Put:
  case Method::Patch: return 2;
  case Method::Delete: return 3;
  }
  return 1;
}

std::string OperationRef::label() const { return std::string(to_string(method)) + " " + path; }

std::vector<const DependencyEdge*> DependencyGraph::edges_into(std::size_t consumer) const {
  std::vector<const DependencyEdge*> out;
  for (const auto& e : edges)
    if (e.consumer == consumer) out.push_back(&e);
  return out;
}

std::vector<std::vector<std::size_t>> DependencyGraph::components() const {
  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) parent[find(e.producer)] = find(e.consumer);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(nodes.size(), nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::size_t root = find(i);
    if (slot[root] == nodes.size()) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[slot[root]].push_back(i);
  }
  return groups;
}

DependencyGraph build_dependency_graph(const ApiSpec& spec) {
  DependencyGraph graph;
  for (const auto& op : spec.operations) graph.nodes.push_back(OperationRef{op.path, op.method});

  for (std::size_t p = 0; p < spec.operations.size(); ++p) {
    const auto& producer = spec.operations[p];
    const std::string context = path_context(producer.path);
    const auto fields = producer.response_fields();
    for (std::size_t c = 0; c < spec.operations.size(); ++c) {
      if (c == p) continue;
      for (const auto& param : spec.operations[c].parameters) {
        for (const auto& field : fields) {
          if (names_related(field, context, param.name))
            graph.edges.push_back(DependencyEdge{p, c, field, param.name, param.location});
        }
      }
    }
  }

  auto key = [&](const DependencyEdge& e) {
    const auto& pn = graph.nodes[e.producer];
    const auto& cn = graph.nodes[e.consumer];
    return std::make_tuple(pn.path, crud_rank(pn.method), static_cast<int>(pn.method), cn.path,
                           crud_rank(cn.method), static_cast<int>(cn.method), e.field, e.param,
                           static_cast<int>(e.location));
  };
  std::stable_sort(graph.edges.begin(), graph.edges.end(),
                   [&](const DependencyEdge& a, const DependencyEdge& b) { return key(a) < key(b); });
  return graph;
}

} // namespace seqfuzz

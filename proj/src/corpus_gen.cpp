#include "seqfuzz/corpus_gen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "seqfuzz/error.hpp"

namespace seqfuzz {
namespace {

struct Link {
  std::size_t producer = 0;
  std::string field;
};

using ParamKey = std::pair<ParamLocation, std::string>;

class ChainBuilder {
public:
  ChainBuilder(const ApiSpec& spec, const DependencyGraph& graph, std::set<std::string>& warnings)
      : spec_(spec), graph_(graph), warnings_(warnings) {}

  /// Operations to emit, producers first.
  std::vector<std::size_t> chain_for(std::size_t target) {
    links_.clear();
    visited_.clear();
    postorder_.clear();
    stack_.clear();
    visit(target);
    return crud_order();
  }

  const std::map<ParamKey, Link>& links_of(std::size_t op) { return links_[op]; }

private:
  void visit(std::size_t op) {
    visited_.insert(op);
    stack_.push_back(op);
    const auto& desc = spec_.operations[op];
    for (const auto& param : desc.parameters) {
      auto candidates = producers_for(op, param);
      for (const DependencyEdge* edge : candidates) {
        if (std::find(stack_.begin(), stack_.end(), edge->producer) != stack_.end()) {
          warnings_.insert("dependency cycle broken: dropped " + graph_.nodes[edge->producer].label() +
                           " -> " + graph_.nodes[op].label() + " (" + edge->field + " -> " + edge->param + ")");
          continue;
        }
        links_[op][{param.location, param.name}] = Link{edge->producer, edge->field};
        if (!visited_.count(edge->producer)) visit(edge->producer);
        break;
      }
    }
    stack_.pop_back();
    postorder_.push_back(op);
  }

  // Producers are restricted to CRUD ranks not above the consumer's so the
  // chain never reads or updates before it creates.
  std::vector<const DependencyEdge*> producers_for(std::size_t op, const ParameterDescriptor& param) const {
    const std::string consumer_ctx = path_context(spec_.operations[op].path);
    const int consumer_rank = crud_rank(spec_.operations[op].method);
    std::vector<const DependencyEdge*> out;
    for (const DependencyEdge* e : graph_.edges_into(op)) {
      if (e->param != param.name || e->location != param.location) continue;
      if (crud_rank(graph_.nodes[e->producer].method) > consumer_rank) continue;
      out.push_back(e);
    }
    auto key = [&](const DependencyEdge* e) {
      const auto& node = graph_.nodes[e->producer];
      bool same_context = path_context(node.path) == consumer_ctx;
      return std::make_tuple(crud_rank(node.method), same_context ? 0 : 1, e->producer, e->field);
    };
    std::stable_sort(out.begin(), out.end(),
                     [&](const DependencyEdge* a, const DependencyEdge* b) { return key(a) < key(b); });
    return out;
  }

  // Topological order over chosen links, breaking ties by CRUD rank and then
  // by discovery order.
  std::vector<std::size_t> crud_order() {
    std::vector<std::size_t> order;
    std::set<std::size_t> placed;
    while (order.size() < postorder_.size()) {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < postorder_.size(); ++i) {
        std::size_t op = postorder_[i];
        if (placed.count(op)) continue;
        bool ready = true;
        for (const auto& [key, link] : links_[op])
          if (!placed.count(link.producer)) ready = false;
        if (!ready) continue;
        if (!best || crud_rank(spec_.operations[op].method) <
                         crud_rank(spec_.operations[postorder_[*best]].method))
          best = i;
      }
      std::size_t op = postorder_[*best];
      placed.insert(op);
      order.push_back(op);
    }
    return order;
  }

  const ApiSpec& spec_;
  const DependencyGraph& graph_;
  std::set<std::string>& warnings_;
  std::map<std::size_t, std::map<ParamKey, Link>> links_;
  std::set<std::size_t> visited_;
  std::vector<std::size_t> postorder_;
  std::vector<std::size_t> stack_;
};

Literal example_literal(const SchemaNode& schema, Rng& rng, std::vector<std::string>* warnings) {
  ExampleValue ex = example_value(schema, rng);
  if (ex.warning && warnings != nullptr) warnings->push_back(*ex.warning);
  return Literal{std::move(ex.bytes)};
}

} // namespace

TemplatedRequest default_request(const OperationDescriptor& op, Rng& rng, std::vector<std::string>* warnings) {
  TemplatedRequest req;
  req.method = op.method;
  req.path = op.path;
  for (const auto& p : op.parameters)
    if (p.location != ParamLocation::BodyField) req.params[p.name] = example_literal(p.schema, rng, warnings);
  if (op.request_body) {
    if (op.is_json_body()) {
      req.body = build_body(*op.request_body, "", [&](const std::string&, const SchemaNode& s) -> ParameterValue {
        return example_literal(s, rng, warnings);
      });
    } else {
      req.body = BodyValue::make_leaf(Literal{""});
    }
  }
  return req;
}

GeneratedCorpus generate_corpus(const ApiSpec& spec, const DependencyGraph& graph, Rng& rng) {
  GeneratedCorpus out;
  std::set<std::string> warnings;
  std::vector<std::string> value_warnings;
  ChainBuilder builder(spec, graph, warnings);

  for (std::size_t target = 0; target < spec.operations.size(); ++target) {
    std::vector<std::size_t> chain = builder.chain_for(target);
    std::map<std::size_t, std::size_t> position;
    for (std::size_t i = 0; i < chain.size(); ++i) position[chain[i]] = i;

    RequestSequence seq;
    for (std::size_t op_index : chain) {
      const auto& op = spec.operations[op_index];
      const auto& links = builder.links_of(op_index);
      auto linked = [&](ParamLocation loc, const std::string& name) -> std::optional<Reference> {
        auto it = links.find({loc, name});
        if (it == links.end()) return std::nullopt;
        return Reference{position.at(it->second.producer), it->second.field};
      };

      TemplatedRequest req;
      req.method = op.method;
      req.path = op.path;
      for (const auto& p : op.parameters) {
        if (p.location == ParamLocation::BodyField) continue;
        if (auto ref = linked(p.location, p.name)) req.params[p.name] = *ref;
        else req.params[p.name] = example_literal(p.schema, rng, &value_warnings);
      }
      if (op.request_body) {
        if (op.is_json_body()) {
          req.body = build_body(*op.request_body, "",
                                [&](const std::string& path, const SchemaNode& s) -> ParameterValue {
                                  if (auto ref = linked(ParamLocation::BodyField, path)) return *ref;
                                  return example_literal(s, rng, &value_warnings);
                                });
        } else {
          req.body = BodyValue::make_leaf(Literal{""});
        }
      }
      seq.requests.push_back(std::move(req));
    }
    out.sequences.push_back(std::move(seq));
  }
  out.warnings.assign(warnings.begin(), warnings.end());
  for (auto& w : value_warnings)
    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end())
      out.warnings.push_back(std::move(w));
  return out;
}

void write_corpus_dir(const std::filesystem::path& dir, const std::vector<RequestSequence>& corpus) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::size_t width = std::max<std::size_t>(4, std::to_string(corpus.empty() ? 0 : corpus.size() - 1).size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::string name = std::to_string(i);
    name.insert(0, width - name.size(), '0');
    std::ofstream file(dir / (name + ".json"), std::ios::binary | std::ios::trunc);
    file << serialize_sequence(corpus[i]);
    if (!file) throw Error(ErrorCode::IoError, "cannot write " + (dir / (name + ".json")).string());
  }
}

std::vector<RequestSequence> read_corpus_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return {};
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<RequestSequence> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      out.push_back(parse_sequence(buffer.str()));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedCorpusFile, f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

} // namespace seqfuzz

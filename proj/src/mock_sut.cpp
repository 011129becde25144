#include "seqfuzz/mock_sut.hpp"

#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "seqfuzz/error.hpp"

namespace seqfuzz {

const std::string& minipet_spec_yaml() {
  static const std::string text =
#include "minipet_spec.inc"
      ;
  return text;
}

namespace {

namespace bits = minipet_bits;

constexpr std::size_t kMaxPetName = 100;

struct Store {
  std::string title;
};

struct Pet {
  std::string store_id;
  std::string name;
};

struct Reply {
  int status = 200;
  Json body;
};

Reply error_reply(int status, const char* message) { return Reply{status, Json{{"error", message}}}; }

// Nothing here may throw: every 5xx must come from an injected bug.
class MiniPet {
public:
  MiniPet() : coverage_(bits::kTotal) {}

  void reset() {
    stores_.clear();
    pets_.clear();
    next_id_ = 1;
    coverage_ = LineCoverageMap(bits::kTotal);
  }

  LineCoverageMap take_coverage(bool reset) {
    LineCoverageMap out = coverage_;
    if (reset) coverage_ = LineCoverageMap(bits::kTotal);
    return out;
  }

  Reply handle(const std::string& method, const std::string& path, const httplib::Request& req) {
    hit(bits::RouterRequest);
    std::string id;
    if (path == "/store" && method == "POST") return with_body(req, [&](const Json& b) { return post_store(b); });
    if (match(path, "/store/", id)) {
      if (method == "GET") return get_store(id, req);
      if (method == "PUT") return with_body(req, [&](const Json& b) { return put_store(id, b); });
      if (method == "DELETE") return delete_store(id);
    }
    if (path == "/pet" && method == "POST") return with_body(req, [&](const Json& b) { return post_pet(b); });
    if (match(path, "/pet/", id)) {
      if (method == "GET") return get_pet(id);
      if (method == "PUT") return with_body(req, [&](const Json& b) { return put_pet(id, b); });
      if (method == "DELETE") return delete_pet(id);
    }
    hit(bits::RouterUnknown);
    return error_reply(404, "no such route");
  }

private:
  void hit(std::size_t bit) { coverage_.set(bit); }

  static bool match(const std::string& path, const std::string& prefix, std::string& id) {
    if (path.size() <= prefix.size() || path.compare(0, prefix.size(), prefix) != 0) return false;
    id = path.substr(prefix.size());
    return id.find('/') == std::string::npos;
  }

  template <typename Fn>
  Reply with_body(const httplib::Request& req, Fn&& fn) {
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      hit(bits::RouterMalformedJson);
      return error_reply(400, "malformed JSON");
    }
    return fn(body);
  }

  static bool optional_string(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_string();
  }

  std::string issue_id() { return std::to_string(next_id_++); }

  Reply post_store(const Json& body) {
    hit(bits::PostStoreEntry);
    if (!body.is_object() || !optional_string(body, "title")) {
      hit(bits::PostStoreInvalid);
      return error_reply(422, "invalid store");
    }
    std::string id = issue_id();
    stores_[id] = Store{body.value("title", "")};
    hit(bits::PostStoreCreated);
    return Reply{201, Json{{"id", id}}};
  }

  Reply get_store(const std::string& id, const httplib::Request& req) {
    hit(bits::GetStoreEntry);
    if (req.has_param("voucher")) {
      hit(bits::GetStoreVoucher);
      const std::string v = req.get_param_value("voucher");
      auto starts = [&](std::string_view p) { return v.compare(0, p.size(), p) == 0; };
      if (starts("W")) {
        hit(bits::GuardW);
        if (starts("WU")) {
          hit(bits::GuardWU);
          if (starts("WUP")) {
            hit(bits::GuardWUP);
            if (starts("WUPPI")) {
              hit(bits::GuardWUPPI);
              if (v == "WUPPIE") {
                hit(bits::GuardMagic);
                return error_reply(500, "voucher processing failed");
              }
            }
          }
        }
      }
    }
    auto it = stores_.find(id);
    if (it == stores_.end()) {
      hit(bits::GetStoreNotFound);
      return error_reply(404, "no such store");
    }
    hit(bits::GetStoreFound);
    return Reply{200, Json{{"id", id}, {"title", it->second.title}}};
  }

  Reply put_store(const std::string& id, const Json& body) {
    hit(bits::PutStoreEntry);
    if (!body.is_object() || !optional_string(body, "title")) {
      hit(bits::PutStoreInvalid);
      return error_reply(422, "invalid store");
    }
    auto it = stores_.find(id);
    if (it == stores_.end()) {
      hit(bits::PutStoreNotFound);
      return error_reply(404, "no such store");
    }
    if (body.contains("title")) it->second.title = body["title"].get<std::string>();
    hit(bits::PutStoreUpdated);
    return Reply{200, Json{{"id", id}, {"title", it->second.title}}};
  }

  Reply delete_store(const std::string& id) {
    hit(bits::DeleteStoreEntry);
    auto it = stores_.find(id);
    if (it == stores_.end()) {
      hit(bits::DeleteStoreNotFound);
      return error_reply(404, "no such store");
    }
    stores_.erase(it);
    hit(bits::DeleteStoreDeleted);
    // Pets of the store are left behind on purpose.
    for (const auto& [pid, pet] : pets_)
      if (pet.store_id == id) {
        hit(bits::DeleteStoreOrphans);
        break;
      }
    return Reply{200, Json{{"id", id}}};
  }

  Reply post_pet(const Json& body) {
    hit(bits::PostPetEntry);
    if (!body.is_object() || !optional_string(body, "name") || !optional_string(body, "store_id")) {
      hit(bits::PostPetInvalid);
      return error_reply(422, "invalid pet");
    }
    if (!body.contains("store_id")) {
      hit(bits::PostPetNoStoreId);
      return error_reply(422, "store_id required");
    }
    std::string store_id = body["store_id"].get<std::string>();
    if (!stores_.count(store_id)) {
      hit(bits::PostPetUnknownStore);
      return error_reply(422, "unknown store");
    }
    std::string id = issue_id();
    pets_[id] = Pet{store_id, body.value("name", "")};
    hit(bits::PostPetCreated);
    return Reply{201, Json{{"id", id}}};
  }

  Reply get_pet(const std::string& id) {
    hit(bits::GetPetEntry);
    auto it = pets_.find(id);
    if (it == pets_.end()) {
      hit(bits::GetPetNotFound);
      return error_reply(404, "no such pet");
    }
    if (!stores_.count(it->second.store_id)) {
      hit(bits::GetPetDangling);
      return error_reply(500, "store lookup failed");
    }
    hit(bits::GetPetFound);
    return Reply{200, pet_json(id, it->second)};
  }

  Reply put_pet(const std::string& id, const Json& body) {
    hit(bits::PutPetEntry);
    if (!body.is_object() || !optional_string(body, "name")) {
      hit(bits::PutPetInvalid);
      return error_reply(422, "invalid pet");
    }
    if (body.contains("name") && body["name"].get<std::string>().size() > kMaxPetName) {
      hit(bits::PutPetNameTooLong);
      return error_reply(500, "name buffer overflow");
    }
    auto it = pets_.find(id);
    if (it == pets_.end()) {
      hit(bits::PutPetNotFound);
      return error_reply(404, "no such pet");
    }
    if (body.contains("name")) it->second.name = body["name"].get<std::string>();
    hit(bits::PutPetUpdated);
    return Reply{200, pet_json(id, it->second)};
  }

  Reply delete_pet(const std::string& id) {
    hit(bits::DeletePetEntry);
    if (pets_.erase(id) == 0) {
      hit(bits::DeletePetNotFound);
      return error_reply(404, "no such pet");
    }
    hit(bits::DeletePetDeleted);
    return Reply{200, Json{{"id", id}}};
  }

  static Json pet_json(const std::string& id, const Pet& pet) {
    return Json{{"id", id}, {"store_id", pet.store_id}, {"name", pet.name}};
  }

  std::map<std::string, Store> stores_;
  std::map<std::string, Pet> pets_;
  std::uint64_t next_id_ = 1;
  LineCoverageMap coverage_;
};

void single_threaded(httplib::Server& server) {
  server.new_task_queue = [] { return new httplib::ThreadPool(1); };
  server.set_tcp_nodelay(true);
  // SO_REUSEPORT (httplib's default) would let a second instance share the port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
}

} // namespace

struct MockSut::Impl {
  std::mutex mutex;
  MiniPet state;
  httplib::Server api;
  httplib::Server agent;
  std::thread api_thread;
  std::thread agent_thread;
  int api_port = 0;
  int agent_port = 0;
  bool running = false;
};

MockSut::MockSut() : impl_(std::make_unique<Impl>()) {}

MockSut::~MockSut() { stop(); }

void MockSut::start(int api_port, int agent_port, std::uint64_t /*rng_seed: behavior is fully deterministic*/) {
  if (impl_->running) return;
  Impl& m = *impl_;
  single_threaded(m.api);
  single_threaded(m.agent);

  auto api_handler = [&m](const httplib::Request& req, httplib::Response& res) {
    Reply reply;
    {
      std::lock_guard lock(m.mutex);
      reply = m.state.handle(req.method, req.path, req);
    }
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  const std::string any = ".*";
  m.api.Get(any, api_handler);
  m.api.Post(any, api_handler);
  m.api.Put(any, api_handler);
  m.api.Patch(any, api_handler);
  m.api.Delete(any, api_handler);

  m.agent.Get("/coverage", [&m](const httplib::Request& req, httplib::Response& res) {
    std::string reset = req.has_param("reset") ? req.get_param_value("reset") : "false";
    if (reset != "true" && reset != "false") {
      res.status = 400;
      res.set_content(R"({"error":"reset must be true or false"})", "application/json");
      return;
    }
    LineCoverageMap snapshot;
    {
      std::lock_guard lock(m.mutex);
      snapshot = m.state.take_coverage(reset == "true");
    }
    res.set_content(make_coverage_payload(snapshot), "application/json");
  });

  auto bind = [](httplib::Server& server, int port, const char* what) {
    int bound = port == 0 ? server.bind_to_any_port("127.0.0.1") : (server.bind_to_port("127.0.0.1", port) ? port : -1);
    if (bound <= 0) throw Error(ErrorCode::PortInUse, std::string(what) + " port " + std::to_string(port) + " unavailable");
    return bound;
  };
  m.api_port = bind(m.api, api_port, "API");
  try {
    m.agent_port = bind(m.agent, agent_port, "coverage agent");
  } catch (...) {
    m.api.stop();
    throw;
  }
  m.api_thread = std::thread([&m] { m.api.listen_after_bind(); });
  m.agent_thread = std::thread([&m] { m.agent.listen_after_bind(); });
  m.api.wait_until_ready();
  m.agent.wait_until_ready();
  m.running = true;
}

void MockSut::stop() {
  if (!impl_ || !impl_->running) return;
  impl_->api.stop();
  impl_->agent.stop();
  if (impl_->api_thread.joinable()) impl_->api_thread.join();
  if (impl_->agent_thread.joinable()) impl_->agent_thread.join();
  impl_->running = false;
}

void MockSut::reset_state() {
  std::lock_guard lock(impl_->mutex);
  impl_->state.reset();
}

int MockSut::api_port() const { return impl_->api_port; }
int MockSut::agent_port() const { return impl_->agent_port; }
std::string MockSut::base_url() const { return "http://127.0.0.1:" + std::to_string(impl_->api_port); }
std::string MockSut::agent_url() const { return "http://127.0.0.1:" + std::to_string(impl_->agent_port); }

LineCoverageMap MockSut::coverage() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->state.take_coverage(false);
}

} // namespace seqfuzz

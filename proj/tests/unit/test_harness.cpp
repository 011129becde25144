#include "doctest.h"
#include "seqfuzz/error.hpp"
#include "seqfuzz/harness.hpp"
#include "support.hpp"

using namespace seqfuzz;

namespace {

const RequestSequence& chain() { return test::minipet_seeds().at(5); }

ResponseRecord status(int code) {
  ResponseRecord r;
  r.status = code;
  return r;
}

TemplatedRequest get_store() {
  TemplatedRequest r;
  r.method = Method::Get;
  r.path = "/store/{id}";
  r.params["id"] = Literal{"9"};
  return r;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("references are substituted from the environment") {
  Environment env{{{"id", "7"}}};
  RenderResult out = render_request(test::minipet(), chain().requests[1], env, ClientConfig{"http://h:1"});
  CHECK(out.warnings.empty());
  CHECK(out.request.has_body);
  CHECK(out.request.body.find("\"store_id\":\"7\"") != std::string::npos);
  bool json_type = false;
  for (const auto& [k, v] : out.request.headers)
    if (k == "Content-Type" && v == "application/json") json_type = true;
  CHECK(json_type);
}

TEST_CASE("path literals and encoding") {
  ClientConfig cfg{"http://h:1/api"};
  RenderResult out = render_request(test::minipet(), get_store(), {}, cfg);
  CHECK(out.request.url == "http://h:1/api/store/9");
  CHECK(out.request.target == "/store/9");
  CHECK(out.request.url.find('{') == std::string::npos);

  TemplatedRequest odd = get_store();
  odd.params["id"] = Literal{"a b/c"};
  odd.params["voucher"] = Literal{"W&U"};
  RenderResult enc = render_request(test::minipet(), odd, {}, cfg);
  CHECK(enc.request.url == "http://h:1/api/store/a%20b%2Fc?voucher=W%26U");
}

TEST_CASE("missing response fields fall back to defaults with a warning") {
  Environment env{{{"name", "x"}}};
  RenderResult out = render_request(test::minipet(), chain().requests[1], env, ClientConfig{"http://h:1"});
  CHECK(out.warnings.size() == 1);
  CHECK(out.request.body.find("\"store_id\":\"a\"") != std::string::npos);
}

TEST_CASE("auth header and header sanitizing") {
  ClientConfig cfg{"http://h:1"};
  cfg.auth_header = std::make_pair(std::string("X-Token"), std::string("s3cret"));
  RenderResult out = render_request(test::minipet(), get_store(), {}, cfg);
  bool found = false;
  for (const auto& [k, v] : out.request.headers)
    if (k == "X-Token" && v == "s3cret") found = true;
  CHECK(found);
  CHECK(sanitize_header_value(std::string("a\r\nb\0c", 6)) == "abc");
}

TEST_CASE("flatten_response") {
  auto flat = flatten_response(R"({"id":"3","n":4,"tags":[{"x":true}],"o":{"p":null}})");
  CHECK(flat.at("id") == "3");
  CHECK(flat.at("n") == "4");
  CHECK(flat.at("tags.0.x") == "true");
  CHECK(flat.at("o.p") == "null");
  CHECK(flatten_response("not json").empty());
}

TEST_CASE("check_response") {
  const ApiSpec& spec = test::minipet();
  TemplatedRequest req = get_store();
  CHECK(check_response(spec, req, status(200), CheckerMode::Strict) == Verdict::ExpectedStatus);
  CHECK(check_response(spec, req, status(418), CheckerMode::Strict) == Verdict::UnexpectedStatus);
  CHECK(check_response(spec, req, status(418), CheckerMode::ServerErrorOnly) == Verdict::ExpectedStatus);
  CHECK(check_response(spec, req, status(500), CheckerMode::Strict) == Verdict::ServerError);
  CHECK(check_response(spec, req, status(503), CheckerMode::ServerErrorOnly) == Verdict::ServerError);
  ResponseRecord lost;
  lost.transport = Transport::Timeout;
  CHECK(check_response(spec, req, lost, CheckerMode::Strict) == Verdict::TransportFailure);

  TemplatedRequest unknown;
  unknown.path = "/nope";
  try {
    check_response(spec, unknown, status(200), CheckerMode::Strict);
    FAIL("expected UnknownOperation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownOperation);
  }
  CHECK(parse_checker_mode("strict") == CheckerMode::Strict);
  CHECK(parse_checker_mode("server-error") == CheckerMode::ServerErrorOnly);
  CHECK_THROWS_AS(parse_checker_mode("lenient"), Error);
}

TEST_CASE("sequences against the mock") {
  MockSut sut;
  sut.start();
  HttpClient client(ClientConfig{sut.base_url()});

  ExecutionResult happy = client.execute_sequence(test::minipet(), chain());
  REQUIRE(happy.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(happy.records[i].request_index == i);
    CHECK(happy.records[i].transport == Transport::Ok);
  }
  CHECK(happy.records[0].status == 201);
  CHECK(happy.records[1].status == 201);
  CHECK(happy.records[2].status == 200);
  CHECK(happy.sent[1].body.find("\"store_id\":\"1\"") != std::string::npos);

  RequestSequence nope;
  TemplatedRequest r;
  r.path = "/nope";
  nope.requests.push_back(r);
  ExecutionResult missing = client.execute_sequence(test::minipet(), nope);
  REQUIRE(missing.records.size() == 1);
  CHECK(missing.records[0].status == 404);

  RequestSequence errors_then_more = chain();
  errors_then_more.requests.insert(errors_then_more.requests.begin(), get_store());
  ExecutionResult cont = client.execute_sequence(test::minipet(), errors_then_more);
  CHECK(cont.records.size() == 4);
  CHECK(cont.records[0].status == 404);
}

TEST_CASE("unreachable target aborts after one record") {
  ClientConfig cfg{"http://127.0.0.1:1"};
  cfg.timeout_ms = 300;
  HttpClient client(cfg);
  ExecutionResult out = client.execute_sequence(test::minipet(), chain());
  REQUIRE(out.records.size() == 1);
  CHECK(out.records[0].transport != Transport::Ok);
  CHECK_FALSE(out.records[0].status);
}

}

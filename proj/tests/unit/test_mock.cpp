#include "doctest.h"
#include "httplib.h"
#include "seqfuzz/error.hpp"
#include "seqfuzz/mock_sut.hpp"
#include "support.hpp"

using namespace seqfuzz;
namespace bits = minipet_bits;

namespace {

struct Call {
  int status;
  Json body;
};

class Api {
public:
  explicit Api(const MockSut& sut) : cli_("127.0.0.1", sut.api_port()), agent_("127.0.0.1", sut.agent_port()) {}

  Call operator()(const std::string& method, const std::string& path, const std::string& body = "") {
    httplib::Result res = method == "GET"      ? cli_.Get(path)
                          : method == "DELETE" ? cli_.Delete(path)
                          : method == "PUT"    ? cli_.Put(path, body, "application/json")
                                               : cli_.Post(path, body, "application/json");
    REQUIRE(res);
    return Call{res->status, Json::parse(res->body, nullptr, false)};
  }

  LineCoverageMap coverage(const std::string& reset) {
    auto res = agent_.Get("/coverage?reset=" + reset);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return parse_coverage_payload(res->body);
  }

  int agent_status(const std::string& query) {
    auto res = agent_.Get("/coverage" + query);
    REQUIRE(res);
    return res->status;
  }

private:
  httplib::Client cli_;
  httplib::Client agent_;
};

} // namespace

TEST_SUITE("mock") {

TEST_CASE("bundled spec parses to minipet") {
  ApiSpec spec = parse_spec(minipet_spec_yaml());
  CHECK(spec.operations.size() == 8);
}

TEST_CASE("ids start at 1 and are shared") {
  MockSut sut;
  sut.start();
  Api api(sut);
  Call store = api("POST", "/store", R"({"title":"x"})");
  CHECK(store.status == 201);
  CHECK(store.body == Json{{"id", "1"}});
  Call pet = api("POST", "/pet", R"({"name":"rex","store_id":"1"})");
  CHECK(pet.status == 201);
  CHECK(pet.body == Json{{"id", "2"}});
  CHECK(api("GET", "/store/1").body["title"] == "x");
  CHECK(api("POST", "/pet", R"({"name":"rex","store_id":"99"})").status == 422);
  CHECK(api("POST", "/pet", R"({"name":"rex"})").status == 422);
  CHECK(api("POST", "/store", R"({"title":5})").status == 422);
  CHECK(api("POST", "/store", "{oops").status == 400);
  CHECK(api("GET", "/nope").status == 404);
  CHECK(api("PUT", "/store/1", R"({"title":"y"})").status == 200);
  CHECK(api("PUT", "/store/77", R"({"title":"y"})").status == 404);
  CHECK(api("DELETE", "/pet/2").status == 200);
  CHECK(api("DELETE", "/pet/2").status == 404);
}

TEST_CASE("B1: long pet names crash PUT /pet/{id}") {
  MockSut sut;
  sut.start();
  Api api(sut);
  std::string name(101, 'n');
  CHECK(api("PUT", "/pet/5", Json{{"name", name}}.dump()).status == 500);
  CHECK(api("PUT", "/pet/5", Json{{"name", std::string(100, 'n')}}.dump()).status == 404);
  CHECK(sut.coverage().is_set(bits::PutPetNameTooLong));
}

TEST_CASE("B2: pet of a deleted store") {
  MockSut sut;
  sut.start();
  Api api(sut);
  api("POST", "/store", "{}");
  api("POST", "/pet", R"({"store_id":"1"})");
  CHECK(api("GET", "/pet/2").status == 200);
  CHECK(api("DELETE", "/store/1").status == 200);
  CHECK(api("GET", "/pet/2").status == 500);
  LineCoverageMap cov = sut.coverage();
  CHECK(cov.is_set(bits::DeleteStoreOrphans));
  CHECK(cov.is_set(bits::GetPetDangling));
}

TEST_CASE("voucher guards") {
  MockSut sut;
  sut.start();
  Api api(sut);
  api("POST", "/store", "{}");
  api.coverage("true");
  CHECK(api("GET", "/store/1?voucher=WU").status == 200);
  LineCoverageMap cov = api.coverage("true");
  CHECK(cov.is_set(bits::GetStoreVoucher));
  CHECK(cov.is_set(bits::GuardW));
  CHECK(cov.is_set(bits::GuardWU));
  CHECK_FALSE(cov.is_set(bits::GuardWUP));

  CHECK(api("GET", "/store/1?voucher=WUPPIX").status == 200);
  cov = api.coverage("true");
  CHECK(cov.is_set(bits::GuardWUPPI));
  CHECK_FALSE(cov.is_set(bits::GuardMagic));

  CHECK(api("GET", "/store/404?voucher=WUPPIE").status == 500);
  CHECK(api.coverage("false").is_set(bits::GuardMagic));
}

TEST_CASE("reset and the agent protocol") {
  MockSut sut;
  sut.start();
  Api api(sut);
  api("POST", "/store", "{}");
  api("POST", "/store", "{}");
  sut.reset_state();
  CHECK(sut.coverage().popcount() == 0);
  CHECK(api.coverage("false").popcount() == 0);
  sut.reset_state();
  sut.reset_state();
  CHECK(api("POST", "/store", "{}").body == Json{{"id", "1"}});
  CHECK(api("GET", "/store/2").status == 404);

  CHECK(api.coverage("true").popcount() > 0);
  CHECK(api.coverage("true").popcount() == 0);
  CHECK(api.agent_status("?reset=maybe") == 400);
  CHECK(api.agent_status("") == 200);
  LineCoverageMap m = api.coverage("false");
  CHECK(m.total_bits() == bits::kTotal);
  for (std::size_t b = 40; b < bits::kTotal; ++b) CHECK_FALSE(m.is_set(b));
}

TEST_CASE("busy ports are reported") {
  MockSut a;
  a.start();
  MockSut b;
  try {
    b.start(a.api_port(), 0);
    FAIL("expected PortInUse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PortInUse);
  }
}

}

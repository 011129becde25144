#include <regex>

#include "doctest.h"
#include "seqfuzz/error.hpp"
#include "seqfuzz/openapi.hpp"
#include "seqfuzz/pattern.hpp"
#include "support.hpp"

using namespace seqfuzz;

namespace {

ErrorCode code_of(std::string_view doc) {
  try {
    parse_spec(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

} // namespace

TEST_SUITE("openapi") {

TEST_CASE("minipet has the eight documented operations") {
  const ApiSpec& spec = test::minipet();
  REQUIRE(spec.operations.size() == 8);
  CHECK(spec.find("/store", Method::Post));
  CHECK(spec.find("/store/{id}", Method::Get));
  CHECK(spec.find("/store/{id}", Method::Put));
  CHECK(spec.find("/store/{id}", Method::Delete));
  CHECK(spec.find("/pet", Method::Post));
  CHECK(spec.find("/pet/{id}", Method::Get));
  CHECK(spec.find("/pet/{id}", Method::Put));
  CHECK(spec.find("/pet/{id}", Method::Delete));
  CHECK_FALSE(spec.find("/pet", Method::Get));
  CHECK(spec.base_url == "http://127.0.0.1:8080");
}

TEST_CASE("empty paths object yields no operations") {
  ApiSpec spec = parse_spec("openapi: 3.0.0\npaths: {}\n");
  CHECK(spec.operations.empty());
}

TEST_CASE("JSON documents are accepted") {
  ApiSpec spec = parse_spec(R"({"openapi":"3.0.0","paths":{"/health":{"get":{"responses":{"200":{"description":"ok"}}}}}})");
  REQUIRE(spec.operations.size() == 1);
  CHECK(spec.operations[0].method == Method::Get);
}

TEST_CASE("default response is a wildcard") {
  ApiSpec spec = parse_spec(R"(
openapi: 3.0.0
paths:
  /health:
    get:
      responses:
        default:
          description: anything
)");
  REQUIRE(spec.operations.size() == 1);
  REQUIRE(spec.operations[0].responses.size() == 1);
  CHECK(spec.operations[0].responses[0].is_wildcard());
  ExpectedStatuses st = expected_statuses(spec, "/health", Method::Get);
  CHECK(st.codes.empty());
  CHECK(st.wildcard);
  CHECK(st.accepts(418));
}

TEST_CASE("ingestion errors") {
  CHECK(code_of("{not: [valid") == ErrorCode::MalformedDocument);
  CHECK(code_of("openapi: 3.0.0\ninfo: {title: x}\n") == ErrorCode::MissingPaths);
  CHECK(code_of(R"(
openapi: 3.0.0
paths:
  /x:
    get:
      responses:
        '200':
          description: ok
          content:
            application/json:
              schema:
                $ref: '#/components/schemas/Missing'
)") == ErrorCode::UnresolvableRef);
  CHECK_THROWS_AS(load_spec_file("/nonexistent/spec.yaml"), Error);
}

TEST_CASE("$ref inside the document is resolved") {
  ApiSpec spec = parse_spec(R"(
openapi: 3.0.0
paths:
  /x:
    post:
      requestBody:
        content:
          application/json:
            schema:
              $ref: '#/components/schemas/Thing'
      responses:
        '201':
          description: ok
components:
  schemas:
    Thing:
      type: object
      properties:
        size: {type: integer}
)");
  const OperationDescriptor& op = spec.at("/x", Method::Post);
  REQUIRE(op.request_body);
  const SchemaNode* size = op.request_body->child("size");
  REQUIRE(size);
  CHECK(size->kind == SchemaKind::Integer);
}

TEST_CASE("expected statuses of minipet GET /store/{id}") {
  ExpectedStatuses st = expected_statuses(test::minipet(), "/store/{id}", Method::Get);
  CHECK(st.codes == std::set<int>{200, 404});
  CHECK_FALSE(st.wildcard);
  try {
    expected_statuses(test::minipet(), "/nope", Method::Get);
    FAIL("expected UnknownOperation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownOperation);
  }
}

TEST_CASE("parse_method") {
  CHECK(parse_method("patch") == Method::Patch);
  CHECK(parse_method("DELETE") == Method::Delete);
  CHECK_THROWS_AS(parse_method("TRACE"), Error);
}

TEST_CASE("example values") {
  Rng rng(1);
  SchemaNode integer;
  integer.kind = SchemaKind::Integer;
  integer.example = Json(42);
  CHECK(example_value(integer, rng).bytes == "42");

  SchemaNode str;
  str.kind = SchemaKind::String;
  CHECK(example_value(str, rng).bytes == "a");

  SchemaNode num;
  num.kind = SchemaKind::Number;
  CHECK(default_value(num) == "1.0");
  SchemaNode flag;
  flag.kind = SchemaKind::Boolean;
  CHECK(default_value(flag) == "true");
  SchemaNode plain_int;
  plain_int.kind = SchemaKind::Integer;
  CHECK(default_value(plain_int) == "1");
}

TEST_CASE("pattern generation matches the pattern") {
  SchemaNode str;
  str.kind = SchemaKind::String;
  str.pattern = "[A-C]{2}";
  Rng rng(7);
  ExampleValue v = example_value(str, rng);
  CHECK_FALSE(v.warning);
  CHECK(v.bytes.size() == 2);
  CHECK(std::regex_match(v.bytes, std::regex("[A-C]{2}")));

  Rng again(7);
  CHECK(example_value(str, again).bytes == v.bytes);

  for (const char* pattern : {"^[a-z]+-[0-9]{3}$", "(foo|ba[rz])\\d?", "x{2,4}y*", "[^abc]\\w\\s?"}) {
    Rng r(3);
    auto out = generate_from_pattern(pattern, r);
    REQUIRE(out);
    CHECK(std::regex_search(*out, std::regex(pattern)));
  }
}

TEST_CASE("unsatisfiable pattern falls back with a warning") {
  SchemaNode str;
  str.kind = SchemaKind::String;
  str.pattern = "a{300}";
  Rng rng(1);
  ExampleValue v = example_value(str, rng);
  CHECK(v.bytes == "a");
  CHECK(v.warning);
}

TEST_CASE("leaf paths and schema lookup") {
  const OperationDescriptor& op = test::minipet().at("/pet", Method::Post);
  REQUIRE(op.request_body);
  std::vector<std::string> leaves;
  collect_leaf_paths(*op.request_body, "", leaves);
  CHECK(std::find(leaves.begin(), leaves.end(), "store_id") != leaves.end());
  CHECK(schema_at(*op.request_body, "name") != nullptr);
  CHECK(schema_at(*op.request_body, "nothing") == nullptr);
}

}

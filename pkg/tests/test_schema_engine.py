"""Unit tests for the schema registry and validator."""

from __future__ import annotations

import pytest

from kgserve.schema_engine import (
    MAX_REF_DEPTH,
    RefCycleError,
    RefResolutionError,
    RegistryError,
    SchemaEngineError,
    SchemaRegistry,
    UnknownSchemaError,
    canonical_json,
    escape_pointer_token,
    evaluate_pointer,
    json_equal,
    json_type_name,
    unescape_pointer_token,
)

A = "http://example.org/schemas/a.json"
B = "http://example.org/schemas/b.json"


def make_registry(*pairs) -> SchemaRegistry:
    reg = SchemaRegistry()
    for uri, body in pairs:
        reg.register(uri, body)
    return reg


class TestPointer:
    def test_escape_round_trip(self):
        for token in ("plain", "a/b", "a~b", "~/", ""):
            assert unescape_pointer_token(escape_pointer_token(token)) == token

    def test_escape_order(self):
        # ~ must be escaped before /, otherwise a/b and a~1b collide
        assert escape_pointer_token("a/b") == "a~1b"
        assert escape_pointer_token("a~b") == "a~0b"

    def test_evaluate_nested(self):
        doc = {"definitions": {"id": {"type": "string"}}, "arr": [10, 20]}
        assert evaluate_pointer(doc, "") == doc
        assert evaluate_pointer(doc, "/definitions/id") == {"type": "string"}
        assert evaluate_pointer(doc, "/arr/1") == 20

    def test_evaluate_escaped_member(self):
        doc = {"a/b": {"c~d": 1}}
        assert evaluate_pointer(doc, "/a~1b/c~0d") == 1

    def test_missing_member(self):
        with pytest.raises(RefResolutionError):
            evaluate_pointer({"a": 1}, "/b")

    def test_bad_index(self):
        with pytest.raises(RefResolutionError):
            evaluate_pointer({"a": [1]}, "/a/5")
        with pytest.raises(RefResolutionError):
            evaluate_pointer({"a": [1]}, "/a/x")

    def test_scalar_descent(self):
        with pytest.raises(RefResolutionError):
            evaluate_pointer({"a": 1}, "/a/b")

    def test_must_start_with_slash(self):
        with pytest.raises(RefResolutionError):
            evaluate_pointer({"a": 1}, "a")


class TestTypes:
    def test_names(self):
        assert json_type_name(None) == "null"
        assert json_type_name(True) == "boolean"
        assert json_type_name(1) == "integer"
        assert json_type_name(1.5) == "number"
        assert json_type_name("x") == "string"
        assert json_type_name([]) == "array"
        assert json_type_name({}) == "object"

    def test_equal_bool_vs_number(self):
        assert not json_equal(True, 1)
        assert not json_equal(0, False)
        assert json_equal(1, 1.0)
        assert json_equal({"a": [1, True]}, {"a": [1.0, True]})
        assert not json_equal({"a": [1, True]}, {"a": [1, 1]})


class TestRegistry:
    def test_register_and_get(self):
        reg = make_registry((A, {"type": "string"}))
        assert reg.contains(A)
        assert reg.document(A) == {"type": "string"}
        assert reg.uris() == [A]

    def test_bare_fragment_normalized(self):
        reg = make_registry((A + "#", {"type": "string"}))
        assert reg.contains(A)

    def test_fragment_rejected(self):
        with pytest.raises(RegistryError):
            make_registry((A + "#/definitions/x", {}))

    def test_relative_uri_rejected(self):
        with pytest.raises(RegistryError):
            make_registry(("schemas/a.json", {}))

    def test_non_object_body_rejected(self):
        with pytest.raises(RegistryError):
            make_registry((A, ["not", "an", "object"]))

    def test_reregister_replaces(self):
        reg = make_registry((A, {"type": "string"}))
        reg.register(A, {"type": "integer"})
        assert reg.document(A) == {"type": "integer"}

    def test_unregister(self):
        reg = make_registry((A, {}))
        reg.unregister(A)
        assert not reg.contains(A)

    def test_unknown_document(self):
        reg = SchemaRegistry()
        with pytest.raises(UnknownSchemaError):
            reg.document(A)


class TestRefs:
    def test_same_document_pointer(self):
        reg = make_registry(
            (A, {"definitions": {"id": {"type": "string"}}}))
        assert reg.resolve_ref(A, "#/definitions/id") == {"type": "string"}

    def test_relative_document(self):
        reg = make_registry(
            (A, {}),
            (B, {"definitions": {"x": {"type": "integer"}}}))
        assert reg.resolve_ref(A, "./b.json#/definitions/x") == {"type": "integer"}
        assert reg.resolve_ref(A, "b.json#/definitions/x") == {"type": "integer"}

    def test_resolution_ignores_inner_id(self):
        # refs resolve against the registered URI, not the id member
        reg = make_registry(
            (A, {"id": "http://other.host/deep/path/a.json#"}),
            (B, {"definitions": {"x": {"enum": [1]}}}))
        assert reg.resolve_ref(A, "b.json#/definitions/x") == {"enum": [1]}

    def test_single_step_returns_ref_object(self):
        # one resolution step may land on another ref; it is returned as is
        reg = make_registry(
            (A, {"definitions": {"node": {"$ref": "./b.json#"}}}),
            (B, {"type": "object"}))
        assert reg.resolve_ref(A, "#/definitions/node") == {"$ref": "./b.json#"}

    def test_dereference_follows_chain(self):
        reg = make_registry(
            (A, {"definitions": {"node": {"$ref": "./b.json#"}}}),
            (B, {"type": "object"}))
        owner, value = reg.dereference(A, "#/definitions/node")
        assert owner == B
        assert value == {"type": "object"}

    def test_dereference_cycle(self):
        reg = make_registry(
            (A, {"$ref": "./b.json#"}),
            (B, {"$ref": "./a.json#"}))
        with pytest.raises(RefCycleError):
            reg.dereference(A, "#")

    def test_dereference_depth_limit(self):
        pairs = []
        for i in range(MAX_REF_DEPTH + 2):
            uri = f"http://example.org/c{i}.json"
            pairs.append((uri, {"$ref": f"./c{i + 1}.json#"}))
        reg = make_registry(*pairs)
        with pytest.raises(RefCycleError):
            reg.dereference(pairs[0][0], "#")

    def test_unknown_target_document(self):
        reg = make_registry((A, {}))
        with pytest.raises(UnknownSchemaError):
            reg.resolve_ref(A, "./missing.json#")

    def test_missing_fragment_path(self):
        reg = make_registry((A, {"definitions": {}}))
        with pytest.raises(RefResolutionError):
            reg.resolve_ref(A, "#/definitions/nope")

    def test_check_refs_transitive(self):
        reg = make_registry(
            (A, {"properties": {"x": {"$ref": "./b.json#/definitions/x"}}}),
            (B, {"definitions": {"x": {"$ref": "#/definitions/y"},
                                 "y": {"type": "string"}}}))
        reg.check_refs(A)

    def test_check_refs_reports_dangling(self):
        reg = make_registry(
            (A, {"properties": {"x": {"$ref": "./missing.json#"}}}))
        with pytest.raises(SchemaEngineError):
            reg.check_refs(A)

    def test_check_refs_skips_enum_contents(self):
        # an enum may contain objects that merely look like refs
        reg = make_registry(
            (A, {"enum": [{"$ref": "./not-a-real-ref.json#"}]}))
        reg.check_refs(A)


def validate(schema_body, instance, extra=()):
    reg = make_registry((A, schema_body), *extra)
    return reg.validate(A, instance)


class TestValidate:
    def test_empty_schema_accepts_anything(self):
        for value in (None, True, 1, 1.5, "x", [], {}):
            assert validate({}, value).valid

    def test_type_string(self):
        assert validate({"type": "string"}, "x").valid
        report = validate({"type": "string"}, 1)
        assert not report.valid
        assert report.errors[0].keyword == "type"
        assert report.errors[0].message == "expected type string, got integer"

    def test_integer_excludes_float_form(self):
        assert validate({"type": "integer"}, 3).valid
        assert not validate({"type": "integer"}, 3.0).valid

    def test_bool_is_not_a_number(self):
        assert not validate({"type": "integer"}, True).valid
        assert not validate({"type": "number"}, True).valid
        assert validate({"type": "boolean"}, True).valid

    def test_integer_is_a_number(self):
        assert validate({"type": "number"}, 3).valid

    def test_type_union(self):
        schema = {"type": ["string", "number", "boolean"]}
        assert validate(schema, "x").valid
        assert validate(schema, 1).valid
        assert validate(schema, True).valid
        assert not validate(schema, None).valid
        assert not validate(schema, {}).valid

    def test_enum_bool_number_distinct(self):
        assert not validate({"enum": [1, 0]}, True).valid
        assert validate({"enum": [1, 0]}, 1.0).valid
        assert validate({"enum": [True]}, True).valid

    def test_string_lengths(self):
        schema = {"minLength": 2, "maxLength": 3}
        assert not validate(schema, "a").valid
        assert validate(schema, "ab").valid
        assert validate(schema, "abc").valid
        assert not validate(schema, "abcd").valid
        assert validate(schema, 123456).valid  # non-strings unaffected

    def test_pattern_unanchored(self):
        assert validate({"pattern": "b+c"}, "aaabbbccc").valid
        assert not validate({"pattern": "^b+c$"}, "aaabbbccc").valid
        assert validate({"pattern": "b+c"}, 42).valid

    def test_numeric_bounds(self):
        schema = {"minimum": 0, "maximum": 10}
        assert validate(schema, 0).valid
        assert validate(schema, 10).valid
        assert not validate(schema, -0.5).valid
        assert not validate(schema, 10.5).valid
        assert validate(schema, True).valid  # bool is not a number here

    def test_required(self):
        report = validate({"required": ["id", "name"]}, {"id": "x"})
        assert not report.valid
        assert report.errors[0].path == ""
        assert report.errors[0].keyword == "required"
        assert "name" in report.errors[0].message

    def test_properties_recurse(self):
        schema = {"properties": {"n": {"type": "integer"}}}
        assert validate(schema, {"n": 1}).valid
        report = validate(schema, {"n": "x"})
        assert report.errors[0].path == "/n"

    def test_additional_properties_false(self):
        schema = {"properties": {"a": {}}, "additionalProperties": False}
        assert validate(schema, {"a": 1}).valid
        report = validate(schema, {"a": 1, "b": 2})
        assert not report.valid
        assert report.errors[0].path == "/b"
        assert report.errors[0].keyword == "additionalProperties"

    def test_additional_properties_schema(self):
        schema = {"properties": {"a": {}},
                  "additionalProperties": {"type": "string"}}
        assert validate(schema, {"a": 1, "b": "ok"}).valid
        report = validate(schema, {"b": 2})
        assert report.errors[0].path == "/b"
        assert report.errors[0].keyword == "type"

    def test_items(self):
        schema = {"type": "array", "items": {"type": "integer"}}
        assert validate(schema, [1, 2]).valid
        report = validate(schema, [1, "x", 2.5])
        paths = [e.path for e in report.errors]
        assert paths == ["/1", "/2"]

    def test_ref_across_documents(self):
        schema = {"properties": {
            "id": {"$ref": "./b.json#/definitions/id"}}}
        extra = ((B, {"definitions": {"id": {"type": "string",
                                             "minLength": 1}}}),)
        assert validate(schema, {"id": "x"}, extra).valid
        report = validate(schema, {"id": ""}, extra)
        assert not report.valid
        assert report.errors[0].path == "/id"
        assert report.errors[0].keyword == "minLength"

    def test_ref_wins_over_siblings(self):
        schema = {"definitions": {"s": {"type": "string"}},
                  "properties": {"v": {"$ref": "#/definitions/s",
                                       "type": "integer"}}}
        assert validate(schema, {"v": "text"}).valid
        assert not validate(schema, {"v": 1}).valid

    def test_nested_error_path_escaping(self):
        schema = {"properties": {"a/b": {"type": "integer"}}}
        report = validate(schema, {"a/b": "x"})
        assert report.errors[0].path == "/a~1b"

    def test_canonical_error_order(self):
        schema = {
            "properties": {
                "b": {"type": "integer"},
                "a": {"type": "string", "minLength": 2},
            },
            "required": ["z"],
        }
        report = validate(schema, {"a": 5, "b": "x"})
        keys = [(e.path, e.keyword) for e in report.errors]
        assert keys == sorted(keys)
        assert keys[0][0] == ""  # missing member reported at the object

    def test_unknown_keywords_ignored(self):
        schema = {"graph_element": "node", "parents": ["p"],
                  "type": "object"}
        assert validate(schema, {}).valid

    def test_unknown_schema_uri_raises(self):
        reg = SchemaRegistry()
        with pytest.raises(UnknownSchemaError):
            reg.validate(A, {})

    def test_malformed_subschema_raises(self):
        with pytest.raises(SchemaEngineError):
            validate({"properties": {"a": "not-a-schema"}}, {"a": 1})

    def test_unresolvable_ref_raises_not_reports(self):
        with pytest.raises(SchemaEngineError):
            validate({"$ref": "./missing.json#"}, {})

    def test_validation_is_pure(self):
        reg = make_registry((A, {"type": "string"}))
        before = canonical_json(reg.document(A))
        reg.validate(A, 1)
        reg.validate(A, "x")
        assert canonical_json(reg.document(A)) == before


class TestCanonicalJson:
    def test_sorted_and_compact(self):
        assert canonical_json({"b": 1, "a": [1, {"z": True, "y": None}]}) == \
            '{"a":[1,{"y":null,"z":true}],"b":1}'

    def test_unicode_preserved(self):
        assert canonical_json({"name": "Konstanzü"}) == \
            '{"name":"Konstanzü"}'

import pytest

from scenemon import (
    SceneValidationError,
    SpecSyntaxError,
    SpecTypeError,
    load_asg,
    parse_asg,
    serialize_asg,
)

SMALL = """
// standing in a parking spot
asg "parked" {
  node ego: Vehicle;
  node spot: ParkingSpot;
  ego ego;
  edge ego isIn spot;
  assert ego.velocity == 0;
}
"""


def test_parse_small(om):
    asg = parse_asg(SMALL, om)
    assert asg.name == "parked"
    assert asg.pattern_nodes == {"ego": "Vehicle", "spot": "ParkingSpot"}
    assert asg.pattern_edges == {("ego", "isIn", "spot")}
    assert asg.ego_pattern_id == "ego"
    assert len(asg.predicates) == 1
    assert asg.predicates[0].to_text() == "ego.velocity == 0"


def test_round_trip_structural_identity(om):
    asg = parse_asg(SMALL, om)
    again = parse_asg(serialize_asg(asg), om)
    assert again.pattern_nodes == asg.pattern_nodes
    assert again.pattern_edges == asg.pattern_edges
    assert again.predicates == asg.predicates
    assert serialize_asg(again) == serialize_asg(asg)


def test_number_formatting_minimal(om):
    asg = parse_asg(
        'asg "n" { node ego: Vehicle; ego ego; '
        'assert ego.velocity >= 15.0 and ego.velocity < 16.5; }', om)
    text = asg.predicates[0].to_text()
    assert ">= 15 " in text  # integral floats render without the trailing .0
    assert "16.5" in text


def test_negative_literal_and_interval(om):
    asg = parse_asg(
        'asg "n" { node ego: Vehicle; ego ego; '
        'assert ego.velocity in [-1, 2.5); }', om)
    assert asg.predicates[0].to_text() == "ego.velocity in [-1, 2.5)"


def test_string_escapes(om):
    asg = parse_asg('asg "a \\"quoted\\" name" { node ego: Vehicle; ego ego; }', om)
    assert asg.name == 'a "quoted" name'
    assert parse_asg(serialize_asg(asg), om).name == asg.name


def test_reserved_word_rejected_with_position(om):
    with pytest.raises(SpecSyntaxError) as err:
        parse_asg('asg "r" {\n  node assert: Vehicle;\n  ego assert;\n}', om)
    assert err.value.line == 2


def test_missing_ego_rejected(om):
    with pytest.raises(SpecTypeError, match="ego"):
        parse_asg('asg "r" { node v: Vehicle; }', om)


def test_duplicate_node_rejected(om):
    with pytest.raises(SpecTypeError):
        parse_asg('asg "r" { node ego: Vehicle; node ego: Vehicle; ego ego; }', om)


def test_unknown_class_located(om):
    with pytest.raises(SpecTypeError) as err:
        parse_asg('asg "r" {\n  node ego: Bicycle;\n  ego ego;\n}', om)
    assert err.value.line == 2


def test_unknown_relationship_rejected(om):
    with pytest.raises(SpecTypeError):
        parse_asg(
            'asg "r" { node ego: Vehicle; node v: Vehicle; ego ego; '
            'edge ego follows v; }', om)


def test_disconnected_pattern_rejected(om):
    with pytest.raises(SceneValidationError):
        parse_asg('asg "r" { node ego: Vehicle; node l: Lane; ego ego; }', om)


def test_ego_must_be_vehicle_class(om):
    with pytest.raises(SceneValidationError):
        parse_asg('asg "r" { node ego: Static; ego ego; }', om)


# type checking


def _expr_asg(om, pred, extra=""):
    return parse_asg(
        'asg "t" { node ego: Vehicle; node other: Static; node lane: Lane; '
        'ego ego; edge ego isIn lane; edge other isIn lane; ' + extra +
        f'assert {pred}; }}', om)


def test_velocity_compares_with_numbers(om):
    _expr_asg(om, "ego.velocity >= 6")
    _expr_asg(om, "dist(ego, other) in (0, 20]")
    _expr_asg(om, "ego.velocity == 0 and other.velocity == 0")


def test_bool_number_comparison_rejected(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "ego.velocity == true")


def test_ordering_on_bool_rejected(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "true < false")


def test_vec2_equality_rejected(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "ego.position == other.position")


def test_unknown_attribute_names_class(om):
    with pytest.raises(SpecTypeError, match="Lane"):
        _expr_asg(om, "lane.velocity == 0")


def test_call_arity_checked(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "dist(ego) > 1")


def test_call_node_args_must_be_declared(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "dist(ego, ghost) > 1")


def test_unknown_function_rejected(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "gap(ego, other) > 1")


def test_bare_node_outside_call_rejected(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "ego == other")


def test_and_needs_bool_operands(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "ego.velocity and true")


def test_interval_needs_numeric_subject(om):
    with pytest.raises(SpecTypeError):
        _expr_asg(om, "true in (0, 1)")


def test_assert_must_be_bool(om):
    with pytest.raises(SpecTypeError, match="Bool"):
        parse_asg('asg "t" { node ego: Vehicle; ego ego; assert ego.velocity; }', om)


def test_syntax_error_positions_are_one_based(om):
    with pytest.raises(SpecSyntaxError) as err:
        parse_asg('asg "x" {', om)
    assert err.value.line >= 1
    assert err.value.column >= 1


def test_load_asg_from_file(tmp_path, om):
    path = tmp_path / "p.asg"
    path.write_text(SMALL, encoding="utf-8")
    assert load_asg(str(path), om).name == "parked"

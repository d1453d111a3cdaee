"""
Unit tests for command-line parsing, usage errors and the output document.
"""

import json
import math
import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from omt_lab.cli import EXIT_ERROR, SCHEMA_VERSION, error_document, main, parse_args  # noqa: E402
from omt_lab.commands import COMMANDS  # noqa: E402
from omt_lab.errors import NonconstantRequiredError, UsageError  # noqa: E402
from omt_lab.settings import get_settings  # noqa: E402


# ============================================================================
# PARSING
# ============================================================================

@pytest.mark.unit
def test_lemma_defaults_are_resolved():
    """Test that every default appears in the parsed parameters."""
    config = parse_args(["lemma"])
    settings = get_settings()

    assert config.command == "lemma"
    assert config.seed == 0
    assert config.n == 100_000
    assert config.parameters["center"] == "0.0+0.0i"
    assert config.parameters["radius"] == 1.0
    assert config.parameters["arc_radius"] == 0.5
    assert config.parameters["theta1"] == 0.0
    assert config.parameters["theta2"] == math.pi
    assert config.parameters["step_dt"] == pytest.approx(settings.step_scale * 0.25)
    assert "set_center" not in config.parameters


@pytest.mark.unit
def test_lemma_flags():
    config = parse_args(["lemma", "--center", "1-2i", "--radius", "2", "--arc-radius", "1",
                         "--theta1", "0.5", "--theta2", "2", "--n", "50", "--seed", "42"])

    assert config.parameters["center"] == "1.0-2.0i"
    assert config.parameters["radius"] == 2.0
    assert config.parameters["theta1"] == 0.5
    assert config.n == 50
    assert config.seed == 42


@pytest.mark.unit
def test_lemma_open_set_flags_come_in_pairs():
    config = parse_args(["lemma", "--set-center", "0.5", "--set-radius", "0.1"])
    assert config.parameters["set_radius"] == 0.1

    with pytest.raises(UsageError) as excinfo:
        parse_args(["lemma", "--set-center", "0.5"])
    assert excinfo.value.flag == "--set-radius"


@pytest.mark.unit
def test_omt_parameters():
    """Test the omt flags, including a negative complex value written with '='."""
    config = parse_args(["omt", "--f", "z^2 + z", "--a=-0.5+0i", "--W-center", "0", "--W-radius", "2",
                         "--grid-cells", "8", "--threads", "2"])

    assert config.function_text == "z^2 + z"
    assert config.parameters["a"] == "-0.5+0.0i"
    assert config.parameters["r0"] == pytest.approx(0.75)
    assert config.parameters["grid_cells"] == 8
    assert config.worker_threads == 2


@pytest.mark.unit
def test_config_echo_contains_command_and_seed():
    echoed = parse_args(["invariance", "--f", "exp(z)", "--a", "0", "--seed", "7"]).to_dict()

    assert echoed["command"] == "invariance"
    assert echoed["seed"] == 7
    assert echoed["f"] == "exp(z)"
    assert echoed["radius"] is None
    assert echoed["step_scale"] == get_settings().step_scale
    assert echoed["out"] is None


# ============================================================================
# USAGE ERRORS
# ============================================================================

@pytest.mark.unit
@pytest.mark.parametrize("argv, flag", [
    (["lemma", "--radius", "-1"], "--radius"),
    (["lemma", "--radius", "0"], "--radius"),
    (["lemma", "--arc-radius", "1.5"], "--arc-radius"),
    (["lemma", "--n", "0"], "--n"),
    (["lemma", "--center", "1+i"], "--center"),
    (["lemma", "--bogus", "1"], "--bogus"),
    (["omt", "--a", "0", "--W-center", "0", "--W-radius", "1"], "--f"),
    (["omt", "--f", "z", "--a", "3", "--W-center", "0", "--W-radius", "1"], "--a"),
    (["omt", "--f", "z", "--a", "0", "--W-center", "0", "--W-radius", "1", "--oracle-points", "-5"],
     "--oracle-points"),
])
def test_usage_errors_name_the_flag(argv, flag):
    """Test that malformed invocations raise UsageError naming the flag."""
    with pytest.raises(UsageError) as excinfo:
        parse_args(argv)

    assert excinfo.value.flag == flag


@pytest.mark.unit
def test_unknown_command_is_a_usage_error():
    with pytest.raises(UsageError):
        parse_args(["prove"])


@pytest.mark.unit
def test_main_reports_usage_errors(capsys):
    """Test exit code 2 with a JSON error document and a stderr message."""
    code = main(["lemma", "--radius", "-1"])
    captured = capsys.readouterr()

    assert code == EXIT_ERROR
    document = json.loads(captured.out)
    assert document["schema"] == SCHEMA_VERSION
    assert document["command"] == "lemma"
    assert document["error"]["type"] == "UsageError"
    assert "--radius" in captured.err


@pytest.mark.unit
def test_main_reports_invalid_settings(monkeypatch, fresh_settings, capsys):
    """Test that a rejected OMT_LAB_* value ends with exit code 2 and an error document."""
    from omt_lab import settings as settings_module

    monkeypatch.setenv("OMT_LAB_STEP_SCALE", "-1")
    monkeypatch.setattr(settings_module, "_settings", None)

    code = main(["lemma", "--n", "10"])
    captured = capsys.readouterr()

    assert code == EXIT_ERROR
    document = json.loads(captured.out)
    assert document["schema"] == SCHEMA_VERSION
    assert document["command"] == "lemma"
    assert document["error"]["type"] == "ValidationError"
    assert "step_scale" in document["error"]["message"]
    assert "OMT_LAB_" in captured.err


@pytest.mark.unit
def test_main_rejects_constant_functions(capsys):
    """Test that a constant f ends with exit code 2 and 'nonconstant required'."""
    code = main(["omt", "--f", "5", "--a", "0", "--W-center", "0", "--W-radius", "1", "--n", "10", "--quiet"])
    document = json.loads(capsys.readouterr().out)

    assert code == EXIT_ERROR
    assert document["error"]["type"] == "NonconstantRequiredError"
    assert "nonconstant required" in document["error"]["message"]


@pytest.mark.unit
def test_main_rejects_malformed_expressions(capsys):
    code = main(["omt", "--f", "z^", "--a", "0", "--W-center", "0", "--W-radius", "1", "--n", "10", "--quiet"])

    assert code == EXIT_ERROR
    assert json.loads(capsys.readouterr().out)["error"]["type"] == "ExpressionSyntaxError"


@pytest.mark.unit
def test_error_document_layout():
    document = error_document("omt", NonconstantRequiredError("nonconstant required: f is constant"))

    assert document == {
        "schema": SCHEMA_VERSION,
        "command": "omt",
        "error": {"type": "NonconstantRequiredError", "message": "nonconstant required: f is constant"},
    }


@pytest.mark.unit
def test_every_command_parses_with_required_flags():
    """Test that each registered command accepts its minimal invocation."""
    minimal = {
        "lemma": [],
        "uniformity": [],
        "invariance": ["--f", "z^2", "--a", "1"],
        "omt": ["--f", "z^2", "--a", "0", "--W-center", "0", "--W-radius", "2"],
    }

    assert set(minimal) == set(COMMANDS)
    for command, flags in minimal.items():
        assert parse_args([command, *flags]).command == command


# ============================================================================
# INVARIANCE RADIUS
# ============================================================================

def _invariance_parameters(*flags: str) -> dict:
    return parse_args(["invariance", "--f", "z", "--a", "0", *flags]).parameters


@pytest.mark.unit
def test_invariance_radius_defaults_to_the_radius_search():
    """Test that without --radius the stopping radius is halved until the margin is positive."""
    from omt_lab.analytic import parse_expression
    from omt_lab.commands.invariance import START_RADIUS, stopping_radius

    f = parse_expression("z^2 - 0.5*z")

    assert stopping_radius(parse_expression("z^2"), 1, 1, _invariance_parameters()) == START_RADIUS
    assert stopping_radius(f, 0, 0, _invariance_parameters()) == START_RADIUS / 2


@pytest.mark.unit
def test_invariance_explicit_radius_is_kept():
    from omt_lab.analytic import parse_expression
    from omt_lab.commands.invariance import stopping_radius

    assert stopping_radius(parse_expression("z^2 - 0.5*z"), 0, 0, _invariance_parameters("--radius", "0.5")) == 0.5

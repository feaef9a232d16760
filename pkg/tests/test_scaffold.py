"""Smoke test verifying the package scaffold is correctly set up."""
import mufno
from mufno.cli import COMMANDS, build_parser
from mufno.errors import EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL, MufnoError
from mufno.model.params import FnoConfig
from mufno.training.parametrization import HyperParams, Parametrization


def test_version_is_exposed() -> None:
    """The package exposes a dotted version string."""
    assert mufno.__version__.count(".") == 2


def test_default_configs_construct() -> None:
    """The main config types build with their defaults."""
    assert FnoConfig().L == 4
    assert Parametrization().kind == "mup"
    assert HyperParams().batch_size == 20


def test_every_command_is_registered() -> None:
    """Each CLI command has a parser entry."""
    parser = build_parser()
    for name in COMMANDS:
        args = parser.parse_args([name, "--config", "x.json"])
        assert args.command == name


def test_exit_codes_are_distinct() -> None:
    """Config, data and internal failures map to different exit codes."""
    assert len({EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL}) == 3


def test_base_error_is_exception() -> None:
    """MufnoError is a subclass of Exception."""
    assert issubclass(MufnoError, Exception)

"""
Tests for CLI argument parser
"""

import pytest

from urlab.cli.executor import VERBS
from urlab.cli.parser import create_parser, parse_arguments


@pytest.mark.unit
class TestCLIParser:
    """Test CLI argument parser"""

    @pytest.fixture
    def parser(self):
        """Create parser instance"""
        return create_parser()

    def test_default_arguments(self, parser):
        """Unset flags stay None so lower config layers apply"""
        args = parser.parse_args(["solve"])

        assert args.verb == "solve"
        assert args.config is None
        assert args.h is None
        assert args.threads is None
        assert args.seed is None
        assert args.out is None
        assert args.format is None
        assert args.svg is None
        assert args.verbose is None
        assert args.quiet is None

    @pytest.mark.parametrize("verb", VERBS)
    def test_every_verb_accepted(self, parser, verb):
        assert parser.parse_args([verb]).verb == verb

    def test_unknown_verb(self, parser):
        with pytest.raises(SystemExit):
            parser.parse_args(["plot"])

    def test_verb_required(self, parser):
        with pytest.raises(SystemExit):
            parser.parse_args([])

    def test_spacing_ladder(self, parser):
        """--h repeats into a refinement ladder"""
        args = parser.parse_args(["functional", "--h", "0.015625", "--h", "0.0078125"])
        assert args.h == [0.015625, 0.0078125]

    def test_spacing_must_be_numeric(self, parser):
        with pytest.raises(SystemExit):
            parser.parse_args(["solve", "--h", "fine"])

    def test_run_options(self, parser):
        args = parser.parse_args(["bwgl", "--config", "cantor.yaml", "--threads", "4", "--seed", "7"])

        assert args.config == "cantor.yaml"
        assert args.threads == 4
        assert args.seed == 7

    def test_output_options(self, parser):
        args = parser.parse_args(["report", "--out", "runs", "--format", "json", "--svg"])

        assert args.out == "runs"
        assert args.format == "json"
        assert args.svg is True

    def test_invalid_format(self, parser):
        with pytest.raises(SystemExit):
            parser.parse_args(["report", "--format", "html"])

    def test_output_control(self, parser):
        args = parser.parse_args(["solve", "-v", "-q"])
        assert args.verbose is True
        assert args.quiet is True

    def test_parse_arguments(self):
        args = parse_arguments(["gen-boundary", "--config", "plane.yaml"])
        assert args.verb == "gen-boundary"
        assert args.config == "plane.yaml"

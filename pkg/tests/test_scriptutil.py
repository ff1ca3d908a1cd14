import io
import logging

import pytest

from holobf.logging import (
    LoggingOverrideFormatter, get_logger, label2level, set_default_handlers,
    set_logging_level, verbosity2level,
)
from holobf.scriptutil import (
    RunConfigParser, generate_default_parser, guarantee_path, parse_args_or_help,
    parse_docstring_description,
)

DOC = """Short summary.

Longer description
over two lines.

Changelog:
    2026-01-01, Justin: Init
"""


class TestParsing:

    def test_description_drops_changelog(self):
        assert parse_docstring_description(DOC) == "Short summary.\n\nLonger description over two lines."

    def test_key_value_with_sections(self):
        items = RunConfigParser().parse(io.StringIO("[sweep]\ngrid = 3\ntol = 1e-4\n"))
        assert dict(items) == {"grid": "3", "tol": "1e-4"}

    def test_manifest_config(self):
        text = '{"version": "0", "config": {"epsilon_min": 0.1, "lenient": true, "out": null, "command": "sweep"}}'
        items = RunConfigParser().parse(io.StringIO(text))
        assert items == {"epsilon-min": "0.1", "lenient": "true"}

    def test_parser_help(self, capsys):
        parser = generate_default_parser(DOC, "demo")
        parser.add_argument("-h", "--help", action="store_true")
        parser.add_argument("--tol", type=float, default=1.0)
        assert parse_args_or_help(parser, ["--tol", "2"]).tol == 2.0
        with pytest.raises(SystemExit) as e:
            parse_args_or_help(parser, ["-h"])
        assert e.value.code == 0
        assert "Short summary." in capsys.readouterr().err

    def test_guarantee_path(self, tmp_path):
        f = guarantee_path(tmp_path / "a" / "b.txt", "f")
        assert f.is_file()
        with pytest.raises(ValueError):
            guarantee_path(tmp_path / "a", "f")
        with pytest.raises(ValueError):
            guarantee_path(tmp_path / "missing")


class TestLogging:

    def test_levels(self):
        assert verbosity2level(0) == logging.WARNING
        assert verbosity2level(5) == logging.DEBUG
        assert label2level("Info") == logging.INFO
        assert label2level("unknown") == logging.WARNING

    def test_details(self):
        stream = io.StringIO()
        logger = get_logger("holobf.tests.details")
        set_default_handlers(logger, stream=stream, human_readable=True)
        set_logging_level(logger, 1)
        logger.info("romberg", extra={"details": ["level 2: 0.43", "level 3: 0.4274"]})
        lines = stream.getvalue().splitlines()
        assert lines[0].endswith("| romberg")
        assert lines[1].strip() == "|   level 2: 0.43"
        logger.debug("hidden")
        assert "hidden" not in stream.getvalue()

    def test_grepable_details(self):
        formatter = LoggingOverrideFormatter(fmt="{message}", style="{")
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "sweep", None, None)
        record.details = {"eps": 0.1}
        assert formatter.format(record) == "sweep\t{'eps': 0.1}"

    def test_default_handlers_are_replaced(self, tmp_path):
        logger = get_logger("holobf.tests.replaced")
        set_default_handlers(logger, stream=io.StringIO())
        set_default_handlers(logger, stream=False, file=tmp_path / "run.log")
        assert len(logger.handlers) == 1
        set_logging_level(logger, 0)
        logger.warning("sweep", extra={"details": ["eps=0.1: 0.25"]})
        logger.handlers[0].flush()
        assert "sweep\t['eps=0.1: 0.25']" in (tmp_path / "run.log").read_text()

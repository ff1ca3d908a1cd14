#!/usr/bin/env python3
# Justin, 2026-01-14
"""Parser boilerplate for the 'holobf' script.

Options resolve in the usual configargparse order: command line, environment,
'--config' file, '<script>.default.conf' in the working directory, defaults.
Config files are either 'key = value' lines or JSON, in particular the
manifest written next to every output file.

Changelog:
    2026-01-14, Justin: Init
    2026-03-12, Justin: Manifests as config files, commands stay on the command line.
"""

__all__ = [
    "ArgparseCustomFormatter", "RunConfigParser", "generate_default_parser",
    "parse_args_or_help", "guarantee_path", "parse_docstring_description",
]

import argparse
import json
import pathlib
import re
import sys

import configargparse

# https://stackoverflow.com/a/23941599
class ArgparseCustomFormatter(argparse.RawDescriptionHelpFormatter):

    RAW_INDICATOR = "rawtext|"

    def _format_action_invocation(self, action):
        if not action.option_strings:
            metavar, = self._metavar_formatter(action, action.dest)(1)
            return metavar

        # Render '-s, --long ARGS' instead of '-s ARGS, --long ARGS'
        parts = list(action.option_strings)
        if action.nargs != 0:
            default = action.dest.upper()
            args_string = self._format_args(action, default)
            parts[-1] += f" {args_string}"
        return ", ".join(parts)

    def _split_lines(self, text, width):
        marker = ArgparseCustomFormatter.RAW_INDICATOR
        if text.startswith(marker):
            return text[len(marker):].splitlines()
        return super()._split_lines(text, width)


class RunConfigParser(configargparse.ConfigFileParser):
    """Reads either key=value config files or JSON documents.

    Key-value files follow 'configargparse.DefaultConfigFileParser', where
    '[section]' headers are treated as comments, so that run configurations
    can be grouped by command without changing their meaning.

    A JSON document is recognized by its leading '{'. If it carries a
    "config" member, as in the manifest written next to every output file,
    that member is used instead, so that a run can be reproduced directly
    from its manifest.
    """

    positionals = ("command",)

    def __init__(self):
        super().__init__()
        self._fallback = configargparse.DefaultConfigFileParser()

    def get_syntax_description(self):
        return (
            "Either 'key = value' lines with optional [sections], "
            "or a JSON object (a run manifest's 'config' member is used)."
        )

    def parse(self, stream):
        text = stream.read()
        if text.lstrip().startswith("{"):
            try:
                document = json.loads(text)
            except json.JSONDecodeError as e:
                raise configargparse.ConfigFileParserException(
                    f"Invalid JSON config at line {e.lineno}: {e.msg}"
                )
            if isinstance(document.get("config"), dict):
                document = document["config"]
            items = {}
            for key, value in document.items():
                # Positionals, i.e. the command, are given on the command line
                if value is None or key in self.positionals:
                    continue
                if isinstance(value, bool):
                    value = "true" if value else "false"
                elif isinstance(value, (list, tuple)):
                    value = [str(v) for v in value]
                else:
                    value = str(value)
                items[str(key).replace("_", "-")] = value
            return items

        # Key-value syntax, with sections treated as comments
        lines = []
        for line in text.splitlines():
            if re.match(r"^\s*\[[^\]]*\]\s*$", line):
                line = f"# {line.strip()}"
            lines.append(line)
        return self._fallback.parse(iter(lines))

    def serialize(self, items):
        return self._fallback.serialize(items)


def generate_default_parser(moduledoc, script_name=None):
    if script_name is None:
        script_name = pathlib.Path(sys.argv[0]).name
    parser = configargparse.ArgumentParser(
        default_config_files=[f"{script_name}.default.conf"],
        description=parse_docstring_description(moduledoc),
        formatter_class=ArgparseCustomFormatter,
        config_file_parser_class=RunConfigParser,
        add_help=False,
    )
    return parser


def parse_args_or_help(parser, argv=None, ignore_unknown=False):
    """Boilerplate to parse arguments and print help if needed.

    Unlike a bare script, an empty command line is meaningful here (it runs
    the default command), so help is only printed on request.
    """
    if ignore_unknown:
        args, _ = parser.parse_known_args(args=argv)
    else:
        args = parser.parse_args(args=argv)

    if getattr(args, "help", None):
        parser.print_help(sys.stderr)
        sys.exit(0)
    return args

def guarantee_path(path, type=None):
    """Checks if path is of specified type, and returns wrapper to Path."""

    assert type in (None, "f", "d")  # file, directory
    path = pathlib.Path(path)

    # Useful for when path is expected to exist
    if type is None:
        if not path.exists():
            raise ValueError(f"Path '{path}' does not exist")
        return path

    if path.exists():
        if type == "f" and not path.is_file():
            raise ValueError(f"Path '{path}' is not a file")
        if type == "d" and not path.is_dir():
            raise ValueError(f"Path '{path}' is not a directory")
        return path

    # Filetype specified but path does not exist -> create
    if type == "f":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.touch()
    elif type == "d":
        path.mkdir(parents=True)
    return path

def parse_docstring_description(docstring):
    placeholder = "~~~PLACEHOLDER~~~"
    # Remove all changelog information
    d = (docstring or "").partition("Changelog:")[0]

    # Replace all newlines except the first
    d = re.sub(r"\n+", placeholder, d.strip(), count=1)
    d = re.sub(r"\n+", " ", d)
    d = re.sub(placeholder, "\n\n", d)
    return d


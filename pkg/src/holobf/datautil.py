#!/usr/bin/env python3
# Justin, 2026-01-14
"""Provides helper functions for output artifacts.

Every file written by the command line carries a manifest: the library
version, the frozen lambda constants, the quadrature grid, seed and
tolerances, the sign convention and an echo of the configuration. A manifest
can be fed back through '--config' to reproduce the run.

Sweep CSVs carry the manifest as a leading "# manifest: {...}" line, plus
a '<path>.manifest.json' sidecar; JSON reports embed it under "manifest".
"""

__all__ = [
    "pprint", "DataEncoder", "data_decoder", "build_manifest",
    "write_sweep_csv", "read_sweep_csv", "write_report", "SWEEP_COLUMNS",
]

import csv
import dataclasses
import datetime as dt
import enum
import json
import pathlib
from typing import Optional, Type

import numpy as np
import sympy
import tqdm
import uncertainties

import holobf
from holobf import constants
from holobf.common import DomainError
from holobf.scriptutil import guarantee_path

SWEEP_COLUMNS = ("epsilon", "L", "graph_id", "value", "error_estimate")
MANIFEST_PREFIX = "# manifest: "

def pprint(
        *values,
        width: int = 7,
        out: Optional[str] = None,
        pbar: Optional[Type[tqdm.tqdm]] = None,
        stdout: bool = True,
):
    """Prints right-aligned columns of fixed width.

    Args:
        out: Optional filepath to append the tab-delimited row to.
        pbar: tqdm.ProgressBar, whose description is updated instead.
        stdout: Determines if should write to console.

    Note:
        The default column width of 7 fits 10 space-separated columns into
        an 80-width terminal.
    """
    array = [str(value) for value in values]

    if pbar:
        pbar.set_description(" ".join(array))
    elif stdout:
        line = " ".join([f"{value: >{width}s}" for value in array])
        print(line)

    if out:
        line = "\t".join(array) + "\n"
        with open(out, "a") as f:
            f.write(line)


class DataEncoder(json.JSONEncoder):
    """Usage: json.dump(..., cls=DataEncoder)"""
    _DT2STR = lambda x: x.strftime("%Y%m%d_%H%M%S.%f")
    def default(self, obj):
        if isinstance(obj, dt.datetime):
            return {"_dt": DataEncoder._DT2STR(obj)}
        if isinstance(obj, np.ndarray):
            if obj.dtype.kind == "c":
                return {"_np": obj.real.tolist(), "_np_imag": obj.imag.tolist()}
            return {"_np": obj.tolist()}
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, (complex, np.complexfloating)):
            return {"real": float(obj.real), "imag": float(obj.imag)}
        if isinstance(obj, uncertainties.core.AffineScalarFunc):
            return {"nominal": obj.nominal_value, "std": obj.std_dev}
        if isinstance(obj, sympy.Basic):
            return str(obj)
        if isinstance(obj, enum.Enum):
            return obj.name.lower()
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        if isinstance(obj, (set, frozenset, tuple)):
            return list(obj)
        return super().default(obj)

def data_decoder(dct):
    """Usage: json.load(..., object_hook=data_decoder)"""
    if "_dt" in dct:
        return dt.datetime.strptime(dct["_dt"], "%Y%m%d_%H%M%S.%f")
    if "_np" in dct:
        if "_np_imag" in dct:
            return np.array(dct["_np"]) + 1j*np.array(dct["_np_imag"])
        return np.array(dct["_np"])
    return dct


def build_manifest(config=None, **extra):
    """Collects the provenance of a run into a JSON-serializable dict.

    Args:
        config: Mapping (or argparse Namespace) of the effective configuration.
        extra: Additional entries, e.g. 'grid' or 'tol', overriding defaults.
    """
    if config is not None and not isinstance(config, dict):
        config = dict(vars(config))
    config = {
        k: v for k, v in (config or {}).items()
        if k not in ("help", "save", "config", "quiet", "verbosity", "logging")
    }
    manifest = {
        "version": holobf.__version__,
        "constants": {
            "lambda_c1": str(constants.LAMBDA_C1),
            "lambda_c2": str(constants.LAMBDA_C2),
        },
        "sign_convention": constants.SIGN_CONVENTION,
        "grid": config.get("grid"),
        "seed": config.get("seed"),
        "tol": config.get("tol"),
        "config": config,
    }
    manifest.update(extra)
    return manifest

def _output_path(path) -> pathlib.Path:
    try:
        return guarantee_path(path, "f")
    except ValueError as e:
        raise DomainError(f"Cannot write output: {e}") from e

def write_sweep_csv(path, rows, manifest):
    """Writes sweep rows as CSV, led by the manifest as a comment line.

    The manifest is also written as a JSON sidecar, which '--config' accepts
    for reruns. Use 'read_sweep_csv' to recover both rows and manifest.

    Args:
        path: Output CSV path, parent directories are created.
        rows: Iterable of mappings with keys in 'SWEEP_COLUMNS'.
        manifest: Written as the first line "# manifest: {...}", and to
            '<path>.manifest.json'.

    Returns:
        Tuple of (csv path, manifest path).
    """
    path = _output_path(path)
    with open(path, "w", newline="") as f:
        f.write(MANIFEST_PREFIX + json.dumps(manifest, cls=DataEncoder, sort_keys=True) + "\n")
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({
                k: (repr(float(row[k])) if k != "graph_id" else row[k])
                for k in SWEEP_COLUMNS
            })

    manifest_path = path.with_name(path.name + ".manifest.json")
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, cls=DataEncoder, indent=2, sort_keys=True)
    return path, manifest_path

def read_sweep_csv(path):
    """Returns (rows, manifest) of a file written by 'write_sweep_csv'.

    Numeric columns are parsed as floats; the manifest is None for a CSV
    without the leading comment line.
    """
    manifest, lines = None, []
    with open(path, newline="") as f:
        for line in f:
            if line.startswith(MANIFEST_PREFIX):
                manifest = json.loads(line[len(MANIFEST_PREFIX):], object_hook=data_decoder)
            elif not line.startswith("#"):
                lines.append(line)
    rows = [
        {k: (v if k == "graph_id" else float(v)) for k, v in row.items()}
        for row in csv.DictReader(lines)
    ]
    return rows, manifest

def write_report(path, report, manifest):
    """Writes a JSON report with the manifest embedded under 'manifest'."""
    document = dict(report)
    document["manifest"] = manifest
    text = json.dumps(document, cls=DataEncoder, indent=2, sort_keys=True)
    if path is None:
        return text
    with open(_output_path(path), "w") as f:
        f.write(text + "\n")
    return text

"""JSON schemas and the shipped fixtures."""

import json
from importlib import resources

import numpy as np

from .errors import SchemaError
from .qstate import BASIS_1Q, BASIS_2Q, validate_density_matrix
from .tomo import MeasurementSet


def dumps(obj):
    """Stable serialization; identical inputs give byte-identical text."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def write_text(path, text):
    if path in (None, "-"):
        import sys

        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def density_from_dict(d, tol=1e-9):
    try:
        basis = tuple(d.get("basis", BASIS_2Q))
        re = np.array(d["re"], dtype=float)
        im = np.array(d.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed density-matrix JSON: {exc}") from None
    if re.ndim != 2 or re.shape != im.shape or re.shape[0] != re.shape[1]:
        raise SchemaError(f"re/im must be matching square arrays, got {re.shape} and {im.shape}")
    expected = BASIS_2Q if re.shape[0] == 4 else BASIS_1Q
    if basis != expected:
        raise SchemaError(f"basis must be {list(expected)}, got {list(basis)}")
    return validate_density_matrix(re + 1j * im, tol)


def read_density(path, tol=1e-9):
    return density_from_dict(read_json(path), tol)


def read_measurements(path):
    return MeasurementSet.from_dict(read_json(path))


def _fixture(name):
    return json.loads(resources.files("polartomo").joinpath("data").joinpath(name).read_text())


def load_table1():
    return MeasurementSet.from_dict(_fixture("table1.json"))


def load_rho3d():
    return density_from_dict(_fixture("rho3d.json"))


def fixture_path(name):
    return str(resources.files("polartomo").joinpath("data").joinpath(name))

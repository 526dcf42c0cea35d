# -*- coding: utf-8 -*-
"""
Artifact helpers: config hashing, CSV/JSON writers with provenance, and
small numeric routines shared between modules.
"""
import hashlib
import json
import logging
import re
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from . import constants as cnst

_HEADER_PREFIX = "# graphviewpoints"
_HEADER_PATTERN = re.compile(r"^# graphviewpoints registry=(\S+) config=(\S*)\s*$")


def config_hash(config: Mapping[str, Any]) -> str:
    """
    Stable short hash of a configuration mapping.

    Args:
        config: JSON-serialisable mapping.

    Returns:
        First 16 hex digits of SHA-256 over the canonical JSON encoding.
    """
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def artifact_header(config_hash: str) -> str:
    return f"{_HEADER_PREFIX} registry={cnst.REGISTRY_VERSION} config={config_hash}"


def write_csv(frame: pd.DataFrame, filename: str, config_hash: str, index: bool = False) -> None:
    """
    Write a DataFrame as UTF-8 CSV preceded by the provenance comment line.

    Args:
        frame:          Table to write.
        filename:       Destination path.
        config_hash:    Hash of the configuration that produced the table.
        index:          Whether to write the index as leading columns.
    """
    with open(filename, "w", encoding="utf-8", newline="") as f:
        f.write(artifact_header(config_hash) + "\n")
        frame.to_csv(f, index=index, lineterminator="\n")
    logging.debug(f"Wrote {len(frame)} rows to {filename}")


def read_csv_header(filename: str) -> Tuple[Optional[str], Optional[str]]:
    """
    Read the provenance comment of a CSV artifact.

    Returns:
        (registry_version, config_hash), or (None, None) for a plain CSV.
    """
    with open(filename, "r", encoding="utf-8") as f:
        first = f.readline()
    match = _HEADER_PATTERN.match(first)
    if match is None:
        return None, None
    return match.group(1), match.group(2)


def read_csv(filename: str, **kwargs) -> pd.DataFrame:
    """
    Read a CSV artifact, skipping its provenance line if present.

    Extra keyword arguments go to pandas.read_csv. The config hash is kept
    in the frame's attrs under "config_hash".
    """
    registry, digest = read_csv_header(filename)
    if registry is not None and registry != cnst.REGISTRY_VERSION:
        logging.warning(f"{filename} was written with measure registry {registry}, "
                        f"current is {cnst.REGISTRY_VERSION}")
    frame = pd.read_csv(filename, skiprows=1 if registry is not None else 0, **kwargs)
    frame.attrs["config_hash"] = digest or ""
    return frame


def write_json(payload: Dict[str, Any], filename: str, config_hash: str) -> None:
    """Write a JSON artifact carrying config_hash and registry_version keys."""
    document = dict(payload)
    document["config_hash"] = config_hash
    document["registry_version"] = cnst.REGISTRY_VERSION
    with open(filename, "w", encoding="utf-8", newline="") as f:
        json.dump(document, f, sort_keys=True, indent=2)
        f.write("\n")


def read_json(filename: str) -> Dict[str, Any]:
    with open(filename, "r", encoding="utf-8") as f:
        return json.load(f)


def sorted_eigenpairs(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a symmetric matrix with a deterministic layout.

    Args:
        matrix: Symmetric positive semi-definite matrix.

    Returns:
        (vectors, values): eigenvectors as columns, eigenvalues descending and
        clipped at 0. Each eigenvector is signed so its largest-magnitude
        component is nonnegative, the earliest component winning ties.
    """
    values, vectors = np.linalg.eigh(matrix)
    order = np.argsort(-values, kind="stable")
    values = np.clip(values[order], 0.0, None)
    vectors = vectors[:, order]
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[pivots, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs, values

"""Chain-spec documents: lossless JSON for chains and their design provenance."""
import hashlib
import json
import math

import numpy as np

from . import __version__
from .errors import DesignError
from .synthesis import ChainSpec

FORMAT_VERSION = 1


def canonical_hash(payload):
    """``sha256:`` digest of the canonical (sorted, compact) JSON of ``payload``."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def _floats(arr):
    # float(repr) round-trips exactly; json writes the shortest such repr.
    return [float(v) for v in np.asarray(arr, dtype=float)]


def build_document(chain, design, derived, request_payload):
    """Assemble the document; key order is fixed so output is byte-stable."""
    return {
        "version": FORMAT_VERSION,
        "boundary": chain.boundary,
        "masses": _floats(chain.masses),
        "springs": _floats(chain.springs),
        "design": design,
        "derived": derived,
        "provenance": {
            "tool": f"qcradle {__version__}",
            "input_hash": canonical_hash(request_payload),
        },
    }


def dumps(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def loads(text):
    doc = json.loads(text)
    validate_document(doc)
    return doc


def write(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


_REQUIRED = ("version", "boundary", "masses", "springs", "design", "derived")


def validate_document(doc):
    if not isinstance(doc, dict):
        raise DesignError("document", "chain spec must be a JSON object")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise DesignError("document", f"chain spec lacks fields: {', '.join(missing)}")
    if doc["version"] != FORMAT_VERSION:
        raise DesignError("document", f"unsupported chain spec version {doc['version']!r}")
    for key in ("masses", "springs"):
        vals = doc[key]
        if not isinstance(vals, list) or not all(isinstance(v, (int, float)) for v in vals):
            raise DesignError("document", f"{key} must be a list of numbers")
        if not all(math.isfinite(v) for v in vals):
            raise DesignError("document", f"{key} contains non-finite values")


def chain_from_document(doc):
    des = doc["design"]
    return ChainSpec(boundary=doc["boundary"], masses=np.array(doc["masses"], dtype=float),
                     springs=np.array(doc["springs"], dtype=float),
                     alpha=float(des.get("alpha", 0.5)), omega=float(des.get("omega", 1.0)))

"""Persistent experiment records: full command, input hashes, seeds, and
output hashes, so any run can be replayed and checked byte for byte.

Timing lives only in the record itself, never in the outputs, so replaying
a record reproduces every output file exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__
from .errors import FormatError
from .serialize import dump_file


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def write_record(path, argv: list, flags: dict, inputs: list, seeds: dict,
                 outputs: list, timing: float):
    record = {
        "command": [str(a) for a in argv],
        "flags": {k: v for k, v in flags.items() if v is not None},
        "inputHashes": {str(p): sha256_file(p) for p in inputs},
        "seeds": seeds,
        "version": __version__,
        "timingSeconds": timing,
        "outputs": {str(p): sha256_file(p) for p in outputs},
    }
    dump_file(record, path, schema="record")
    return record


def replay(record_path, runner) -> int:
    """Re-execute a recorded command and compare output hashes.

    ``runner`` is cli.run; returns 0 when every output is byte-identical,
    1 on any mismatch.
    """
    with open(record_path) as fh:
        record = json.load(fh)
    argv = record.get("command")
    if not argv:
        raise FormatError("record has no command")
    code = runner(argv)
    if code != 0:
        return code
    ok = True
    for path, digest in record.get("outputs", {}).items():
        if not Path(path).exists():
            print(f"replay: missing output {path}")
            ok = False
        elif sha256_file(path) != digest:
            print(f"replay: output differs: {path}")
            ok = False
    for path, digest in record.get("inputHashes", {}).items():
        if Path(path).exists() and sha256_file(path) != digest:
            print(f"replay: input changed since recording: {path}")
            ok = False
    return 0 if ok else 1

"""Config parsing and run manifests.

Configs are flat key-value text with section headers (configparser syntax);
every numeric value is an exact integer or a fraction string "p/q", so files
diff cleanly and parse identically everywhere. Run manifests capture the
command, the full config echo, seeds, versions, timing and SHA-256 digests
of every produced file; identical inputs reproduce identical digests.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import platform
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num.strip()), int(den.strip()))
    return Fraction(int(text))


def parse_fraction_list(text: str) -> list[Fraction]:
    return [parse_fraction(part) for part in text.split(",") if part.strip()]


def parse_vector(text: str) -> list[Fraction]:
    return parse_fraction_list(text)


def parse_matrix(text: str) -> list[list[Fraction]]:
    """Rows separated by ';', entries by ','."""
    rows = [parse_fraction_list(row) for row in text.split(";") if row.strip()]
    if not rows:
        raise ValueError("empty matrix")
    if any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    return rows


def load_config(path: str | Path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    return cp


def config_echo(cp: configparser.ConfigParser) -> dict:
    return {section: dict(cp[section]) for section in cp.sections()}


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: dict
    seed: int | None
    started_at: float = field(default_factory=time.time)
    outputs: dict = field(default_factory=dict)

    def add_output(self, path: Path) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def write(self, path: Path) -> None:
        try:
            from importlib.metadata import version

            pkg_version = version("subdioph")
        except Exception:
            pkg_version = "unknown"
        body = {
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "seed": self.seed,
            "versions": {"subdioph": pkg_version, "python": platform.python_version()},
            "started_at": self.started_at,
            "duration_s": round(time.time() - self.started_at, 3),
            "outputs": self.outputs,
        }
        path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")

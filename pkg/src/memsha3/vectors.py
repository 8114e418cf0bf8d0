"""Reader for NIST CAVP ``.rsp`` known-answer files (SHA3 ShortMsg/LongMsg).

Records are ``Len = <bits>`` / ``Msg = <hex>`` / ``MD = <hex>`` groups;
``[L = <bits>]`` headers select the digest length. The zero-length record
carries a placeholder ``Msg = 00``, so the message is always cut to ``Len``
bits. Malformed records are collected as issues with their line number
instead of aborting the parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

_HEADER = re.compile(r"^\[\s*L\s*=\s*(\d+)\s*\]$")
_FIELD = re.compile(r"^(\w+)\s*=\s*(.*)$")


@dataclass(frozen=True)
class VectorRecord:
    line: int  # line of the record's first field
    message: bytes
    digest: bytes
    variant: str


@dataclass(frozen=True)
class ParseIssue:
    line: int
    reason: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.reason}"


def _variant(bits: int) -> str:
    return f"SHA3-{bits}"


def _hex(value: str) -> bytes:
    value = value.strip()
    if len(value) % 2:
        raise ValueError("odd number of hex digits")
    return bytes.fromhex(value)


def parse_rsp(text: str, default_variant: str | None = None) -> tuple[list[VectorRecord], list[ParseIssue]]:
    records: list[VectorRecord] = []
    issues: list[ParseIssue] = []
    digest_bits = int(default_variant.split("-")[1]) if default_variant else None
    fields: dict[str, tuple[int, str]] = {}

    def close():
        if not fields:
            return
        first = min(n for n, _ in fields.values())
        try:
            records.append(_build(fields, digest_bits))
        except ValueError as e:
            issues.append(ParseIssue(first, str(e)))
        fields.clear()

    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            close()
            digest_bits = int(m.group(1))
            continue
        m = _FIELD.match(line)
        if not m:
            close()
            issues.append(ParseIssue(n, f"unrecognized line {raw.strip()!r}"))
            continue
        key = m.group(1).capitalize() if m.group(1).lower() != "md" else "MD"
        if key in fields:  # a repeated key starts a new record
            close()
        fields[key] = (n, m.group(2))
        if key == "MD":
            close()
    close()
    return records, issues


def _build(fields: dict, digest_bits: int | None) -> VectorRecord:
    line = min(n for n, _ in fields.values())
    if "Msg" not in fields or "MD" not in fields:
        missing = [k for k in ("Msg", "MD") if k not in fields]
        raise ValueError(f"record lacks {', '.join(missing)}")
    try:
        msg = _hex(fields["Msg"][1])
        md = _hex(fields["MD"][1])
    except ValueError as e:
        raise ValueError(f"bad hex: {e}") from None
    if "Len" in fields:
        try:
            bits = int(fields["Len"][1])
        except ValueError:
            raise ValueError(f"bad Len {fields['Len'][1]!r}") from None
        if bits % 8:
            raise ValueError(f"Len = {bits} is not a whole number of bytes")
        if bits // 8 > len(msg):
            raise ValueError(f"Len = {bits} exceeds the {len(msg)}-byte message")
        msg = msg[: bits // 8]
    if digest_bits is None:
        digest_bits = 8 * len(md)
    if 8 * len(md) != digest_bits:
        raise ValueError(f"digest has {8 * len(md)} bits, expected {digest_bits}")
    if digest_bits not in (224, 256, 384, 512):
        raise ValueError(f"no SHA3 variant with a {digest_bits}-bit digest")
    return VectorRecord(line, msg, md, _variant(digest_bits))


def load_rsp(path: str | Path, default_variant: str | None = None):
    return parse_rsp(Path(path).read_text(), default_variant)

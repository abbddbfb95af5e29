"""Attack scenario domain: attribute kinds, vocabularies, and the pattern catalog."""

from __future__ import annotations

import enum
import hashlib
import io
import os
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

PLACEHOLDER = "<reserved>"

_WS = re.compile(r"\s+")


class AttributeKind(enum.IntEnum):
    """The twelve attack attributes, numbered in schema order (1-based)."""

    Attacker = 1
    Source = 2
    Target = 3
    AttackVector = 4
    AttackType = 5
    InputValidation = 6
    Dependencies = 7
    OutputEncoding = 8
    Authentication = 9
    AccessControl = 10
    HttpSecurity = 11
    ErrorHandling = 12

    @property
    def ordinal(self) -> int:
        return int(self.value)

    @property
    def column(self) -> str:
        return COLUMN_NAMES[self.value - 1]

    @classmethod
    def parse(cls, text: str) -> "AttributeKind":
        """Resolve a kind from its name, column name or ordinal (case-insensitive)."""
        key = text.strip().replace("-", "_").replace(" ", "_").lower()
        if key.isdigit() and 1 <= int(key) <= 12:
            return cls(int(key))
        bare = key.replace("_", "")
        for kind in cls:
            if bare in (kind.name.lower(), kind.column.replace("_", "")):
                return kind
        raise KeyError(f"unknown attribute kind: {text!r}")


KINDS: tuple[AttributeKind, ...] = tuple(AttributeKind)

COLUMN_NAMES = (
    "attacker",
    "source",
    "target",
    "vector",
    "type",
    "input_validation",
    "dependencies",
    "output_encoding",
    "authentication",
    "access_control",
    "http_security",
    "error_handling",
)


def normalize_value(text: str) -> str:
    """Comparison key for a value string: case-folded, whitespace collapsed."""
    return _WS.sub(" ", text.strip()).casefold()


@dataclass(frozen=True)
class AttributeValue:
    text: str

    def __post_init__(self) -> None:
        cleaned = _WS.sub(" ", str(self.text).strip())
        if not cleaned:
            raise ValueError("attribute value must be non-empty")
        if "\n" in str(self.text) or "\r" in str(self.text):
            raise ValueError("attribute value must be a single line")
        object.__setattr__(self, "text", cleaned)

    @property
    def key(self) -> str:
        return normalize_value(self.text)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, AttributeValue):
            return self.key == other.key
        if isinstance(other, str):
            return self.key == normalize_value(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return self.text


ValueLike = Union[AttributeValue, str]


def _as_value(value: ValueLike) -> AttributeValue:
    return value if isinstance(value, AttributeValue) else AttributeValue(value)


class Vocabulary:
    """Per-kind ordered value lists; a value's code is its position in its list.

    Slots may hold a placeholder (``None``) so that reference codes can be
    pinned ahead of the values that precede them.  Registration fills the
    lowest placeholder first and appends only when none remain, which keeps
    codes dense either way.
    """

    def __init__(self) -> None:
        self._slots: dict[AttributeKind, list[Optional[AttributeValue]]] = {k: [] for k in KINDS}
        self._index: dict[AttributeKind, dict[str, int]] = {k: {} for k in KINDS}

    # -- queries ---------------------------------------------------------

    def size(self, kind: AttributeKind) -> int:
        return len(self._slots[AttributeKind(kind)])

    def sizes(self) -> tuple[int, ...]:
        return tuple(self.size(k) for k in KINDS)

    def code_of(self, kind: AttributeKind, value: ValueLike) -> Optional[int]:
        """Code of ``value`` under ``kind``, or ``None`` when it is not registered."""
        text = value.text if isinstance(value, AttributeValue) else str(value)
        return self._index[AttributeKind(kind)].get(normalize_value(text))

    def value_of(self, kind: AttributeKind, code: int) -> Optional[AttributeValue]:
        slots = self._slots[AttributeKind(kind)]
        if not 0 <= code < len(slots):
            raise IndexError(f"code {code} out of range for {AttributeKind(kind).name} (size {len(slots)})")
        return slots[code]

    def values(self, kind: AttributeKind) -> list[Optional[AttributeValue]]:
        return list(self._slots[AttributeKind(kind)])

    def entries(self) -> Iterable[tuple[AttributeKind, int, Optional[AttributeValue]]]:
        for kind in KINDS:
            for code, value in enumerate(self._slots[kind]):
                yield kind, code, value

    # -- mutation --------------------------------------------------------

    def register(self, kind: AttributeKind, value: ValueLike) -> int:
        kind = AttributeKind(kind)
        value = _as_value(value)
        if value.key == normalize_value(PLACEHOLDER):
            raise ValueError(f"{PLACEHOLDER} is reserved")
        existing = self._index[kind].get(value.key)
        if existing is not None:
            return existing
        slots = self._slots[kind]
        try:
            code = slots.index(None)
            slots[code] = value
        except ValueError:
            code = len(slots)
            slots.append(value)
        self._index[kind][value.key] = code
        return code

    def pin(self, kind: AttributeKind, value: ValueLike, code: int) -> None:
        """Place ``value`` at ``code``, padding lower slots with placeholders."""
        kind = AttributeKind(kind)
        value = _as_value(value)
        slots = self._slots[kind]
        current = self._index[kind].get(value.key)
        if current == code:
            return
        if current is not None:
            raise ValueError(f"{value.text!r} already registered under {kind.name} at code {current}")
        while len(slots) <= code:
            slots.append(None)
        if slots[code] is not None:
            raise ValueError(f"code {code} under {kind.name} is taken by {slots[code].text!r}")
        slots[code] = value
        self._index[kind][value.key] = code

    def copy(self) -> "Vocabulary":
        other = Vocabulary()
        for kind in KINDS:
            other._slots[kind] = list(self._slots[kind])
            other._index[kind] = dict(self._index[kind])
        return other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return all(
            [None if v is None else v.text for v in self._slots[k]]
            == [None if v is None else v.text for v in other._slots[k]]
            for k in KINDS
        )

    # -- serialization ---------------------------------------------------

    def dumps(self) -> str:
        lines = ["# kind,code,value"]
        for kind, code, value in self.entries():
            lines.append(f"{kind.ordinal},{code},{PLACEHOLDER if value is None else value.text}")
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def loads(cls, text: str) -> "Vocabulary":
        vocab = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",", 2)
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected <kind>,<code>,<value>")
            try:
                kind = AttributeKind(int(parts[0]))
                code = int(parts[1])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            if code != vocab.size(kind):
                raise ValueError(f"line {lineno}: codes for {kind.name} must be dense and ascending")
            if parts[2].strip() == PLACEHOLDER:
                vocab._slots[kind].append(None)
            else:
                if vocab.code_of(kind, parts[2]) is not None:
                    raise ValueError(f"line {lineno}: duplicate value {parts[2]!r} under {kind.name}")
                vocab.pin(kind, parts[2], code)
        return vocab

    def save(self, path: Union[str, os.PathLike]) -> int:
        data = self.dumps().encode("utf-8")
        with open(path, "wb") as fh:
            return fh.write(data)

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())


def vocabulary_register(vocab: Vocabulary, kind: AttributeKind, value: ValueLike) -> int:
    return vocab.register(kind, value)


def vocabulary_code_of(vocab: Vocabulary, kind: AttributeKind, value: ValueLike) -> Optional[int]:
    return vocab.code_of(kind, value)


# Observed values and codes of the CVE-2003-1192 webmail scenario.
PINNED_PAIRS: tuple[tuple[AttributeKind, str, int], ...] = (
    (AttributeKind.Attacker, "No Access", 0),
    (AttributeKind.Source, "External", 1),
    (AttributeKind.Target, "Buffer", 9),
    (AttributeKind.AttackVector, "Long Get Request", 39),
    (AttributeKind.AttackType, "Availability", 5),
    (AttributeKind.InputValidation, "Partial Validation", 2),
    (AttributeKind.Dependencies, "Authentication & Input Validation", 6),
    (AttributeKind.OutputEncoding, "None", 0),
    (AttributeKind.Authentication, "None", 0),
    (AttributeKind.AccessControl, "URL Access", 2),
    (AttributeKind.HttpSecurity, "Input Validation", 3),
    (AttributeKind.ErrorHandling, "None", 0),
)


def default_vocabulary() -> Vocabulary:
    """Vocabulary holding only the pinned pairs, with placeholders below them."""
    vocab = Vocabulary()
    for kind, text, code in PINNED_PAIRS:
        vocab.pin(kind, text, code)
    return vocab


# -- patterns -------------------------------------------------------------


@dataclass(frozen=True)
class AttackPattern:
    id: int
    components: tuple[str, ...]
    description: str = ""

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError("pattern id must be >= 1")
        if not self.components:
            raise ValueError("a pattern needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def expression(self) -> str:
        return "".join(f"({c})" for c in self.components)


def default_catalog() -> list[AttackPattern]:
    """Pattern IDs 1..53; only pattern 3 carries a known component sequence."""
    catalog = []
    for pid in range(1, 54):
        if pid == 3:
            catalog.append(
                AttackPattern(
                    3,
                    ("User", "HTTPServer", "GetMethod", "GetMethodBufferWrite", "Buffer"),
                    "User submits an excessively long HTTP GET request, overflowing a server buffer",
                )
            )
        else:
            catalog.append(AttackPattern(pid, (f"Pattern{pid}",)))
    return catalog


# -- scenarios -------------------------------------------------------------


@dataclass(frozen=True)
class AttackScenario:
    scenario_id: str
    values: tuple[Optional[AttributeValue], ...]
    pattern_id: Optional[int] = None

    def __post_init__(self) -> None:
        values = tuple(None if v is None else _as_value(v) for v in self.values)
        if len(values) != 12:
            raise ValueError(f"scenario {self.scenario_id!r} needs 12 values, got {len(values)}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(
        cls, scenario_id: str, values: Mapping[AttributeKind, ValueLike], pattern_id: Optional[int] = None
    ) -> "AttackScenario":
        ordered = [values.get(kind) for kind in KINDS]
        return cls(scenario_id, tuple(ordered), pattern_id)

    def value(self, kind: AttributeKind) -> Optional[AttributeValue]:
        return self.values[AttributeKind(kind).ordinal - 1]


@dataclass(frozen=True)
class Violation:
    kind: str  # missing | unknown_value | unknown_pattern
    message: str
    attribute: Optional[AttributeKind] = None

    def __str__(self) -> str:
        return self.message


def scenario_validate(
    s: AttackScenario, vocab: Vocabulary, catalog: Sequence[AttackPattern]
) -> list[Violation]:
    """Every problem with ``s``; an empty list means the scenario is valid."""
    problems = []
    for kind in KINDS:
        value = s.value(kind)
        if value is None:
            problems.append(Violation("missing", f"{s.scenario_id}: missing {kind.name}", kind))
        elif vocab.code_of(kind, value) is None:
            problems.append(
                Violation("unknown_value", f"{s.scenario_id}: unknown {kind.name} value {value.text!r}", kind)
            )
    if s.pattern_id is not None and s.pattern_id not in {p.id for p in catalog}:
        problems.append(Violation("unknown_pattern", f"{s.scenario_id}: unknown pattern id {s.pattern_id}"))
    return problems


# -- value-string scenario files -------------------------------------------


def read_scenarios(source: Union[str, os.PathLike, TextIO]) -> list[AttackScenario]:
    """Read a CSV of value strings (corpus header, pattern_id column optional/blank)."""
    import csv

    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return read_scenarios(fh)
    out = []
    for lineno, row in enumerate(csv.reader(source), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if row[0].strip().lower() == "scenario_id":
            continue
        if len(row) not in (13, 14):
            raise ValueError(f"line {lineno}: expected 13 or 14 fields, got {len(row)}")
        pattern = row[13].strip() if len(row) == 14 else ""
        try:
            pid = int(pattern) if pattern else None
        except ValueError:
            raise ValueError(f"line {lineno}: bad pattern id {pattern!r}") from None
        values = tuple(c if c.strip() else None for c in row[1:13])
        out.append(AttackScenario(row[0].strip(), values, pid))
    return out


def write_scenarios(scenarios: Sequence[AttackScenario], dest: TextIO) -> None:
    import csv

    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(["scenario_id", *COLUMN_NAMES, "pattern_id"])
    for s in scenarios:
        writer.writerow(
            [s.scenario_id, *("" if v is None else v.text for v in s.values), "" if s.pattern_id is None else s.pattern_id]
        )


def scenarios_to_text(scenarios: Sequence[AttackScenario]) -> str:
    buf = io.StringIO()
    write_scenarios(scenarios, buf)
    return buf.getvalue()

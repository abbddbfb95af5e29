"""Seeded synthetic corpora built from per-pattern attribute templates.

Each pattern gets a canonical 12-code template; generated scenarios repeat the
template with random substitutions on the template's jitter kinds, mimicking the
same exploit reported against different applications.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .attack_domain import KINDS, AttributeKind, Vocabulary, default_vocabulary
from .corpus_io import Corpus, EncodedScenario

K = AttributeKind

# Values registered after the pinned pairs; they fill placeholder slots first.
DOMAIN_VALUES: dict[AttributeKind, tuple[str, ...]] = {
    K.Attacker: ("Anonymous User", "Authenticated User", "Privileged User", "Local User"),
    K.Source: ("Internal", "Adjacent Network", "Local"),
    K.Target: (
        "Database", "File System", "Web Browser", "Session", "Web Server", "Application Server",
        "Memory", "Configuration File", "User Account", "Log File", "Directory Service", "Email Client",
    ),
    K.AttackVector: (
        "Crafted URL", "SQL Query String", "Script Tag Injection", "Cookie Manipulation",
        "Hidden Form Field", "Directory Traversal Sequence", "Long Post Request",
        "Malformed HTTP Header", "Format String", "Command Injection", "LDAP Query", "XPath Query",
        "XML External Entity", "File Upload", "Session Fixation", "Cross-Site Request",
        "HTTP Response Splitting", "Null Byte Injection", "Unicode Encoding", "Double Encoding",
        "Brute Force Login", "Default Credentials", "Password Reset Request", "Forced Browsing",
        "Parameter Tampering", "Referer Spoofing", "Host Header Injection", "Open Redirect",
        "Email Header Injection", "Server Side Include", "Remote File Inclusion",
        "Local File Inclusion", "Deserialization Payload", "Integer Overflow Input",
        "Long Cookie Value", "Long Username", "Long Filename", "Oversized Query String",
        "Long Host Header", "Long User-Agent Header", "Malformed Multipart Request",
        "Chunked Encoding Abuse", "HTTP Request Smuggling", "Flooding Requests", "Slow Headers",
        "Race Condition Request", "Replay Of Captured Token", "Predictable Session ID",
        "Cookie Theft Script", "Clickjacking Frame", "DOM Manipulation", "JSON Injection",
        "CRLF Injection", "Log Injection", "Mass Assignment", "Insecure Direct Object Reference",
        "Symlink Attack", "Environment Variable Overflow", "Shell Metacharacters",
        "Regular Expression Denial", "Cache Poisoning", "DNS Rebinding", "Macro Payload",
        "Crafted Image File", "Crafted Archive File", "Long Authorization Header",
        "Long Referer Header", "Oversized JSON Body", "Nested XML Entities", "Wildcard Query",
        "Padding Oracle Probe", "Weak Token Guessing", "Session Cookie Replay", "Verb Tampering",
        "Path Parameter Injection", "Template Injection",
    ),
    K.AttackType: (
        "Confidentiality", "Integrity", "Authentication Bypass", "Authorization Bypass",
        "Information Disclosure", "Code Execution", "Privilege Escalation",
    ),
    K.InputValidation: ("No Validation", "Client-side Validation", "Full Validation", "Blacklist Filtering"),
    K.Dependencies: (
        "None", "Input Validation", "Authentication", "Session Management", "Database Access",
        "File System Access", "Third-party Component", "Operating System Call",
    ),
    K.OutputEncoding: ("Partial Encoding", "HTML Encoding", "URL Encoding"),
    K.Authentication: ("Weak Password Policy", "Single Factor", "Credentials In Cleartext", "Missing Lockout"),
    K.AccessControl: ("None", "Role Based", "File Permissions", "Missing Function Level Check"),
    K.HttpSecurity: ("None", "Cookie Flags", "Session Handling", "Response Headers", "Request Logging"),
    K.ErrorHandling: ("Verbose Error Messages", "Stack Trace Exposure", "Log Tampering", "Insufficient Logging"),
}

# Pattern IDs of the reference evaluation roster (18 and 19 never appear).
DEFAULT_PATTERN_IDS: tuple[int, ...] = tuple(p for p in range(1, 54) if p not in (18, 19))

# Default partition boundary the built-in templates are laid out around.
SPLIT_ID = 28

WEBMAIL_CODES = (0, 1, 9, 39, 5, 2, 6, 0, 0, 2, 3, 0)

RANDOM_KINDS = (
    K.Source, K.InputValidation, K.Dependencies, K.OutputEncoding,
    K.Authentication, K.AccessControl, K.HttpSecurity,
)
BANDED_KINDS = (K.Attacker, K.Target, K.AttackType)
JITTER_KINDS = frozenset({K.ErrorHandling})


def synthetic_vocabulary() -> Vocabulary:
    vocab = default_vocabulary()
    for kind in KINDS:
        for text in DOMAIN_VALUES[kind]:
            vocab.register(kind, text)
    return vocab


@dataclass(frozen=True)
class PatternTemplate:
    pattern_id: int
    canonical_codes: tuple[int, ...]
    jitter_kinds: frozenset[AttributeKind]

    def __post_init__(self) -> None:
        object.__setattr__(self, "canonical_codes", tuple(int(c) for c in self.canonical_codes))
        object.__setattr__(self, "jitter_kinds", frozenset(AttributeKind(k) for k in self.jitter_kinds))
        if len(self.canonical_codes) != 12:
            raise ValueError("a template needs 12 canonical codes")

    @property
    def jitter_mask(self) -> str:
        return "".join("1" if k in self.jitter_kinds else "0" for k in KINDS)

    def check(self, vocab: Vocabulary) -> None:
        for kind, code in zip(KINDS, self.canonical_codes):
            if not 0 <= code < vocab.size(kind):
                raise ValueError(f"template {self.pattern_id}: code {code} invalid for {kind.name}")


def vector_code(pattern_id: int) -> int:
    """Attack-vector code of a default template.

    Below the split the code falls with the ID (pattern 3 lands on 39); above
    it the code rises from 52, leaving codes 42-51 unused so the two
    partitions never share a vector neighbourhood.
    """
    return 42 - pattern_id if pattern_id <= SPLIT_ID else pattern_id + 23


def _banded_code(rank: float, size: int, upper: bool) -> int:
    half = size // 2
    lo, hi = (half, size - 1) if upper else (0, half - 1)
    return lo + int(round(rank * (hi - lo)))


def default_templates(vocab: Optional[Vocabulary] = None, seed: int = 2012) -> list[PatternTemplate]:
    """The built-in 51 templates.

    Attacker, target and attack type rise with the ID inside a code band
    reserved for the template's side of the split; the remaining context
    attributes are drawn at random once per template.  Only error handling
    jitters, around a shared canonical value, so noise carries no ID signal.
    """
    vocab = vocab or synthetic_vocabulary()
    rng = np.random.default_rng(seed)
    sides = (
        [p for p in DEFAULT_PATTERN_IDS if p <= SPLIT_ID],
        [p for p in DEFAULT_PATTERN_IDS if p > SPLIT_ID],
    )
    templates = []
    for pid in DEFAULT_PATTERN_IDS:
        upper = pid > SPLIT_ID
        side = sides[upper]
        rank = side.index(pid) / (len(side) - 1)
        codes = [0] * 12
        for kind in RANDOM_KINDS:
            codes[kind - 1] = int(rng.integers(vocab.size(kind)))
        for kind in BANDED_KINDS:
            codes[kind - 1] = _banded_code(rank, vocab.size(kind), upper)
        codes[K.AttackVector - 1] = vector_code(pid)
        codes[K.ErrorHandling - 1] = WEBMAIL_CODES[K.ErrorHandling - 1]
        if pid == 3:
            codes = list(WEBMAIL_CODES)
        t = PatternTemplate(pid, tuple(codes), JITTER_KINDS)
        t.check(vocab)
        templates.append(t)
    return templates


def generate_corpus(
    templates: Sequence[PatternTemplate],
    per_pattern: int,
    noise_rate: float,
    seed: int = 42,
    vocab: Optional[Vocabulary] = None,
) -> Corpus:
    if per_pattern < 1:
        raise ValueError("per_pattern must be >= 1")
    if not templates:
        raise ValueError("no templates")
    if not 0.0 <= noise_rate <= 1.0:
        raise ValueError("noise_rate must lie in [0, 1]")
    vocab = vocab or synthetic_vocabulary()
    rng = np.random.default_rng(seed)
    scenarios = []
    for t in templates:
        t.check(vocab)
        for k in range(1, per_pattern + 1):
            codes = list(t.canonical_codes)
            for kind in KINDS:
                if kind not in t.jitter_kinds:
                    continue
                size = vocab.size(kind)
                hit = rng.random() < noise_rate
                if not hit or size < 2:
                    continue
                # uniform over the other size-1 codes
                alt = int(rng.integers(size - 1))
                i = kind.ordinal - 1
                codes[i] = alt if alt < codes[i] else alt + 1
            scenarios.append(EncodedScenario(f"SYN-{t.pattern_id}-{k}", tuple(codes), t.pattern_id))
    return Corpus(scenarios)


# -- template file -----------------------------------------------------------

TEMPLATE_HEADER = ["pattern_id", *(f"c{i}" for i in range(1, 13)), "jitter_mask"]


def templates_to_text(templates: Sequence[PatternTemplate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TEMPLATE_HEADER)
    for t in templates:
        w.writerow([t.pattern_id, *t.canonical_codes, t.jitter_mask])
    return buf.getvalue()


def templates_from_text(text: str) -> list[PatternTemplate]:
    out = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0] == "pattern_id":
            continue
        if len(row) != 14:
            raise ValueError(f"line {lineno}: expected 14 fields, got {len(row)}")
        mask = row[13].strip()
        if len(mask) != 12 or set(mask) - {"0", "1"}:
            raise ValueError(f"line {lineno}: jitter_mask must be 12 binary digits")
        jitter = frozenset(k for k, bit in zip(KINDS, mask) if bit == "1")
        out.append(PatternTemplate(int(row[0]), tuple(int(c) for c in row[1:13]), jitter))
    return out


def save_templates(templates: Sequence[PatternTemplate], path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(templates_to_text(templates))


def load_templates(path: Union[str, os.PathLike]) -> list[PatternTemplate]:
    with open(path, "r", encoding="ascii") as fh:
        return templates_from_text(fh.read())

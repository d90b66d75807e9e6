"""CNF data model, DIMACS I/O and learnt-trace files.

Literals are signed integers in DIMACS style: ``v`` is the positive
occurrence of variable ``v`` and ``-v`` the negative one.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

Clause = tuple[int, ...]


class DimacsError(ValueError):
    """Malformed DIMACS input."""


class VariableOverflowError(ValueError):
    """A literal references a variable beyond the declared count."""


def var(lit: int) -> int:
    return lit if lit > 0 else -lit


def canonical_clause(lits: Iterable[int]) -> Clause:
    """Drop repeated literals, keeping first-occurrence order.

    Both polarities of a variable survive (tautologies are kept); use
    :func:`clause_vars` for the distinct-variable view.
    """
    seen = set()
    out = []
    for lit in lits:
        if lit == 0:
            raise ValueError("literal 0 is not a valid literal")
        if lit not in seen:
            seen.add(lit)
            out.append(int(lit))
    return tuple(out)


def clause_vars(clause: Sequence[int]) -> tuple[int, ...]:
    """Distinct variables of a clause in first-occurrence order."""
    seen = set()
    out = []
    for lit in clause:
        v = var(lit)
        if v not in seen:
            seen.add(v)
            out.append(v)
    return tuple(out)


def width(clause: Sequence[int]) -> int:
    """Clause size |c|: the number of distinct variables."""
    return len(clause_vars(clause))


def is_tautology(clause: Sequence[int]) -> bool:
    s = set(clause)
    return any(-lit in s for lit in s)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple[Clause, ...] = ()
    # set by parse_dimacs when the header clause count disagrees with the body
    header_mismatch: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        clauses = tuple(canonical_clause(c) for c in self.clauses)
        for c in clauses:
            for lit in c:
                if var(lit) > self.num_vars:
                    raise VariableOverflowError(
                        f"literal {lit} exceeds num_vars={self.num_vars}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def ratio(self) -> float:
        return self.num_clauses / self.num_vars if self.num_vars else 0.0

    def extend(self, clauses: Iterable[Sequence[int]]) -> Formula:
        return Formula(self.num_vars, self.clauses + tuple(tuple(c) for c in clauses))


def augment(f: Formula, learnt: Iterable[Sequence[int]]) -> Formula:
    """Append learnt clauses to ``f``; the variable count is unchanged."""
    return f.extend(learnt)


_HEADER = re.compile(r"^p\s+cnf\s+(\d+)\s+(\d+)\s*$")


def parse_dimacs(text: str | bytes) -> Formula:
    """Parse DIMACS CNF text.

    A declared clause count that differs from the body is tolerated: a
    ``UserWarning`` is emitted and ``Formula.header_mismatch`` is set.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if not text.strip():
        raise DimacsError("empty input")

    num_vars = declared = None
    clauses = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            # SATLIB end marker
            break
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            m = _HEADER.match(line)
            if m is None:
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            num_vars, declared = int(m.group(1)), int(m.group(2))
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > num_vars:
                    raise VariableOverflowError(
                        f"line {lineno}: literal {lit} exceeds n={num_vars}")
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(current)

    mismatch = declared != len(clauses)
    if mismatch:
        warnings.warn(f"header declares {declared} clauses, found {len(clauses)}")
    return Formula(num_vars, tuple(canonical_clause(c) for c in clauses),
                   header_mismatch=mismatch)


def write_dimacs(f: Formula, comments: Sequence[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.num_vars} {f.num_clauses}")
    lines.extend(" ".join(map(str, c)) + " 0" if c else "0" for c in f.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path: str | Path) -> Formula:
    return parse_dimacs(Path(path).read_bytes())


# -- learnt traces ---------------------------------------------------------

@dataclass(frozen=True)
class LearntTrace:
    """Learnt-clause snapshots keyed by conflict count."""

    num_vars: int
    checkpoints: dict[int, tuple[Clause, ...]] = field(default_factory=dict)

    def __post_init__(self):
        keys = list(self.checkpoints)
        if keys != sorted(set(keys)):
            raise ValueError("checkpoint keys must be strictly increasing")
        for x, clauses in self.checkpoints.items():
            for c in clauses:
                for lit in c:
                    if var(lit) > self.num_vars:
                        raise VariableOverflowError(
                            f"checkpoint {x}: literal {lit} exceeds n={self.num_vars}")


_CHECKPOINT = re.compile(r"^c\s+checkpoint\s+(\d+)\s*$", re.MULTILINE)
_TRACE_NAME = re.compile(r"^(?P<base>.*)\.learnt\.(?P<x>\d+)\.cnf$")


def trace_file_name(base: str, x: int) -> str:
    return f"{base}.learnt.{x}.cnf"


def write_learnt_trace(t: LearntTrace, directory: str | Path, base: str) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for x, clauses in t.checkpoints.items():
        p = directory / trace_file_name(base, x)
        p.write_text(write_dimacs(Formula(t.num_vars, clauses), [f"checkpoint {x}"]))
        paths.append(p)
    return paths


def read_trace_file(path: str | Path) -> tuple[int, Formula]:
    """Read one checkpoint file, returning ``(X, clauses-as-formula)``."""
    text = Path(path).read_text()
    m = _CHECKPOINT.search(text)
    if m is None:
        raise DimacsError(f"{path}: missing 'c checkpoint <X>' comment")
    return int(m.group(1)), parse_dimacs(text)


def read_learnt_trace(path: str | Path, base: str | None = None) -> LearntTrace:
    """Load a trace from a single checkpoint file or a directory of them."""
    path = Path(path)
    if path.is_dir():
        files = []
        for p in path.iterdir():
            m = _TRACE_NAME.match(p.name)
            if m and (base is None or m.group("base") == base):
                files.append(p)
        if not files:
            raise FileNotFoundError(f"no '*.learnt.<X>.cnf' files in {path}")
    else:
        files = [path]
    found = {}
    num_vars = 0
    for p in files:
        x, f = read_trace_file(p)
        if x in found:
            raise DimacsError(f"checkpoint {x} appears twice")
        found[x] = f.clauses
        num_vars = max(num_vars, f.num_vars)
    return LearntTrace(num_vars, {x: found[x] for x in sorted(found)})

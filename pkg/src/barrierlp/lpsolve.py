"""Pure-feasibility linear programs: representation, phase-1 simplex, LP files.

Every program here minimizes the constant zero; the only question is whether
the constraint system admits a point. Feasibility is decided by a dense
phase-1 simplex (split free variables, slacks, one artificial per row,
Bland's anti-cycling rule). An infeasible run returns row multipliers that
combine the constraints into 0^T z <= -delta with delta > 0, so negative
verdicts carry their own proof and can be revalidated by substitution.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# Dense-tableau capacity: problems beyond this must go through export_lp_text.
MAX_DENSE_VARS = 5000

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class LpCapacityError(Exception):
    """Problem exceeds the dense-tableau variable capacity."""


class LpStatus(Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class FarkasCertificate:
    """Row multipliers proving infeasibility.

    eq_mults are free-signed, ub_mults non-negative; combining rows with
    these weights yields a zero coefficient vector and a right-hand side
    of at most -margin.
    """

    eq_mults: List[float]
    ub_mults: List[float]


@dataclass
class LpOutcome:
    status: LpStatus
    point: Optional[np.ndarray] = None
    farkas: Optional[FarkasCertificate] = None
    iterations: int = 0
    wall_time: float = 0.0


@dataclass
class SolverOptions:
    max_iters: int = 200000
    pivot_tol: float = 1e-9
    feas_tol: float = 1e-8
    infeas_margin: float = 1e-9


SparseRow = Tuple[Dict[int, float], float]


class LpProblem:
    """Sparse equality/inequality system a^T z {=, <=} beta with free z."""

    def __init__(self, nvars: int, names: Optional[Sequence[str]] = None):
        if nvars < 0:
            raise ValueError("nvars must be >= 0, got %d" % nvars)
        self.nvars = nvars
        if names is None:
            names = ["z%d" % (i + 1) for i in range(nvars)]
        names = list(names)
        if len(names) != nvars:
            raise ValueError("expected %d names, got %d" % (nvars, len(names)))
        for nm in names:
            if not _NAME_RE.match(nm):
                raise ValueError("invalid variable name %r" % nm)
        if len(set(names)) != nvars:
            raise ValueError("variable names must be unique")
        self.names = names
        self.eq_rows: List[SparseRow] = []
        self.ub_rows: List[SparseRow] = []

    def _clean(self, coefs: Dict[int, float], rhs: float) -> SparseRow:
        out: Dict[int, float] = {}
        for idx, c in coefs.items():
            i = int(idx)
            if not 0 <= i < self.nvars:
                raise ValueError("variable index %d out of range [0, %d)" % (i, self.nvars))
            v = float(c)
            if not math.isfinite(v):
                raise ValueError("non-finite coefficient %r on %s" % (v, self.names[i]))
            if v != 0.0:
                out[i] = v
        b = float(rhs)
        if not math.isfinite(b):
            raise ValueError("non-finite right-hand side %r" % b)
        return out, b

    def add_eq(self, coefs: Dict[int, float], rhs: float) -> None:
        self.eq_rows.append(self._clean(coefs, rhs))

    def add_ub(self, coefs: Dict[int, float], rhs: float) -> None:
        self.ub_rows.append(self._clean(coefs, rhs))

    @property
    def nrows(self) -> int:
        return len(self.eq_rows) + len(self.ub_rows)

    def max_violation(self, z: Sequence[float]) -> float:
        worst = 0.0
        for coefs, rhs in self.eq_rows:
            v = sum(c * z[i] for i, c in coefs.items()) - rhs
            worst = max(worst, abs(v))
        for coefs, rhs in self.ub_rows:
            v = sum(c * z[i] for i, c in coefs.items()) - rhs
            worst = max(worst, v)
        return worst

    def __eq__(self, other):
        if not isinstance(other, LpProblem):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.names == other.names
            and self.eq_rows == other.eq_rows
            and self.ub_rows == other.ub_rows
        )

    def __repr__(self):
        return "LpProblem(nvars=%d, eq=%d, ub=%d)" % (
            self.nvars,
            len(self.eq_rows),
            len(self.ub_rows),
        )


def validate_farkas(
    lp: LpProblem, cert: FarkasCertificate, tol: float = 1e-9
) -> Tuple[float, float]:
    """(max |combined coefficient|, combined right-hand side).

    A valid certificate has the first value <= tol and the second <= -tol,
    with every ub multiplier non-negative.
    """
    if len(cert.eq_mults) != len(lp.eq_rows) or len(cert.ub_mults) != len(lp.ub_rows):
        raise ValueError("certificate length does not match the row counts")
    combo = np.zeros(lp.nvars)
    rhs = 0.0
    for mult, (coefs, beta) in zip(cert.eq_mults, lp.eq_rows):
        for i, c in coefs.items():
            combo[i] += mult * c
        rhs += mult * beta
    for mult, (coefs, beta) in zip(cert.ub_mults, lp.ub_rows):
        if mult < -tol:
            raise ValueError("negative multiplier %g on an inequality row" % mult)
        for i, c in coefs.items():
            combo[i] += mult * c
        rhs += mult * beta
    max_coef = float(np.max(np.abs(combo))) if lp.nvars else 0.0
    return max_coef, rhs


def solve_feasibility(lp: LpProblem, opts: Optional[SolverOptions] = None) -> LpOutcome:
    """Decide feasibility with a phase-1 simplex.

    Returns Feasible with a point satisfying every row within feas_tol,
    Infeasible with a Farkas certificate, or IterationLimit.
    """
    if opts is None:
        opts = SolverOptions()
    t0 = time.perf_counter()
    n = lp.nvars
    if n > MAX_DENSE_VARS:
        raise LpCapacityError(
            "problem has %d variables, dense capacity is %d; export the LP instead"
            % (n, MAX_DENSE_VARS)
        )

    n_eq = len(lp.eq_rows)
    eq_mults = [0.0] * n_eq
    ub_mults = [0.0] * len(lp.ub_rows)

    # Rows with no coefficients are decided immediately; a contradictory one
    # is its own one-row certificate.
    kept: List[Tuple[str, int, Dict[int, float], float]] = []
    for r, (coefs, beta) in enumerate(lp.eq_rows):
        if coefs:
            kept.append(("eq", r, coefs, beta))
        elif abs(beta) > opts.feas_tol:
            eq_mults[r] = -1.0 / beta
            return LpOutcome(
                status=LpStatus.INFEASIBLE,
                farkas=FarkasCertificate(eq_mults, ub_mults),
                iterations=0,
                wall_time=time.perf_counter() - t0,
            )
    for r, (coefs, beta) in enumerate(lp.ub_rows):
        if coefs:
            kept.append(("ub", r, coefs, beta))
        elif beta < -opts.feas_tol:
            ub_mults[r] = 1.0
            return LpOutcome(
                status=LpStatus.INFEASIBLE,
                farkas=FarkasCertificate(eq_mults, ub_mults),
                iterations=0,
                wall_time=time.perf_counter() - t0,
            )

    m = len(kept)
    if m == 0:
        return LpOutcome(
            status=LpStatus.FEASIBLE,
            point=np.zeros(n),
            iterations=0,
            wall_time=time.perf_counter() - t0,
        )

    n_ub = sum(1 for kind, _, _, _ in kept if kind == "ub")
    ncols = 2 * n + n_ub + m
    art0 = 2 * n + n_ub
    T = np.zeros((m + 1, ncols + 1))
    scale = np.ones(m)
    flip = np.ones(m)

    slack_pos = 0
    for r, (kind, _, coefs, beta) in enumerate(kept):
        rho = max(abs(c) for c in coefs.values())
        scale[r] = rho
        b = beta / rho
        sigma = -1.0 if b < 0 else 1.0
        flip[r] = sigma
        for i, c in coefs.items():
            v = sigma * c / rho
            T[r, i] = v
            T[r, n + i] = -v
        if kind == "ub":
            T[r, 2 * n + slack_pos] = sigma
            slack_pos += 1
        T[r, art0 + r] = 1.0
        T[r, ncols] = sigma * b

    # Objective row holds reduced costs for min(sum of artificials); the
    # starting basis is the artificials themselves.
    T[m, :] = -T[:m, :].sum(axis=0)
    T[m, art0 : art0 + m] += 1.0

    basis = list(range(art0, art0 + m))
    left_basis = np.zeros(ncols, dtype=bool)  # artificials banned from re-entry

    iterations = 0
    status: Optional[LpStatus] = None
    stalled = False
    best_value = math.inf
    no_progress = 0
    # A run this long without lowering the artificial sum is numerical
    # treading water, not progress; bail out through the gated exits below
    # rather than burn the whole iteration budget.
    progress_window = max(1000, 2 * (m + ncols))
    while True:
        if iterations >= opts.max_iters:
            status = LpStatus.ITERATION_LIMIT
            break
        # Bland: entering column is the lowest eligible index. A column whose
        # entries have all eroded below the pivot tolerance cannot be pivoted
        # (phase 1 is never truly unbounded), so it is skipped; leaving the
        # loop that way marks the tableau as stalled and the exit below is
        # gated instead of trusted.
        pc = -1
        stalled = False
        objrow = T[m, :ncols]
        candidates = np.nonzero(objrow < -opts.pivot_tol)[0]
        for j in candidates:
            if j >= art0 and left_basis[j]:
                continue
            if not np.any(T[:m, j] > opts.pivot_tol):
                stalled = True
                continue
            pc = int(j)
            break
        if pc < 0:
            break  # optimal, or stalled with no usable column
        col = T[:m, pc]
        eligible = np.nonzero(col > opts.pivot_tol)[0]
        ratios = T[eligible, ncols] / col[eligible]
        best = ratios.min()
        near = eligible[ratios <= best + opts.pivot_tol]
        pr = int(min(near, key=lambda r: basis[r]))
        # Pivot on (pr, pc).
        T[pr, :] /= T[pr, pc]
        colvals = T[:, pc].copy()
        colvals[pr] = 0.0
        T -= np.outer(colvals, T[pr, :])
        old = basis[pr]
        if old >= art0:
            left_basis[old] = True
        basis[pr] = pc
        iterations += 1
        value_now = -T[m, ncols]
        if value_now < best_value - opts.pivot_tol:
            best_value = value_now
            no_progress = 0
        else:
            no_progress += 1
            if no_progress >= progress_window:
                stalled = True
                break

    wall = time.perf_counter() - t0
    if status is LpStatus.ITERATION_LIMIT:
        return LpOutcome(status=status, iterations=iterations, wall_time=wall)

    value = -T[m, ncols]
    if value > opts.infeas_margin:
        # Simplex multipliers: y_r = 1 - reduced cost of row r's artificial.
        # Undo scaling and flips, negate, and the rows combine to 0 <= -value.
        for r, (kind, orig, _, _) in enumerate(kept):
            y = 1.0 - T[m, art0 + r]
            u = -y * flip[r] / scale[r]
            if kind == "eq":
                eq_mults[orig] = u
            else:
                ub_mults[orig] = max(u, 0.0) if u > -opts.feas_tol else u
        cert = FarkasCertificate(eq_mults, ub_mults)
        if stalled:
            # A stalled tableau proves nothing by itself; only a certificate
            # that actually combines is worth returning.
            try:
                combo, rhs = validate_farkas(lp, cert)
            except ValueError:
                combo, rhs = math.inf, 0.0
            leverage = max(
                [1.0]
                + [abs(u) for u in eq_mults]
                + [abs(u) for u in ub_mults]
            )
            if rhs > -opts.infeas_margin or combo > 1e-7 * leverage:
                return LpOutcome(
                    status=LpStatus.ITERATION_LIMIT,
                    iterations=iterations,
                    wall_time=wall,
                )
        return LpOutcome(
            status=LpStatus.INFEASIBLE,
            farkas=cert,
            iterations=iterations,
            wall_time=wall,
        )

    z = np.zeros(n)
    for r in range(m):
        j = basis[r]
        val = T[r, ncols]
        if j < n:
            z[j] += val
        elif j < 2 * n:
            z[j - n] -= val
    if stalled and lp.max_violation(z) > opts.feas_tol:
        return LpOutcome(
            status=LpStatus.ITERATION_LIMIT, iterations=iterations, wall_time=wall
        )
    return LpOutcome(
        status=LpStatus.FEASIBLE, point=z, iterations=iterations, wall_time=wall
    )


# -- CPLEX LP text format ---------------------------------------------------

def _fmt(x: float) -> str:
    # %.17g round-trips every double exactly.
    return "%.17g" % x


def _row_text(lp: LpProblem, coefs: Dict[int, float]) -> str:
    if not coefs:
        if lp.nvars == 0:
            raise ValueError("cannot export a termless row with no variables")
        # A termless row still needs one syntactic term.
        return "+0 %s" % lp.names[0]
    parts = []
    for i in sorted(coefs):
        c = coefs[i]
        sign = "+" if c >= 0 else "-"
        parts.append("%s%s %s" % (sign, _fmt(abs(c)), lp.names[i]))
    return " ".join(parts)


def export_lp_text(lp: LpProblem, destination: Optional[str] = None) -> str:
    """Serialize to the CPLEX LP textual format (zero objective, free vars).

    Equality rows come first, inequality rows after, both in insertion
    order; re-parsing with parse_lp_text reproduces the problem exactly.
    """
    lines = [
        "\\ feasibility program: %d variables, %d equalities, %d inequalities"
        % (lp.nvars, len(lp.eq_rows), len(lp.ub_rows)),
        "Minimize",
        " obj:",
        "Subject To",
    ]
    cnum = 0
    for coefs, rhs in lp.eq_rows:
        cnum += 1
        lines.append(" c%d: %s = %s" % (cnum, _row_text(lp, coefs), _fmt(rhs)))
    for coefs, rhs in lp.ub_rows:
        cnum += 1
        lines.append(" c%d: %s <= %s" % (cnum, _row_text(lp, coefs), _fmt(rhs)))
    lines.append("Bounds")
    for name in lp.names:
        lines.append(" %s free" % name)
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if destination is not None:
        with open(destination, "w") as fh:
            fh.write(text)
    return text


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<rel><=|>=|=)|(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sign>[+-])|(?P<colon>:))"
)


class LpParseError(ValueError):
    pass


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens: List[Tuple[str, str]] = []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0]
        pos = 0
        while pos < len(line):
            mt = _TOKEN_RE.match(line, pos)
            if not mt or mt.end() == pos:
                if line[pos:].strip():
                    raise LpParseError("unrecognized input %r" % line[pos:].strip())
                break
            pos = mt.end()
            for kind in ("rel", "num", "name", "sign", "colon"):
                val = mt.group(kind)
                if val is not None:
                    tokens.append((kind, val))
                    break
    return tokens


def parse_lp_text(text: str) -> LpProblem:
    """Parse the subset of the LP format produced by export_lp_text."""
    tokens = _tokenize(text)
    # Section split driven by the keywords.
    sections: Dict[str, List[Tuple[str, str]]] = {
        "minimize": [],
        "subject": [],
        "bounds": [],
    }
    current: Optional[str] = None
    i = 0
    while i < len(tokens):
        kind, val = tokens[i]
        low = val.lower()
        if kind == "name" and low in ("minimize", "min"):
            current = "minimize"
            i += 1
            continue
        if kind == "name" and low == "subject":
            if i + 1 < len(tokens) and tokens[i + 1][1].lower() == "to":
                current = "subject"
                i += 2
                continue
        if kind == "name" and low in ("st", "s.t."):
            current = "subject"
            i += 1
            continue
        if kind == "name" and low == "bounds":
            current = "bounds"
            i += 1
            continue
        if kind == "name" and low == "end":
            break
        if current is None:
            raise LpParseError("token %r before any section" % val)
        sections[current].append((kind, val))
        i += 1

    # Bounds section declares every variable, in index order.
    names: List[str] = []
    btoks = sections["bounds"]
    j = 0
    while j < len(btoks):
        kind, val = btoks[j]
        if kind != "name":
            raise LpParseError("expected a variable name in Bounds, got %r" % val)
        if j + 1 >= len(btoks) or btoks[j + 1][1].lower() != "free":
            raise LpParseError("variable %r must be declared free" % val)
        names.append(val)
        j += 2

    lp = LpProblem(len(names), names or None)
    index = {nm: k for k, nm in enumerate(names)}

    # Objective must be zero: a label plus nothing, or terms with coefficient 0.
    otoks = [t for t in sections["minimize"]]
    j = 0
    if j < len(otoks) and otoks[j][0] == "name" and j + 1 < len(otoks) and otoks[j + 1][0] == "colon":
        j += 2
    terms, j = _parse_terms(otoks, j, index)
    if j != len(otoks):
        raise LpParseError("unexpected token %r in the objective" % (otoks[j][1],))
    if any(c != 0.0 for c in terms.values()):
        raise LpParseError("objective must be identically zero")

    stoks = sections["subject"]
    j = 0
    while j < len(stoks):
        if stoks[j][0] == "name" and j + 1 < len(stoks) and stoks[j + 1][0] == "colon":
            j += 2  # row label
        coefs, j = _parse_terms(stoks, j, index)
        if j >= len(stoks) or stoks[j][0] != "rel":
            raise LpParseError("constraint row is missing its relation")
        rel = stoks[j][1]
        j += 1
        rhs, j = _parse_number(stoks, j)
        if rel == "=":
            lp.add_eq(coefs, rhs)
        elif rel == "<=":
            lp.add_ub(coefs, rhs)
        else:
            raise LpParseError("unsupported relation %r" % rel)
    return lp


def _parse_number(tokens, j) -> Tuple[float, int]:
    sign = 1.0
    while j < len(tokens) and tokens[j][0] == "sign":
        if tokens[j][1] == "-":
            sign = -sign
        j += 1
    if j >= len(tokens) or tokens[j][0] != "num":
        raise LpParseError("expected a number")
    return sign * float(tokens[j][1]), j + 1


def _parse_terms(tokens, j, index) -> Tuple[Dict[int, float], int]:
    coefs: Dict[int, float] = {}
    while j < len(tokens):
        kind, val = tokens[j]
        if kind == "rel":
            break
        sign = 1.0
        while j < len(tokens) and tokens[j][0] == "sign":
            if tokens[j][1] == "-":
                sign = -sign
            j += 1
        if j >= len(tokens):
            break
        kind, val = tokens[j]
        coef = sign
        if kind == "num":
            coef = sign * float(val)
            j += 1
            if j >= len(tokens) or tokens[j][0] != "name":
                raise LpParseError("number %s is not followed by a variable" % val)
            kind, val = tokens[j]
        if kind != "name":
            raise LpParseError("expected a variable name, got %r" % val)
        if val not in index:
            raise LpParseError("unknown variable %r" % val)
        coefs[index[val]] = coefs.get(index[val], 0.0) + coef
        j += 1
        if coefs.get(index[val], 0.0) == 0.0:
            coefs.pop(index[val], None)
    return coefs, j

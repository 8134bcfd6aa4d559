"""Assemble and solve the barrier-certificate LPs, then gate every verdict.

Two families of programs are built here. The single-candidate program asks
for multipliers making

    (s1 + b*p10 + Lgb.p1) * Lfb - s2 - b*p20 - Lgb.p2 - Lfb^(2a) == 0

with s1, s2 DSOS; a solution certifies that b is a control barrier function
under unbounded inputs. The emptiness program asks for DSOS s0..sL with

    1 + s0 + sum_i si*bi == 0,

whose solvability certifies the joint safe set is empty (a failure verdict
for a multi-candidate system). Feasibility alone is never trusted: every
returned point is re-expanded symbolically and must pass a diagonal
dominance check plus a residual bound before a positive verdict is issued.

Basis reduction (on by default, disable via VerifierOptions.reduce_basis):
multipliers are built over the variables that actually occur in the fixed
data, and Gram entries whose basis product flips sign under a symmetry of
the fixed data are pinned to zero. Substituting the inert variables to zero
maps any full solution onto the restricted space, and averaging a solution
over the sign-flip group zeroes exactly the pruned entries while preserving
diagonal dominance, so the reduced program is feasible if and only if the
full one is; verdicts in both directions survive the reduction.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .affinegram import (
    AffinePolynomial,
    DecisionAllocator,
    DsosVar,
    coefficient_system,
    dd_linear_constraints,
    fresh_dsos_poly,
    fresh_free_poly,
    gram_expansion,
    is_diagonally_dominant,
    mul_fixed,
)
from .lpsolve import (
    LpOutcome,
    LpProblem,
    LpStatus,
    SolverOptions,
    solve_feasibility,
    validate_farkas,
)
from .polyring import (
    Monomial,
    Polynomial,
    PolyMatrix,
    lie_derivative_drift,
    lie_derivative_input,
    monomial_basis,
    monomial_basis_on_support,
)

logger = logging.getLogger(__name__)

DD_GATE_TOL = 1e-7
RESIDUAL_GATE_TOL = 1e-6


class Verdict(Enum):
    VERIFIED = "Verified"
    INCONCLUSIVE = "Inconclusive"
    EMPTINESS_CERTIFIED = "EmptinessCertified"
    MULTI_VERIFIED = "MultiVerified"
    MULTI_INCONCLUSIVE = "MultiInconclusive"


@dataclass(frozen=True)
class ControlAffineSystem:
    """dx/dt = f(x) + g(x) u with polynomial f (n x 1) and g (n x m)."""

    f: PolyMatrix
    g: PolyMatrix

    def __post_init__(self):
        n = self.f.nvars
        if self.f.cols != 1:
            raise ValueError("drift must be a column vector")
        if self.f.rows != n:
            raise ValueError(
                "drift has %d rows but the ring has %d variables" % (self.f.rows, n)
            )
        if self.g.rows != n or self.g.nvars != n:
            raise ValueError("input matrix shape does not match the state dimension")

    @property
    def n(self) -> int:
        return self.f.rows

    @property
    def m(self) -> int:
        return self.g.cols


@dataclass(frozen=True)
class CandidateCbf:
    """Candidate barrier b with cached Lie derivatives along f and g."""

    b: Polynomial
    lfb: Polynomial
    lgb: PolyMatrix  # 1 x m

    @classmethod
    def from_system(cls, b: Polynomial, sys: ControlAffineSystem) -> "CandidateCbf":
        if b.nvars != sys.n:
            raise ValueError(
                "candidate has %d variables, system has %d states" % (b.nvars, sys.n)
            )
        return cls(
            b=b,
            lfb=lie_derivative_drift(b, sys.f),
            lgb=lie_derivative_input(b, sys.g),
        )

    def caches_valid(self, sys: ControlAffineSystem) -> bool:
        return (
            self.lfb == lie_derivative_drift(self.b, sys.f)
            and self.lgb == lie_derivative_input(self.b, sys.g)
        )


@dataclass
class VerifierOptions:
    """Search schedule and gate tolerances.

    a_values: exponents a tried for the Lfb^(2a) term, ascending.
    deg_s: DSOS half-degree schedule (default: [ceil(deg(b)/2)]).
    deg_p: free-multiplier degrees, one per deg_s entry; None picks a degree
        that lets every product reach both the Gram terms and the fixed term.
    emptiness_deg_s: half-degrees for the emptiness sweep (default:
        [0, ceil(max deg(bi)/2)] deduplicated).
    archimedean_C: when set, the emptiness program gains the generator
        C - sum_i x_i^2; when unset a warning records that compactness of
        the described region is the caller's responsibility.
    reduce_basis: apply support restriction and sign-symmetry pruning.
    parallel: solve independent programs on worker threads.
    """

    a_values: Sequence[int] = (0, 1)
    deg_s: Optional[Sequence[int]] = None
    deg_p: Optional[Sequence[int]] = None
    emptiness_deg_s: Optional[Sequence[int]] = None
    archimedean_C: Optional[int] = None
    max_iters: int = 200000
    dd_tol: float = DD_GATE_TOL
    residual_tol: float = RESIDUAL_GATE_TOL
    reduce_basis: bool = True
    parallel: bool = True

    def __post_init__(self):
        if not self.a_values:
            raise ValueError("a_values must be non-empty")
        if any(a < 0 for a in self.a_values):
            raise ValueError("a_values must be non-negative")
        if list(self.a_values) != sorted(self.a_values):
            raise ValueError("a_values must be non-decreasing")
        for name in ("deg_s", "deg_p", "emptiness_deg_s"):
            sched = getattr(self, name)
            if sched is not None:
                if len(sched) == 0:
                    raise ValueError("%s must be non-empty when given" % name)
                if any(d < 0 for d in sched):
                    raise ValueError("%s entries must be non-negative" % name)
                if list(sched) != sorted(sched):
                    raise ValueError("%s must be non-decreasing" % name)
        if self.deg_p is not None and self.deg_s is not None:
            if len(self.deg_p) != len(self.deg_s):
                raise ValueError("deg_p and deg_s schedules must have equal length")
        if self.archimedean_C is not None and self.archimedean_C < 1:
            raise ValueError("archimedean_C must be a positive integer")

    def solver_options(self) -> SolverOptions:
        return SolverOptions(max_iters=self.max_iters)


@dataclass
class Certificate:
    """Numeric multipliers returned by a feasible program.

    kind 'single': grams = [Q1, Q2] over gram_bases, p10/p20 scalar
    multipliers, p1/p2 input-channel multipliers, exponent a.
    kind 'emptiness': grams = [Q0..QL] plus one more when augmented;
    aug_generator stores the appended generator polynomial.
    The residual is the max-abs coefficient left after substituting
    everything back into the defining identity.
    """

    kind: str
    gram_bases: List[List[Monomial]]
    grams: List[np.ndarray]
    residual: float = math.inf
    a: Optional[int] = None
    deg_s: Optional[int] = None
    deg_p: Optional[int] = None
    p10: Optional[Polynomial] = None
    p20: Optional[Polynomial] = None
    p1: Optional[List[Polynomial]] = None
    p2: Optional[List[Polynomial]] = None
    augmented: bool = False
    aug_generator: Optional[Polynomial] = None

    def s_polys(self) -> List[Polynomial]:
        return [gram_expansion(Q, basis) for Q, basis in zip(self.grams, self.gram_bases)]

    def grams_diagonally_dominant(self, tol: float = DD_GATE_TOL) -> bool:
        return all(is_diagonally_dominant(Q, tol) for Q in self.grams)


@dataclass
class LpRecord:
    name: str
    status: str
    rows: int
    cols: int
    iterations: int
    seconds: float
    farkas_valid: Optional[bool] = None


@dataclass
class VerificationOutcome:
    verdict: Verdict
    lps: List[LpRecord] = field(default_factory=list)
    certificate: Optional[Certificate] = None
    singles: Optional[List["VerificationOutcome"]] = None
    warnings: List[str] = field(default_factory=list)
    schedule: Dict[str, object] = field(default_factory=dict)
    seconds: float = 0.0


# -- sign-symmetry machinery -------------------------------------------------

def _parity_mask(mono: Monomial) -> int:
    mask = 0
    for i, e in enumerate(mono):
        if e & 1:
            mask |= 1 << i
    return mask


def sign_symmetry_kernel(polys: Sequence[Polynomial], nvars: int) -> List[int]:
    """Basis (bitmask vectors) of sign flips fixing every given polynomial.

    A flip pattern w sends x_i to -x_i when bit i is set; it fixes a
    polynomial exactly when every monomial has even total degree in the
    flipped variables, i.e. parity(mask(e) & w) = 0 for all exponent
    vectors e. The returned masks span all such w over GF(2).
    """
    rows: List[int] = []
    for p in polys:
        for mono in p.terms:
            m = _parity_mask(mono)
            if m:
                rows.append(m)
    # Reduced row echelon form over GF(2).
    pivots: Dict[int, int] = {}
    for v in rows:
        while v:
            p = v.bit_length() - 1
            if p in pivots:
                v ^= pivots[p]
            else:
                pivots[p] = v
                break
    # Clear pivot bits from the other rows (full reduction).
    for p in sorted(pivots, reverse=True):
        for q in list(pivots):
            if q != p and (pivots[q] >> p) & 1:
                pivots[q] ^= pivots[p]
    pivot_bits = set(pivots)
    free_bits = [b for b in range(nvars) if b not in pivot_bits]
    kernel = []
    for fb in free_bits:
        w = 1 << fb
        for p, row in pivots.items():
            rest = row & ~(1 << p)
            if (rest & w).bit_count() & 1:
                w |= 1 << p
        kernel.append(w)
    return kernel


def _invariant(mono: Monomial, kernel: Sequence[int]) -> bool:
    m = _parity_mask(mono)
    return all((m & w).bit_count() % 2 == 0 for w in kernel)


def _union_support(polys: Sequence[Polynomial]) -> List[int]:
    seen = set()
    for p in polys:
        seen.update(p.support_vars())
    return sorted(seen)


# -- degree policy -----------------------------------------------------------

def default_deg_s(b: Polynomial) -> int:
    return max(0, (b.degree() + 1) // 2)


def default_deg_p(cand: CandidateCbf, a: int, deg_s: int) -> int:
    """Free-multiplier degree letting every product balance the identity.

    The generators multiplied by free polynomials are b and the entries of
    Lgb; their minimum degree dgmin sets how much degree a product can
    reach. The multiplier degree must let those products span both the
    Gram terms (degree 2*deg_s) and, through the Lfb factor, the fixed
    term Lfb^(2a).
    """
    gen_degs = [p.degree() for p in [cand.b] + cand.lgb.entry_list() if not p.is_zero()]
    dgmin = min(gen_degs) if gen_degs else 0
    lfb_deg = cand.lfb.degree() if not cand.lfb.is_zero() else 0
    return max(deg_s, 2 * deg_s - dgmin, (2 * a - 1) * lfb_deg - dgmin, 0)


def default_emptiness_deg_s(cands: Sequence[CandidateCbf]) -> List[int]:
    top = max(max(0, c.b.degree()) for c in cands)
    return sorted({0, (top + 1) // 2})


# -- assembly ----------------------------------------------------------------

@dataclass
class SingleLayout:
    """Decision-space map of one single-candidate program.

    Allocation order: p10, p20, p1 (m polynomials), p2 (m polynomials),
    then s1 (Gram, bounding matrix), then s2. With shared full bases of
    size k this totals 2k^2 + (2m + 4)k variables.
    """

    a: int
    deg_s: int
    deg_p: int
    nvars: int
    reduced: bool
    free_basis: List[Monomial]
    gram_basis: List[Monomial]
    p10: AffinePolynomial
    p20: AffinePolynomial
    p1: List[Optional[AffinePolynomial]]
    p2: List[Optional[AffinePolynomial]]
    s1: DsosVar
    s2: DsosVar
    identity: AffinePolynomial


@dataclass
class EmptinessLayout:
    """Decision-space map of one emptiness program.

    Allocation order: s0, then one DSOS variable per generator (candidates
    first, the compactness generator last when present). With a shared full
    basis of size k and no augmentation this totals (k^2 + k)(L + 1).
    """

    deg_s: int
    nvars: int
    reduced: bool
    gram_basis: List[Monomial]
    s_vars: List[DsosVar]
    generators: List[Polynomial]
    augmented: bool
    identity: AffinePolynomial


def _instantiated_or_zero(ap: Optional[AffinePolynomial], z, nvars: int) -> Polynomial:
    if ap is None:
        return Polynomial.zero(nvars)
    return ap.instantiate(z)


def assemble_single_lp(
    sys: ControlAffineSystem,
    cand: CandidateCbf,
    a: int,
    deg_s: int,
    deg_p: int,
    reduce_basis: bool = False,
) -> Tuple[LpProblem, SingleLayout]:
    """Transcribe the single-candidate identity into an equality/DD system.

    Equality rows match every monomial coefficient of the identity to zero;
    inequality rows are the diagonal-dominance linearizations for s1 and s2.
    """
    if not cand.caches_valid(sys):
        raise ValueError("candidate caches do not match the system")
    n = sys.n
    m = sys.m
    b, lfb, lgb = cand.b, cand.lfb, cand.lgb
    lgb_entries = lgb.entry_list()

    if reduce_basis:
        support = _union_support([b, lfb] + lgb_entries)
        kernel = sign_symmetry_kernel([b, lfb] + lgb_entries, n)
        free_basis = [
            mo
            for mo in monomial_basis_on_support(n, deg_p, support)
            if _invariant(mo, kernel)
        ]
        gram_basis = monomial_basis_on_support(n, deg_s, support)

        def keep_pair(mi: Monomial, mj: Monomial) -> bool:
            prod = tuple(x + y for x, y in zip(mi, mj))
            return _invariant(prod, kernel)

        tau_diagonal = False
    else:
        free_basis = monomial_basis(n, deg_p)
        gram_basis = monomial_basis(n, deg_s)
        keep_pair = None
        tau_diagonal = True

    alloc = DecisionAllocator()
    p10 = fresh_free_poly(alloc, n, deg_p, basis=free_basis)
    p20 = fresh_free_poly(alloc, n, deg_p, basis=free_basis)
    p1: List[Optional[AffinePolynomial]] = []
    p2: List[Optional[AffinePolynomial]] = []
    for j in range(m):
        if reduce_basis and lgb_entries[j].is_zero():
            p1.append(None)  # channel never enters the identity
        else:
            p1.append(fresh_free_poly(alloc, n, deg_p, basis=free_basis))
    for j in range(m):
        if reduce_basis and lgb_entries[j].is_zero():
            p2.append(None)
        else:
            p2.append(fresh_free_poly(alloc, n, deg_p, basis=free_basis))
    s1 = fresh_dsos_poly(alloc, n, deg_s, basis=gram_basis, keep_pair=keep_pair, tau_diagonal=tau_diagonal)
    s2 = fresh_dsos_poly(alloc, n, deg_s, basis=gram_basis, keep_pair=keep_pair, tau_diagonal=tau_diagonal)

    power_term = Polynomial.one(n) if a == 0 else lfb ** (2 * a)

    h1 = s1.expansion + mul_fixed(p10, b)
    for j in range(m):
        if p1[j] is not None:
            h1 = h1 + mul_fixed(p1[j], lgb_entries[j])
    e = mul_fixed(h1, lfb) - s2.expansion - mul_fixed(p20, b)
    for j in range(m):
        if p2[j] is not None:
            e = e - mul_fixed(p2[j], lgb_entries[j])
    e = e - AffinePolynomial.from_polynomial(power_term)

    # A fixed term of higher degree than any multiplier product cannot be
    # matched; assemble anyway, the resulting infeasibility is informative.
    reach = [2 * deg_s + max(lfb.degree(), 0)]
    for gen in [b] + lgb_entries:
        if not gen.is_zero():
            reach.append(gen.degree() + deg_p + max(lfb.degree(), 0))
    if power_term.degree() > max(reach):
        logger.warning(
            "fixed term of degree %d exceeds every multiplier product (max %d); "
            "the program will be infeasible at this schedule",
            power_term.degree(),
            max(reach),
        )

    lp = LpProblem(alloc.count)
    for expr in coefficient_system(e):
        lp.add_eq(dict(expr.linear), -expr.constant)
    for var in (s1, s2):
        for row in dd_linear_constraints(var):
            lp.add_ub(dict(row.linear), -row.constant)

    layout = SingleLayout(
        a=a,
        deg_s=deg_s,
        deg_p=deg_p,
        nvars=alloc.count,
        reduced=reduce_basis,
        free_basis=list(free_basis),
        gram_basis=list(gram_basis),
        p10=p10,
        p20=p20,
        p1=p1,
        p2=p2,
        s1=s1,
        s2=s2,
        identity=e,
    )
    return lp, layout


def augment_archimedean(cands: Sequence, C: int) -> List[Polynomial]:
    """Generator list extended with C - sum_i x_i^2.

    Accepts candidates or plain polynomials; a repeated call on the output
    appends another copy (callers manage idempotence). The added generator
    bounds the described region inside a ball of radius sqrt(C).
    """
    if C < 1:
        raise ValueError("C must be a positive integer")
    gens: List[Polynomial] = []
    for item in cands:
        gens.append(item.b if isinstance(item, CandidateCbf) else item)
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].nvars
    ball = Polynomial.constant(float(C), n)
    for i in range(n):
        ball = ball - Polynomial.variable(i, n) ** 2
    if archimedean_witness(gens) is not None:
        logger.info("a generator already bounds the region; augmentation is redundant")
    return gens + [ball]


def archimedean_witness(generators: Sequence[Polynomial]) -> Optional[int]:
    """Smallest C such that some generator equals c0 - lam * sum x_i^2 scaled.

    Returns None when no generator has that shape; a non-None value means
    the compactness hypothesis already holds natively.
    """
    for gen in generators:
        n = gen.nvars
        zero = (0,) * n
        squares = []
        for i in range(n):
            mono = tuple(2 if j == i else 0 for j in range(n))
            squares.append(mono)
        expected_keys = set(squares) | {zero}
        if set(gen.terms) != expected_keys:
            continue
        c0 = gen.terms.get(zero, 0.0)
        lams = [-gen.terms[mo] for mo in squares]
        if c0 <= 0 or any(l <= 0 for l in lams):
            continue
        lam = lams[0]
        if any(abs(l - lam) > 1e-12 for l in lams):
            continue
        return int(math.ceil(c0 / lam))
    return None


def assemble_emptiness_lp(
    cands: Sequence[CandidateCbf],
    deg_s: int,
    archimedean_C: Optional[int] = None,
    reduce_basis: bool = False,
) -> Tuple[LpProblem, EmptinessLayout]:
    """Transcribe 1 + s0 + sum_i si*bi == 0 into an equality/DD system."""
    if len(cands) < 1:
        raise ValueError("need at least one candidate")
    n = cands[0].b.nvars
    generators = [c.b for c in cands]
    augmented = archimedean_C is not None
    if augmented:
        generators = augment_archimedean(cands, archimedean_C)

    if reduce_basis:
        support = _union_support(generators)
        kernel = sign_symmetry_kernel(generators, n)
        gram_basis = monomial_basis_on_support(n, deg_s, support)

        def keep_pair(mi: Monomial, mj: Monomial) -> bool:
            prod = tuple(x + y for x, y in zip(mi, mj))
            return _invariant(prod, kernel)

        tau_diagonal = False
    else:
        gram_basis = monomial_basis(n, deg_s)
        keep_pair = None
        tau_diagonal = True

    alloc = DecisionAllocator()
    s_vars = [
        fresh_dsos_poly(alloc, n, deg_s, basis=gram_basis, keep_pair=keep_pair, tau_diagonal=tau_diagonal)
        for _ in range(1 + len(generators))
    ]

    e = AffinePolynomial.from_polynomial(Polynomial.one(n)) + s_vars[0].expansion
    for var, gen in zip(s_vars[1:], generators):
        e = e + mul_fixed(var.expansion, gen)

    lp = LpProblem(alloc.count)
    for expr in coefficient_system(e):
        lp.add_eq(dict(expr.linear), -expr.constant)
    for var in s_vars:
        for row in dd_linear_constraints(var):
            lp.add_ub(dict(row.linear), -row.constant)

    layout = EmptinessLayout(
        deg_s=deg_s,
        nvars=alloc.count,
        reduced=reduce_basis,
        gram_basis=list(gram_basis),
        s_vars=s_vars,
        generators=generators,
        augmented=augmented,
        identity=e,
    )
    return lp, layout


# -- certificate extraction and validation -----------------------------------

def extract_single_certificate(
    layout: SingleLayout, z: Sequence[float], sys: ControlAffineSystem, cand: CandidateCbf
) -> Certificate:
    n = sys.n
    cert = Certificate(
        kind="single",
        gram_bases=[list(layout.s1.basis), list(layout.s2.basis)],
        grams=[layout.s1.Q.materialize(z), layout.s2.Q.materialize(z)],
        a=layout.a,
        deg_s=layout.deg_s,
        deg_p=layout.deg_p,
        p10=layout.p10.instantiate(z),
        p20=layout.p20.instantiate(z),
        p1=[_instantiated_or_zero(ap, z, n) for ap in layout.p1],
        p2=[_instantiated_or_zero(ap, z, n) for ap in layout.p2],
    )
    cert.residual = certificate_residual(cert, sys, cand)
    return cert


def extract_emptiness_certificate(
    layout: EmptinessLayout, z: Sequence[float], cands: Sequence[CandidateCbf]
) -> Certificate:
    cert = Certificate(
        kind="emptiness",
        gram_bases=[list(v.basis) for v in layout.s_vars],
        grams=[v.Q.materialize(z) for v in layout.s_vars],
        deg_s=layout.deg_s,
        augmented=layout.augmented,
        aug_generator=layout.generators[-1] if layout.augmented else None,
    )
    cert.residual = certificate_residual(cert, None, cands)
    return cert


def certificate_residual(
    cert: Certificate,
    sys: Optional[ControlAffineSystem],
    cand_or_cands,
) -> float:
    """Max-abs coefficient left after substituting the certificate back.

    The expansion is recomputed from the Gram matrices with plain polynomial
    arithmetic; nothing from the LP transcription is reused, so this is an
    independent check of the returned numbers.
    """
    s_polys = cert.s_polys()
    if cert.kind == "single":
        cand: CandidateCbf = cand_or_cands
        if cert.p10 is None or cert.p20 is None or cert.p1 is None or cert.p2 is None:
            raise ValueError("single certificate is missing multiplier polynomials")
        if len(s_polys) != 2:
            raise ValueError("single certificate must carry exactly two Gram matrices")
        b, lfb, lgb = cand.b, cand.lfb, cand.lgb
        if len(cert.p1) != lgb.cols or len(cert.p2) != lgb.cols:
            raise ValueError("multiplier count does not match the input dimension")
        a = cert.a if cert.a is not None else 0
        power_term = Polynomial.one(b.nvars) if a == 0 else lfb ** (2 * a)
        h1 = s_polys[0] + b * cert.p10
        for j in range(lgb.cols):
            h1 = h1 + lgb[0, j] * cert.p1[j]
        e = h1 * lfb - s_polys[1] - b * cert.p20
        for j in range(lgb.cols):
            e = e - lgb[0, j] * cert.p2[j]
        e = e - power_term
        return e.max_abs_coefficient()

    if cert.kind == "emptiness":
        cands: Sequence[CandidateCbf] = cand_or_cands
        gens = [c.b for c in cands]
        if cert.augmented:
            if cert.aug_generator is None:
                raise ValueError("augmented certificate is missing its generator")
            gens = gens + [cert.aug_generator]
        if len(s_polys) != len(gens) + 1:
            raise ValueError(
                "certificate has %d Gram matrices for %d generators"
                % (len(s_polys), len(gens))
            )
        n = gens[0].nvars
        e = Polynomial.one(n) + s_polys[0]
        for s, gen in zip(s_polys[1:], gens):
            e = e + s * gen
        return e.max_abs_coefficient()

    raise ValueError("unknown certificate kind %r" % cert.kind)


# -- drivers ------------------------------------------------------------------

def _resolved_single_schedule(
    cand: CandidateCbf, opts: VerifierOptions
) -> List[Tuple[int, int, int]]:
    deg_s = list(opts.deg_s) if opts.deg_s is not None else [default_deg_s(cand.b)]
    entries = []
    for a in opts.a_values:
        for idx, ds in enumerate(deg_s):
            if opts.deg_p is not None:
                dp = opts.deg_p[idx]
            else:
                dp = default_deg_p(cand, a, ds)
            entries.append((a, ds, dp))
    return entries


FARKAS_MARGIN = 1e-9
FARKAS_LEVERAGE = 1e6


def _farkas_acceptable(lp: LpProblem, out: LpOutcome) -> bool:
    """Scale-aware acceptance of an infeasibility certificate.

    With combination residual d = max-abs coefficient of sum u_r a_r and
    margin g = -sum u_r beta_r, any feasible point z would need
    ||z||_1 >= g/d. Requiring g >= 1e-9 and g/d >= 1e6 certifies an
    enormous empty box; well-scaled problems clear the ratio by many
    orders of magnitude, while numerically weak certificates (huge
    multipliers from badly mixed coefficient scales) are rejected.
    """
    if out.farkas is None:
        return False
    combo, rhs = validate_farkas(lp, out.farkas)
    margin = -float(rhs)
    if margin < FARKAS_MARGIN:
        return False
    return bool(combo <= margin / FARKAS_LEVERAGE)


def _record(name: str, lp: LpProblem, out: LpOutcome, farkas_valid=None) -> LpRecord:
    return LpRecord(
        name=name,
        status=out.status.value,
        rows=lp.nrows,
        cols=lp.nvars,
        iterations=out.iterations,
        seconds=out.wall_time,
        farkas_valid=farkas_valid,
    )


def verify_single(
    sys: ControlAffineSystem, cand: CandidateCbf, opts: Optional[VerifierOptions] = None
) -> VerificationOutcome:
    """Search the (a, deg_s, deg_p) schedule for a certified identity.

    The first feasible program whose extracted certificate passes both the
    diagonal-dominance and residual gates yields Verified. An exhausted
    schedule yields Inconclusive, never a refutation: failing to find a
    DSOS certificate proves nothing about b.
    """
    if opts is None:
        opts = VerifierOptions()
    t0 = time.perf_counter()
    schedule = _resolved_single_schedule(cand, opts)
    outcome = VerificationOutcome(
        verdict=Verdict.INCONCLUSIVE,
        schedule={
            "entries": [[a, ds, dp] for a, ds, dp in schedule],
            "reduce_basis": opts.reduce_basis,
        },
    )
    solver_opts = opts.solver_options()
    for a, ds, dp in schedule:
        name = "single a=%d deg_s=%d deg_p=%d" % (a, ds, dp)
        lp, layout = assemble_single_lp(sys, cand, a, ds, dp, reduce_basis=opts.reduce_basis)
        out = solve_feasibility(lp, solver_opts)
        logger.info("%s: %s in %d pivots", name, out.status.value, out.iterations)
        farkas_valid = None
        if out.status is LpStatus.INFEASIBLE:
            farkas_valid = _farkas_acceptable(lp, out)
            if not farkas_valid:
                # Nothing rests on a single-candidate infeasibility, it only
                # advances the schedule; record quietly.
                logger.debug("%s: infeasibility certificate is numerically weak", name)
        outcome.lps.append(_record(name, lp, out, farkas_valid))
        if out.status is LpStatus.FEASIBLE:
            cert = extract_single_certificate(layout, out.point, sys, cand)
            if cert.grams_diagonally_dominant(opts.dd_tol) and cert.residual <= opts.residual_tol:
                outcome.verdict = Verdict.VERIFIED
                outcome.certificate = cert
                break
            outcome.warnings.append(
                "%s: feasible point failed the certificate gate "
                "(residual %.3g); schedule continues" % (name, cert.residual)
            )
        elif out.status is LpStatus.ITERATION_LIMIT:
            outcome.warnings.append("%s: iteration limit reached" % name)
    outcome.seconds = time.perf_counter() - t0
    return outcome


def _emptiness_sweep(
    cands: Sequence[CandidateCbf], opts: VerifierOptions
) -> Tuple[List[LpRecord], Optional[Certificate], bool, List[str]]:
    """Run the emptiness program at every scheduled degree.

    Returns (records, certificate or None, all_infeasible_with_valid_farkas,
    warnings).
    """
    records: List[LpRecord] = []
    warnings: List[str] = []
    degrees = (
        list(opts.emptiness_deg_s)
        if opts.emptiness_deg_s is not None
        else default_emptiness_deg_s(cands)
    )
    solver_opts = opts.solver_options()
    all_refuted = True
    for ds in degrees:
        name = "emptiness deg_s=%d" % ds
        lp, layout = assemble_emptiness_lp(
            cands, ds, archimedean_C=opts.archimedean_C, reduce_basis=opts.reduce_basis
        )
        out = solve_feasibility(lp, solver_opts)
        logger.info("%s: %s in %d pivots", name, out.status.value, out.iterations)
        farkas_valid = None
        if out.status is LpStatus.FEASIBLE:
            cert = extract_emptiness_certificate(layout, out.point, cands)
            records.append(_record(name, lp, out))
            if cert.grams_diagonally_dominant(opts.dd_tol) and cert.residual <= opts.residual_tol:
                return records, cert, False, warnings
            warnings.append(
                "%s: feasible point failed the certificate gate (residual %.3g)"
                % (name, cert.residual)
            )
            all_refuted = False
            continue
        if out.status is LpStatus.INFEASIBLE:
            farkas_valid = _farkas_acceptable(lp, out)
            if not farkas_valid:
                warnings.append("%s: infeasibility certificate failed revalidation" % name)
                all_refuted = False
        else:
            all_refuted = False
            if out.status is LpStatus.ITERATION_LIMIT:
                warnings.append("%s: iteration limit reached" % name)
        records.append(_record(name, lp, out, farkas_valid))
    return records, None, all_refuted, warnings


def check_emptiness(
    cands: Sequence[CandidateCbf], opts: Optional[VerifierOptions] = None
) -> VerificationOutcome:
    """Run only the emptiness sweep over the candidates' safe sets.

    EmptinessCertified when some scheduled degree yields a gated
    certificate; otherwise Inconclusive (non-detection proves nothing
    without the joint analysis of verify_multi).
    """
    if opts is None:
        opts = VerifierOptions()
    if len(cands) < 1:
        raise ValueError("need at least one candidate")
    t0 = time.perf_counter()
    records, cert, _, warnings = _emptiness_sweep(cands, opts)
    verdict = Verdict.EMPTINESS_CERTIFIED if cert is not None else Verdict.INCONCLUSIVE
    return VerificationOutcome(
        verdict=verdict,
        lps=records,
        certificate=cert,
        warnings=warnings,
        schedule={
            "emptiness_deg_s": (
                list(opts.emptiness_deg_s)
                if opts.emptiness_deg_s is not None
                else default_emptiness_deg_s(cands)
            ),
            "archimedean_C": opts.archimedean_C,
            "reduce_basis": opts.reduce_basis,
        },
        seconds=time.perf_counter() - t0,
    )


def verify_multi(
    sys: ControlAffineSystem,
    cands: Sequence[CandidateCbf],
    opts: Optional[VerifierOptions] = None,
) -> VerificationOutcome:
    """Joint verification of several candidates.

    Every candidate must verify on its own and the emptiness program must be
    infeasible (with a revalidated certificate) at every scheduled degree;
    then the verdict is MultiVerified. A feasible emptiness program that
    passes the certificate gate certifies the joint safe set empty, which is
    reported as EmptinessCertified. Anything else is MultiInconclusive.
    """
    if opts is None:
        opts = VerifierOptions()
    if len(cands) < 1:
        raise ValueError("need at least one candidate")
    t0 = time.perf_counter()

    warnings: List[str] = []
    if opts.archimedean_C is None:
        witness = archimedean_witness([c.b for c in cands])
        if witness is None:
            warnings.append(
                "no compactness generator: emptiness conclusions assume the "
                "described region satisfies the boundedness hypothesis "
                "(set archimedean_C to enforce it)"
            )

    def run_single(c: CandidateCbf) -> VerificationOutcome:
        return verify_single(sys, c, opts)

    if opts.parallel and len(cands) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(cands) + 1)) as pool:
            empt_future = pool.submit(_emptiness_sweep, cands, opts)
            singles = list(pool.map(run_single, cands))
            empt_records, empt_cert, empt_refuted, empt_warnings = empt_future.result()
    else:
        singles = [run_single(c) for c in cands]
        empt_records, empt_cert, empt_refuted, empt_warnings = _emptiness_sweep(cands, opts)

    warnings.extend(empt_warnings)
    for i, so in enumerate(singles):
        warnings.extend("candidate %d: %s" % (i, w) for w in so.warnings)

    if empt_cert is not None:
        verdict = Verdict.EMPTINESS_CERTIFIED
    elif all(so.verdict is Verdict.VERIFIED for so in singles) and empt_refuted:
        verdict = Verdict.MULTI_VERIFIED
    else:
        verdict = Verdict.MULTI_INCONCLUSIVE

    outcome = VerificationOutcome(
        verdict=verdict,
        lps=empt_records,
        certificate=empt_cert,
        singles=singles,
        warnings=warnings,
        schedule={
            "a_values": list(opts.a_values),
            "emptiness_deg_s": (
                list(opts.emptiness_deg_s)
                if opts.emptiness_deg_s is not None
                else default_emptiness_deg_s(cands)
            ),
            "archimedean_C": opts.archimedean_C,
            "reduce_basis": opts.reduce_basis,
        },
        seconds=time.perf_counter() - t0,
    )
    return outcome

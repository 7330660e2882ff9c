"""Cross-check of the published closed-form reduced-density-matrix elements against the engine.

Each printed element formula is evaluated term by term as a thermal double
sum.  Formulas that are not well formed as printed raise
:class:`MalformedFormula` from :func:`evaluate_printed`; for those the report
still carries the most literal evaluable reading (when one exists), a
corrected expression, and the engine value, so every defect is dispositioned
rather than silently patched.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import evolve_reduced
from .model import AtomPreparation, ModelParams, initial_atomic_density, weights_for
from .propagator import amp_a, amp_b, lam, theta, u22, u23

ELEMENTS = ("rho11", "rho12", "rho13", "rho14", "rho22", "rho23", "rho24", "rho33", "rho34")
INDEX = {name: (int(name[3]) - 1, int(name[4]) - 1) for name in ELEMENTS}
MATCH_TOL = 1e-8

DEFECTS = {
    "rho12": "rho13(0) term multiplies conj(U22); bookkeeping requires conj(U23). "
             "Invisible when rho13(0) = 0 or U22 = U23.",
    "rho14": "double sum contains a nested p1(0)p2(0)rho14(0)(1+2A11/lambda11) term and "
             "boundary sums, the second factor carries (n1+1)(n2+1)A*_{n-1}/lambda_{n-1} "
             "(needs n1 n2), and A*_{n-1} is undefined at n1 = 0 or n2 = 0; "
             "the subscript lambda_{1+1,n2+1} also disagrees with A_{1,n2+1}. No evaluable reading.",
    "rho23": "last term n1 n2 rho44(0) B_n/theta_n is not a modulus squared and sits at the wrong "
             "photon index; the rho22 sibling has n1 n2 rho44(0)|B_{n-1}|^2/theta_{n-1}^2 summed from 1.",
    "rho24": "printed without '='; with '=' restored the expression agrees with the engine.",
    "rho33": "printed without '='; rho11(0) is factored outside the bracket that also holds the "
             "rho22/rho23/rho32/rho33 terms, and |B|/theta appears unsquared in two places.",
    "rho34": "printed without '='; parentheses unbalanced, p1/p2 written as 'p1(n1)', rho24/rho34 "
             "lack '(0)', and the leading term carries rho11(0) where (rho12(0) + rho13(0)) belongs.",
}
# formulas that cannot be taken as printed
MALFORMED = ("rho14", "rho23", "rho24", "rho33", "rho34")


class MalformedFormula(ValueError):
    pass


class _Sums:
    """Thermal-sum ingredients on the truncated (n1, n2) grid at one gt."""

    def __init__(self, params: ModelParams, gt: float):
        w1, w2 = weights_for(params)
        self.alpha = params.alpha
        self.gt = gt
        self.n1, self.n2 = np.meshgrid(np.arange(w1.cutoff + 1), np.arange(w2.cutoff + 1), indexing="ij")
        self.n1 = self.n1.astype(float)
        self.n2 = self.n2.astype(float)
        self.p = np.outer(w1.weights, w2.weights)
        self.u22 = u22(self.n1, self.n2, self.alpha, gt)
        self.u23 = u23(self.n1, self.n2, self.alpha, gt)
        self.u32 = self.u23
        self.u33 = self.u22
        self.nn = self.n1 * self.n2
        self.np1 = (self.n1 + 1) * (self.n2 + 1)

    def _at(self, fn, d):
        k1 = self.n1 + d
        k2 = self.n2 + d
        ok = (k1 >= 0) & (k2 >= 0)
        out = np.zeros(k1.shape, dtype=complex)
        out[ok] = fn(k1[ok], k2[ok])
        return out

    def al(self, d):
        """A/lambda at (n1+d, n2+d); zero where that index does not exist."""
        return self._at(lambda a, b: amp_a(a, b, self.alpha, self.gt) / lam(a, b), d)

    def bt(self, d):
        """B/theta at (n1+d, n2+d); zero where that index does not exist."""
        return self._at(lambda a, b: amp_b(a, b, self.alpha, self.gt) / theta(a, b, self.alpha), d)

    def from_(self, k):
        return (self.n1 >= k) & (self.n2 >= k)

    def total(self, terms, mask=None):
        terms = np.broadcast_to(terms, self.p.shape)
        if mask is not None:
            terms = np.where(mask, terms, 0.0)
        return complex(np.sum(self.p * terms))

    def u11(self):
        return 1.0 + 2.0 * self.np1 * self.al(1)

    def u44c(self):
        """conj(U44) on |n1, n2>; equals 1 on the dark boundary n1 n2 = 0."""
        return np.conj(1.0 + 2.0 * self.nn * self.al(-1))


def _r(rho0, i, j):
    return rho0[i - 1, j - 1]


def _printed(name, s: _Sums, r0):
    def r(i, j):
        return _r(r0, i, j)

    x = s.u11()
    if name == "rho11":
        return (s.total(r(1, 1) * x * np.conj(x) + (r(2, 2) + r(3, 2) + r(2, 3) + r(3, 3)) * s.nn * np.abs(s.bt(0)) ** 2)
                + 4 * s.total(r(4, 4) * s.nn * (s.n1 - 1) * (s.n2 - 1) * np.abs(s.al(-1)) ** 2, s.from_(2)))
    tail12 = s.total((r(2, 4) + r(3, 4)) * s.nn * s.bt(0) * np.conj(s.bt(-1)), s.from_(1))
    if name == "rho12":
        return s.total((r(1, 2) * np.conj(s.u22) + r(1, 3) * np.conj(s.u22)) * x) + tail12
    if name == "rho13":
        return s.total((r(1, 2) * np.conj(s.u32) + r(1, 3) * np.conj(s.u33)) * x) + tail12
    if name == "rho22":
        return (s.total(r(1, 1) * s.np1 * np.abs(s.bt(1)) ** 2 + r(2, 2) * s.u22 * np.conj(s.u22)
                        + r(3, 2) * s.u23 * np.conj(s.u22) + r(2, 3) * s.u22 * np.conj(s.u23)
                        + r(3, 3) * s.u23 * np.conj(s.u23))
                + s.total(r(4, 4) * s.nn * np.abs(s.bt(-1)) ** 2, s.from_(1)))
    raise MalformedFormula(f"{name}: {DEFECTS[name]}")


def _literal(name, s: _Sums, r0):
    """Most literal evaluable reading of a malformed formula, or None."""
    def r(i, j):
        return _r(r0, i, j)

    boundary = s.nn == 0
    if name == "rho23":
        return (s.total(r(1, 1) * s.np1 * np.abs(s.bt(1)) ** 2 + r(2, 2) * s.u22 * np.conj(s.u32)
                        + r(3, 2) * s.u23 * np.conj(s.u32) + r(2, 3) * s.u22 * np.conj(s.u33)
                        + r(3, 3) * s.u23 * np.conj(s.u33))
                + s.total(s.nn * r(4, 4) * s.bt(0)))
    if name == "rho24":
        mix = r(2, 4) * s.u22 + r(3, 4) * s.u23
        return (s.total(s.np1 * (r(1, 2) + r(1, 3)) * np.conj(s.bt(0)) * s.bt(1))
                + s.total(mix, boundary)
                + s.total(mix * (1.0 + 2.0 * s.nn * np.conj(s.al(-1))), s.from_(1)))
    if name == "rho33":
        return (s.total(r(1, 1) * (s.np1 * np.abs(s.bt(1)) + r(2, 3) * s.u32 * np.conj(s.u33)
                                   + r(3, 2) * s.u33 * np.conj(s.u32) + r(2, 2) * s.u32 * np.conj(s.u32)
                                   + r(3, 3) * s.u33 * np.conj(s.u33)))
                + s.total(r(4, 4) * s.nn * np.abs(s.bt(-1)), s.from_(1)))
    if name == "rho34":
        mix = r(2, 4) * s.u32 + r(3, 4) * s.u33
        return (s.total(r(1, 1) * s.np1 * np.conj(s.bt(0)) * s.bt(1))
                + s.total(mix, boundary)
                + s.total(mix * (1.0 + 2.0 * s.nn * np.conj(s.al(-1))), s.from_(1)))
    return None


def _corrected(name, s: _Sums, r0):
    """Element expressions rederived from the ladder bookkeeping."""
    def r(i, j):
        return _r(r0, i, j)

    x = s.u11()
    y = s.u44c()
    b_low = np.abs(s.bt(-1)) ** 2
    if name in ("rho11", "rho13", "rho22"):
        return _printed(name, s, r0)
    if name == "rho12":
        return (s.total((r(1, 2) * np.conj(s.u22) + r(1, 3) * np.conj(s.u23)) * x)
                + s.total((r(2, 4) + r(3, 4)) * s.nn * s.bt(0) * np.conj(s.bt(-1)), s.from_(1)))
    if name == "rho14":
        return s.total(r(1, 4) * x * y)
    if name == "rho23":
        return (s.total(r(1, 1) * s.np1 * np.abs(s.bt(1)) ** 2 + r(2, 2) * s.u22 * np.conj(s.u32)
                        + r(3, 2) * s.u23 * np.conj(s.u32) + r(2, 3) * s.u22 * np.conj(s.u33)
                        + r(3, 3) * s.u23 * np.conj(s.u33))
                + s.total(r(4, 4) * s.nn * b_low, s.from_(1)))
    if name == "rho24":
        return (s.total(s.np1 * (r(1, 2) + r(1, 3)) * np.conj(s.bt(0)) * s.bt(1))
                + s.total((r(2, 4) * s.u22 + r(3, 4) * s.u23) * y))
    if name == "rho33":
        return (s.total(r(1, 1) * s.np1 * np.abs(s.bt(1)) ** 2 + r(2, 3) * s.u32 * np.conj(s.u33)
                        + r(3, 2) * s.u33 * np.conj(s.u32) + r(2, 2) * s.u32 * np.conj(s.u32)
                        + r(3, 3) * s.u33 * np.conj(s.u33))
                + s.total(r(4, 4) * s.nn * b_low, s.from_(1)))
    if name == "rho34":
        return (s.total((r(1, 2) + r(1, 3)) * s.np1 * np.conj(s.bt(0)) * s.bt(1))
                + s.total((r(2, 4) * s.u32 + r(3, 4) * s.u33) * y))
    raise KeyError(name)


def evaluate_printed(name: str, params: ModelParams, prep: AtomPreparation, gt: float) -> complex:
    """Value of one published element formula taken as printed."""
    if name not in ELEMENTS:
        raise KeyError(name)
    return _printed(name, _Sums(params, gt), initial_atomic_density(prep))


def evaluate_corrected(name: str, params: ModelParams, prep: AtomPreparation, gt: float) -> complex:
    if name not in ELEMENTS:
        raise KeyError(name)
    return _corrected(name, _Sums(params, gt), initial_atomic_density(prep))


@dataclass
class AppendixEntry:
    name: str
    status: str                    # "well_formed" or "malformed"
    engine: complex
    printed: complex | None        # as printed, or the literal reading for malformed entries
    corrected: complex
    defect: str | None = None

    @property
    def deviation(self) -> float | None:
        return None if self.printed is None else abs(self.printed - self.engine)

    @property
    def corrected_deviation(self) -> float:
        return abs(self.corrected - self.engine)

    def as_dict(self):
        def c(z):
            return None if z is None else [z.real, z.imag]
        return {"element": self.name, "status": self.status, "engine": c(self.engine),
                "printed": c(self.printed), "deviation": self.deviation,
                "corrected": c(self.corrected), "corrected_deviation": self.corrected_deviation,
                "defect": self.defect}


@dataclass
class AppendixReport:
    gt: float
    entries: list = field(default_factory=list)
    tol: float = MATCH_TOL

    def well_formed(self):
        return [e for e in self.entries if e.status == "well_formed"]

    @property
    def errata(self):
        """Malformed entries plus well-formed ones that disagree with the engine."""
        return [e for e in self.entries
                if e.status == "malformed" or (e.deviation is not None and e.deviation > self.tol)]

    @property
    def well_formed_ok(self) -> bool:
        return all(e.deviation <= self.tol for e in self.well_formed())


def appendix_elements(params: ModelParams, prep: AtomPreparation, gt: float, engine_rho=None,
                      tol: float = MATCH_TOL) -> AppendixReport:
    """Evaluate every published element at one gt and compare with the engine's reduced state."""
    if engine_rho is None:
        engine_rho = evolve_reduced(params, prep, gt).rho
    s = _Sums(params, gt)
    r0 = initial_atomic_density(prep)
    report = AppendixReport(float(gt), tol=tol)
    for name in ELEMENTS:
        i, j = INDEX[name]
        eng = complex(engine_rho[i, j])
        try:
            printed = _printed(name, s, r0)
            status = "well_formed"
        except MalformedFormula:
            printed = _literal(name, s, r0)
            status = "malformed"
        entry = AppendixEntry(name, status, eng, printed, _corrected(name, s, r0))
        if status == "malformed" or (entry.deviation is not None and entry.deviation > tol):
            entry.defect = DEFECTS.get(name, "printed formula disagrees with the engine")
        report.entries.append(entry)
    return report

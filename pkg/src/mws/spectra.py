"""Spectrum solver: interlaced root finding, counting laws, realisations.

The dispersion relation V_nn(eps) = eps - eps0 is solved per base state; in
the approximate regime V_nn is a rational function and every open interval
between consecutive poles carries exactly one root.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from mws import _kernels
from mws.effpot import ChannelBases, PoleWeightTable, apply_effective_potential, \
    build_bases, build_pole_weight_table, vnn_eval
from mws.eigenbasis import EigenBasis, apply_kinetic, matrix_element, \
    solve_base_eigenproblem
from mws.errors import SolverError, UnsupportedModeError
from mws.model import SystemSpec


@dataclass(frozen=True, eq=False)
class RootSet:
    """Roots with bracket certificates f(lo) > 0 > f(hi) and residuals."""

    roots: np.ndarray
    bracket_lo: np.ndarray
    bracket_hi: np.ndarray
    f_lo: np.ndarray
    f_hi: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True, eq=False)
class StateSpectrum:
    n: int
    epsilon0: float
    table: PoleWeightTable
    rootset: RootSet

    @property
    def roots(self) -> np.ndarray:
        return self.rootset.roots


@dataclass(frozen=True)
class CountReport:
    n_p: int
    n_prime: int
    n_s: int
    n_max: int
    n_0: int
    n_delta: int
    n_max_reduced: int
    n_0_reduced: int
    n_delta_reduced: int
    max_per_normal_reduced: float


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    states: tuple[StateSpectrum, ...]
    counts: CountReport
    observed_total: int
    degeneracy_deficit: int
    mode: str

    def all_roots(self) -> list[tuple[int, int, float]]:
        """(n, j, root) triples in fixed order."""
        out = []
        for st in self.states:
            for j, r in enumerate(st.roots, start=1):
                out.append((st.n, j, float(r)))
        return out


@dataclass(frozen=True)
class RootRef:
    n: int
    j: int
    value: float


@dataclass(frozen=True)
class Realisation:
    index: int
    members: tuple[RootRef, ...]


@dataclass(frozen=True)
class RealisationEnsemble:
    realisations: tuple[Realisation, ...]
    method: str
    n_r: int


def _solve_rational(poles: np.ndarray, weights: np.ndarray, epsilon0: float) -> RootSet:
    if len(poles) == 0:
        # f(eps) = eps0 - eps: the single root is eps0 itself
        return RootSet(
            roots=np.array([epsilon0]),
            bracket_lo=np.array([epsilon0 - 1.0]),
            bracket_hi=np.array([epsilon0 + 1.0]),
            f_lo=np.array([1.0]),
            f_hi=np.array([-1.0]),
            residuals=np.array([0.0]),
        )
    roots, lo, hi, flo, fhi = _kernels.solve_secular(poles, weights, epsilon0)
    res = np.array([abs(_kernels.secular_residual(poles, weights, epsilon0, r))
                    for r in roots])
    return RootSet(roots=roots, bracket_lo=lo, bracket_hi=hi,
                   f_lo=flo, f_hi=fhi, residuals=res)


def find_roots(table: PoleWeightTable, epsilon0: float) -> RootSet:
    """All roots of V_nn(eps) = eps - eps0, one per pole-bounded interval."""
    if table.mode == "exact" and table.spatial:
        raise UnsupportedModeError(
            "guaranteed root finding needs the rational (approximate) form; "
            "use find_roots_exact for the diagnostic scan"
        )
    return _solve_rational(table.poles, table.weights, epsilon0)


def find_roots_exact(table: PoleWeightTable, epsilon0: float,
                     n_samples: int = 4001) -> np.ndarray:
    """Diagnostic scan roots for the exact denominators (no count claim).

    Samples each pole-bounded interval, approaching the singular endpoints
    geometrically so roots hugging a pole are not stepped over, then bisects
    every sign change. The scan stops at epsilon = E where the square roots
    turn imaginary.
    """
    if not table.spatial:
        return find_roots(table, epsilon0).roots
    e = table.total_energy
    poles = [float(p) for p in table.poles if p < e]
    if poles:
        spread = poles[-1] - poles[0] if len(poles) > 1 else 0.0
        lo = min(poles[0], epsilon0) - (spread + 1.0)
    else:
        lo = epsilon0 - 1.0
    hi = e
    if hi <= lo:
        lo = hi - max(1.0, abs(hi))
    edges = [lo] + [p for p in poles if lo < p < hi] + [hi]

    def f(eps: float) -> float | None:
        try:
            return vnn_eval(table, eps) - eps + epsilon0
        except SolverError:
            return None

    def bisect(a: float, fa: float, b: float, fb: float) -> float:
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = f(m)
            if fm is None:
                break
            if fm == 0.0:
                return m
            if fa * fm < 0.0:
                b, fb = m, fm
            else:
                a, fa = m, fm
            if b - a <= 1e-13 * max(1.0, abs(a)):
                break
        return 0.5 * (a + b)

    per = max(16, n_samples // max(1, len(edges) - 1))
    roots: list[float] = []
    for a, b in zip(edges, edges[1:]):
        gap = b - a
        if gap <= 0.0:
            continue
        offs = [gap * 10.0 ** (-j) for j in range(12, 0, -1)]
        xs = sorted(
            {a + d for d in offs if a < a + d < b}
            | {b - d for d in offs if a < b - d < b}
            | set(np.linspace(a + 0.1 * gap, b - 0.1 * gap, per).tolist())
        )
        vals = [f(x) for x in xs]
        for (x1, f1), (x2, f2) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
            if f1 is None or f2 is None:
                continue
            if f1 == 0.0:
                roots.append(x1)
            elif f1 * f2 < 0.0:
                roots.append(bisect(x1, f1, x2, f2))
    fe = f(hi)
    if fe == 0.0:
        roots.append(hi)
    return np.array(sorted(roots))


def count_solutions(spec: SystemSpec) -> CountReport:
    """Closed-form solution counts from the truncation parameters."""
    n_p = spec.n_harmonics
    n_pr = spec.n_prime
    n_s = spec.n_base
    n_max_r = n_p * n_pr + 1
    n_0_r = n_pr + 1
    n_delta_r = n_pr * (n_p - 1)
    return CountReport(
        n_p=n_p,
        n_prime=n_pr,
        n_s=n_s,
        n_max=n_max_r * n_s,
        n_0=n_0_r * n_s,
        n_delta=n_delta_r * n_s,
        n_max_reduced=n_max_r,
        n_0_reduced=n_0_r,
        n_delta_reduced=n_delta_r,
        max_per_normal_reduced=n_max_r / n_0_r,
    )


def assert_interlacing(poles: np.ndarray, roots: np.ndarray) -> None:
    """Strict alternation root < pole < root < ... with P+1 roots."""
    if len(roots) != len(poles) + 1:
        raise SolverError(
            f"expected {len(poles) + 1} roots for {len(poles)} poles, got {len(roots)}"
        )
    merged = np.empty(len(poles) + len(roots))
    merged[0::2] = roots
    merged[1::2] = poles
    if not np.all(np.diff(merged) > 0.0):
        raise SolverError("poles and roots do not strictly alternate")


def _assert_rootset(state: StateSpectrum) -> None:
    rs = state.rootset
    poles = state.table.poles
    assert_interlacing(poles, rs.roots)
    if len(poles) > 0 and not np.all((rs.f_lo > 0.0) & (rs.f_hi < 0.0)):
        raise SolverError(f"bracket certificate failed for base state {state.n}")
    bound = 1e-9 * np.maximum(1.0, np.abs(rs.roots))
    worst = int(np.argmax(rs.residuals - bound))
    if rs.residuals[worst] > bound[worst]:
        raise SolverError(
            f"residual {rs.residuals[worst]!r} at root {rs.roots[worst]!r} "
            f"(base state {state.n}) exceeds 1e-9*max(1,|eps|)"
        )


def solve_spectrum(spec: SystemSpec, jobs: int = 1) -> SpectrumResult:
    """Full pipeline: bases, pole tables, roots per base state, counts."""
    bases = build_bases(spec, jobs=jobs)
    counts = count_solutions(spec)
    exact_spatial = spec.denominator_mode == "exact" and spec.is_spatial

    def solve_one(n: int) -> StateSpectrum:
        table = build_pole_weight_table(spec, bases, n)
        eps0 = float(bases.base.eigenvalues[n - 1])
        if exact_spatial:
            roots = find_roots_exact(table, eps0)
            nans = np.full(len(roots), np.nan)
            rs = RootSet(roots=roots, bracket_lo=nans, bracket_hi=nans,
                         f_lo=nans, f_hi=nans, residuals=nans)
        else:
            rs = find_roots(table, eps0)
        return StateSpectrum(n=n, epsilon0=eps0, table=table, rootset=rs)

    ns = range(1, spec.n_base + 1)
    if jobs > 1 and spec.n_base > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(solve_one, n) for n in ns]
            states = tuple(f.result() for f in futures)  # fixed n order
    else:
        states = tuple(solve_one(n) for n in ns)

    if not exact_spatial:
        for st in states:
            _assert_rootset(st)
    observed = sum(len(st.roots) for st in states)
    deficit = counts.n_max - observed
    if not exact_spatial and deficit > 0:
        warnings.warn(
            f"root count {observed} falls {deficit} short of the nominal "
            f"{counts.n_max} (merged or zero-weight poles)",
            stacklevel=2,
        )
    return SpectrumResult(states=states, counts=counts, observed_total=observed,
                          degeneracy_deficit=deficit, mode=spec.denominator_mode)


def split_at_largest_gaps(values: np.ndarray, n_groups: int) -> list[np.ndarray]:
    """Split an ascending array at its n_groups-1 widest gaps (leftmost on ties)."""
    values = np.asarray(values, dtype=float)
    if n_groups < 1:
        raise ValueError("n_groups must be >= 1")
    if n_groups > len(values):
        raise SolverError(
            f"cannot form {n_groups} groups from {len(values)} values"
        )
    if n_groups == 1:
        return [values]
    gaps = np.diff(values)
    order = sorted(range(len(gaps)), key=lambda i: (-gaps[i], i))
    cuts = sorted(i + 1 for i in order[: n_groups - 1])
    return [values[a:b] for a, b in zip([0] + cuts, cuts + [len(values)])]


def group_realisations(result: SpectrumResult, n_r: int | None = None) -> RealisationEnsemble:
    """Partition each base state's roots into realisations at the widest gaps.

    `n_r=None` means the automatic choice: one realisation per harmonic.
    """
    method = "largest-gaps"
    if n_r is None:
        n_r = result.counts.n_p
        method = "auto-largest-gaps"
    bound = result.counts.n_prime * (result.counts.n_p - 1) + 1
    if n_r > bound:
        raise SolverError(
            f"requested {n_r} realisations exceeds the formal bound {bound}"
        )
    groups_per_n: list[list[np.ndarray]] = []
    for st in result.states:
        if n_r > len(st.roots):
            raise SolverError(
                f"requested {n_r} realisations but base state {st.n} has only "
                f"{len(st.roots)} roots"
            )
        groups_per_n.append(split_at_largest_gaps(st.roots, n_r))

    realisations = []
    for i in range(n_r):
        members = []
        for st, groups in zip(result.states, groups_per_n):
            base_j = sum(len(g) for g in groups[:i])
            for off, value in enumerate(groups[i]):
                members.append(RootRef(st.n, base_j + off + 1, float(value)))
        realisations.append(Realisation(index=i + 1, members=tuple(members)))
    return RealisationEnsemble(realisations=tuple(realisations), method=method, n_r=n_r)


@dataclass(frozen=True)
class SeparationEstimates:
    max_estimate: float
    min_estimate: float | None


def realisation_separation(spec: SystemSpec, basis: EigenBasis | None = None,
                           want_min: bool = True) -> SeparationEstimates:
    """Separation scale estimates: mean base level spacing and the period bound."""
    if basis is None or basis.n_states < 2:
        basis = solve_base_eigenproblem(spec, n_states=max(2, spec.n_base))
    max_est = float(np.mean(np.diff(basis.eigenvalues)))
    min_est: float | None = None
    if want_min:
        if not spec.is_spatial:
            raise UnsupportedModeError(
                "the minimum separation estimate needs a spatial period"
            )
        e = spec.total_energy
        if e < 0.0:
            raise SolverError("minimum separation estimate needs E >= 0")
        min_est = 2.0 * np.pi * np.sqrt(2.0 * e) / spec.perturbation.period
    return SeparationEstimates(max_estimate=max_est, min_estimate=min_est)


@dataclass(frozen=True, eq=False)
class AppendixRoots:
    k: int
    n: int
    poles: np.ndarray
    weights: np.ndarray
    rootset: RootSet

    @property
    def roots(self) -> np.ndarray:
        return self.rootset.roots


def appendix_auxiliary_roots(spec: SystemSpec, base0: EigenBasis, k: int,
                             n: int) -> AppendixRoots:
    """Auxiliary-channel root structure for excluded harmonic k, base state n.

    Poles sit at the base eigenvalues shifted down by omega*k; each pole's
    weight collects the squared couplings of all other harmonics.
    """
    if spec.is_spatial:
        raise UnsupportedModeError("the auxiliary analysis applies to temporal mode")
    if k not in spec.indices:
        raise SolverError(f"channel {k} is not a retained harmonic")
    if not (1 <= n <= base0.n_states):
        raise IndexError(f"base state {n} out of range 1..{base0.n_states}")
    omega = spec.perturbation.angular_frequency
    raw = []
    for n_prime in range(1, base0.n_states + 1):
        w = 0.0
        for h in spec.harmonics:
            if h.index == k:
                continue
            w += abs(matrix_element(base0, base0, h.amplitude, n_prime, n)) ** 2
        if w > 0.0:
            raw.append((float(base0.eigenvalues[n_prime - 1]) - omega * k, w))
    raw.sort()
    poles = np.array([p for p, _ in raw])
    weights = np.array([w for _, w in raw])
    if len(poles) > 1:
        merge_tol = 1e-9 * (poles[-1] - poles[0])
        keep_p, keep_w = [poles[0]], [weights[0]]
        for p, w in zip(poles[1:], weights[1:]):
            if p - keep_p[-1] <= merge_tol:
                keep_w[-1] += w
            else:
                keep_p.append(p)
                keep_w.append(w)
        poles = np.array(keep_p)
        weights = np.array(keep_w)
    eps0 = float(base0.eigenvalues[n - 1])
    rs = _solve_rational(poles, weights, eps0)
    return AppendixRoots(k=k, n=n, poles=poles, weights=weights, rootset=rs)


@dataclass(frozen=True, eq=False)
class KShiftDiagnostic:
    per_k: dict[int, np.ndarray]  # unshifted root sets, extra root removed
    spread: float


def appendix_k_shift(spec: SystemSpec, base0: EigenBasis, n: int) -> KShiftDiagnostic:
    """How much the auxiliary eigenvalue set moves across excluded channels.

    For each k the root closest to the state's own diagonal energy (the line
    crossing) is dropped; the remaining roots are shifted back by omega*k and
    compared rank by rank across k.
    """
    omega = spec.perturbation.angular_frequency
    eps0 = float(base0.eigenvalues[n - 1])
    per_k: dict[int, np.ndarray] = {}
    for k in spec.indices:
        ar = appendix_auxiliary_roots(spec, base0, k, n)
        roots = list(ar.roots)
        if len(roots) > 1:
            drop = min(range(len(roots)), key=lambda i: abs(roots[i] - eps0))
            roots = roots[:drop] + roots[drop + 1:]
        per_k[k] = np.array(roots) + omega * k
    lengths = {len(v) for v in per_k.values()}
    if len(lengths) != 1:
        raise SolverError("auxiliary root sets differ in size across channels")
    stacked = np.vstack([per_k[k] for k in sorted(per_k)])
    spread = float(np.max(stacked.max(axis=0) - stacked.min(axis=0))) \
        if stacked.size else 0.0
    return KShiftDiagnostic(per_k=per_k, spread=spread)


def modified_equation_residual(spec: SystemSpec, bases: ChannelBases,
                               root: float, n: int) -> float:
    """|| (h0 + V_eff(root) - root) psi0_n || / || psi0_n || by quadrature."""
    if not (1 <= n <= bases.base.n_states):
        raise IndexError(f"base state {n} out of range")
    phi = bases.base.eigenfunctions[n - 1].astype(complex)
    h_phi = apply_kinetic(bases.base.grid, phi) \
        + apply_effective_potential(spec, bases, root, phi) - root * phi
    w = bases.base.quad_weights
    num = np.sqrt(float(np.sum(w * np.abs(h_phi) ** 2)))
    den = np.sqrt(float(np.sum(w * np.abs(phi) ** 2)))
    return num / den

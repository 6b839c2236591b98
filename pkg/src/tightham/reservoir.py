"""The absorbing gadget: a sparse hypergraph with a removable reservoir vertex.

``build_core`` produces the dense part D (as many edges as vertices, plus
one), ``build_reservoir_graph`` pads it with long inserted tight paths so
that the whole thing has a tight Hamilton path both with and without the
reservoir vertex ``w*``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CertificationFailure, EllTooSmall, EpsOutOfRange, InternalVerificationFailure
from .hypergraph import Hypergraph, one_density, windows
from .oracle import brute_m1, flow_m1, is_one_degenerate, verify_tight_path


def choose_ell(r: int, eps: float) -> int:
    if r < 2:
        raise EpsOutOfRange(f"r={r} must be at least 2")
    if not 0 < eps < 1 / (6 * r):
        raise EpsOutOfRange(f"eps={eps} outside (0, 1/(6r)) for r={r}")
    return math.ceil(1 / (2 * (r - 1) * eps)) + 2


def gadget_k(r: int, ell: int) -> int:
    return 3 * (r - 1) ** 2 * (2 * ell - 1)


def core_size(r: int, ell: int) -> int:
    return 2 * (r - 1) * (2 * ell - 1) + 1


def reservoir_size(r: int, ell: int, k: int | None = None) -> tuple[int, int]:
    """(v, e) of the padded gadget."""
    k = gadget_k(r, ell) if k is None else k
    d = core_size(r, ell)
    return d + 2 * k * (ell - 1), d + 2 * (k + r - 1) * (ell - 1)


@dataclass
class Core:
    """D with its labelled groups (each an ordered tuple of labels)."""

    r: int
    ell: int
    graph: Hypergraph
    U: tuple[int, ...]
    V: tuple[int, ...]
    A: list[tuple[int, ...]]
    B: list[tuple[int, ...]]
    w_star: int
    bridges: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def special_set(self) -> frozenset[int]:
        """w* and the interior vertices of every group (all other vertices have degree 2)."""
        m = 2 * (self.r - 1)
        s = set(self.U[1:self.r - 1]) | set(self.U[self.r:2 * self.r - 2]) | {self.w_star}
        for grp in [self.V, *self.A, *self.B]:
            s.update(grp[1:m - 1])
        return frozenset(s)


def _check_ell(ell: int) -> None:
    if ell < 3:
        raise EllTooSmall(f"ell={ell} must be at least 3")


def build_core(r: int, ell: int) -> Core:
    _check_ell(ell)
    m = 2 * (r - 1)
    nxt = iter(range(core_size(r, ell)))
    U = tuple(next(nxt) for _ in range(m + 1))
    V = tuple(next(nxt) for _ in range(m))
    A = [tuple(next(nxt) for _ in range(m)) for _ in range(ell - 1)]
    B = [tuple(next(nxt) for _ in range(m)) for _ in range(ell - 2)]
    u = U[:r - 1] + U[r:]            # u_1..u_{2(r-1)}, skipping w*
    w_star = U[r - 1]

    def head_rev(grp):               # x_{r-1}, ..., x_1
        return tuple(reversed(grp[:r - 1]))

    def tail_rev(grp):               # x_{2(r-1)}, ..., x_r
        return tuple(reversed(grp[r - 1:]))

    bridges = {
        "U_A": u[:r - 1] + head_rev(A[0]),
        "V_A": tail_rev(A[-1]) + V[r - 1:],
        "U_B": tail_rev(u) + head_rev(B[0]),
        "V_B": tail_rev(B[-1]) + tuple(reversed(V[:r - 1])),
    }
    for i in range(ell - 2):
        bridges[f"A_{i + 1},{i + 2}"] = tail_rev(A[i]) + head_rev(A[i + 1])
    for i in range(ell - 3):
        bridges[f"B_{i + 1},{i + 2}"] = tail_rev(B[i]) + head_rev(B[i + 1])

    g = Hypergraph(core_size(r, ell), r)
    for seq in [U, V, *A, *B, *bridges.values()]:
        g.add_edges(windows(seq, r))
    return Core(r, ell, g, U, V, A, B, w_star, bridges)


@dataclass
class ReservoirGraph:
    H_star: Hypergraph
    u: tuple[int, ...]
    v: tuple[int, ...]
    w_star: int
    path_with: list[int]
    path_without: list[int]
    core: Core
    ell: int
    k: int
    blocks: dict[str, tuple[int, ...]]

    @property
    def r(self) -> int:
        return self.H_star.r

    def num_vertices(self) -> int:
        return self.H_star.num_vertices()

    def relabel(self, mapping) -> dict:
        """Paths and tuples under a vertex map (a sequence or dict)."""
        f = mapping.__getitem__
        return {
            "u": tuple(map(f, self.u)), "v": tuple(map(f, self.v)), "w_star": f(self.w_star),
            "path_with": [f(x) for x in self.path_with],
            "path_without": [f(x) for x in self.path_without],
        }


def build_reservoir_graph(r: int, ell: int, k: int | None = None) -> ReservoirGraph:
    """The padded gadget; ``k`` overrides the block length (default: the safe value)."""
    core = build_core(r, ell)
    k = gadget_k(r, ell) if k is None else k
    if k < 0:
        raise EllTooSmall("block length must be non-negative")
    nv, _ = reservoir_size(r, ell, k)
    base = core_size(r, ell)
    labels = iter(range(base, nv))
    A, B = core.A, core.B

    def block():
        return tuple(next(labels) for _ in range(k))

    blocks: dict[str, tuple[int, ...]] = {"U,A1": block()}
    order: list[tuple[int, ...]] = [core.U, blocks["U,A1"], A[0]]
    for i in range(ell - 2):
        blocks[f"A{i + 1},B{i + 1}"] = block()
        blocks[f"B{i + 1},A{i + 2}"] = block()
        order += [blocks[f"A{i + 1},B{i + 1}"], B[i], blocks[f"B{i + 1},A{i + 2}"], A[i + 1]]
    blocks[f"A{ell - 1},V"] = block()
    order += [blocks[f"A{ell - 1},V"], core.V]
    path_with = [x for seg in order for x in seg]

    def rev(t):
        return tuple(reversed(t))

    br = core.bridges
    seq = [br["U_A"], rev(blocks["U,A1"]), br["U_B"], rev(blocks["A1,B1"])]
    for i in range(1, ell - 1):
        seq.append(br[f"A_{i},{i + 1}"])
        seq.append(rev(blocks[f"B{i},A{i + 1}"]))
        if i < ell - 2:
            seq.append(br[f"B_{i},{i + 1}"])
            seq.append(rev(blocks[f"A{i + 1},B{i + 1}"]))
    seq += [br["V_B"], rev(blocks[f"A{ell - 1},V"]), br["V_A"]]
    path_without = [x for seg in seq for x in seg]

    h = Hypergraph(nv, r, core.graph.edges)
    h.add_edges(windows(path_with, r))

    u = core.U[:r - 1]
    v = core.V[r - 1:]
    rg = ReservoirGraph(h, u, v, core.w_star, path_with, path_without, core, ell, k, blocks)
    _self_check(rg)
    return rg


def _self_check(rg: ReservoirGraph) -> None:
    r, h = rg.r, rg.H_star
    nv, ne = reservoir_size(r, rg.ell, rg.k)
    if h.num_vertices() != nv or h.num_edges() != ne:
        raise InternalVerificationFailure(
            f"gadget has {h.num_vertices()}/{h.num_edges()}, expected {nv}/{ne}")
    for name, path, cover in (("with", rg.path_with, h.vertices),
                              ("without", rg.path_without, h.vertices - {rg.w_star})):
        verdict = verify_tight_path(h, path)
        if not verdict or set(path) != cover or len(path) != len(cover):
            raise InternalVerificationFailure(f"path_{name} is not Hamiltonian: {verdict.first_violation}")
        if tuple(path[:r - 1]) != rg.u or tuple(path[-(r - 1):]) != rg.v:
            raise InternalVerificationFailure(f"path_{name} has the wrong ends")


@dataclass(frozen=True)
class DensityCertificate:
    d_core: Fraction
    d_reservoir: Fraction
    m1_core: Fraction
    m1_method: str
    peeled: int
    peeling_failures: tuple[int, ...]
    eps: float

    def as_dict(self) -> dict:
        return {"d1_core": str(self.d_core), "d1_reservoir": str(self.d_reservoir),
                "m1_core": str(self.m1_core), "m1_method": self.m1_method,
                "peeling_certificates": self.peeled,
                "peeling_failures": list(self.peeling_failures), "eps": self.eps}


def certify_density(rg: ReservoirGraph, eps: float, exact_limit: int = 24) -> DensityCertificate:
    """Check that D is the densest part of the gadget and that its density is at most 1+eps.

    m1(D) is computed exhaustively up to ``exact_limit`` vertices and by
    parametric min cuts beyond. Vertices of S whose removal does not peel
    away are reported; they are tolerated only because m1(D) is exact.
    """
    core = rg.core
    d = core.graph
    d_core = one_density(d)
    d_res = one_density(rg.H_star)
    if d.num_vertices() <= exact_limit:
        m1, _ = brute_m1(d, max_vertices=exact_limit)
        method = "exhaustive"
    else:
        m1, _ = flow_m1(d)
        method = "min-cut"
    if m1 != d_core:
        raise CertificationFailure("exact", f"m1(D)={m1} differs from d1(D)={d_core}")
    special = core.special_set()
    failures = tuple(x for x in sorted(special) if not is_one_degenerate(d.remove_vertices([x])))
    degs = d.degrees()
    for x in sorted(d.vertices - special):
        if degs[x] != 2:
            raise CertificationFailure("degree", f"vertex {x} outside S has degree {degs[x]}")
    k = rg.k
    if not k * d_core > k + rg.r - 1:
        raise CertificationFailure("blocks", f"k={k} inserted vertices are not sparse enough")
    if not d_res < d_core:
        raise CertificationFailure("arithmetic", f"d1(H*)={d_res} is not below d1(D)={d_core}")
    # floats such as 1/30 sit just below the intended rational
    if d_core > 1 + Fraction(eps).limit_denominator(10 ** 9):
        raise CertificationFailure("arithmetic", f"d1(D)={d_core} exceeds 1+eps={1 + eps}")
    return DensityCertificate(d_core, d_res, m1, method, len(special) - len(failures), failures, eps)

"""Structural measures on a signed directed network.

Sign-class decomposition, densities, continent and degree assortativity,
node strengths, net strengths with the quadrant classification, and 3x3
continent flow aggregates. Self-links count throughout: they sit inside the
within-continent blocks, enter the density numerator, and contribute to
degrees and strengths. Degenerate cases (no edges, zero degree variance)
return None rather than NaN so reports can show an empty cell plus a reason.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .markets import CONTINENT_ORDER, Continent, MarketSet
from .network import SignedNetwork


class SignClass(enum.Enum):
    UNSIGNED = "unsigned"
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Basis(enum.Enum):
    DEGREES = "degrees"
    STRENGTHS = "strengths"


def decompose(m: np.ndarray, sign_class: SignClass) -> np.ndarray:
    """Sign-class part of a signed matrix.

    Unsigned: |m|. Positive: (|m| + m) / 2. Negative: (|m| - m) / 2.
    Exact for both sign matrices and float weights (halving is exact).
    """
    m = np.asarray(m)
    a = np.abs(m)
    if sign_class is SignClass.UNSIGNED:
        return a
    if np.issubdtype(m.dtype, np.integer):
        return (a + m) // 2 if sign_class is SignClass.POSITIVE else (a - m) // 2
    return (a + m) / 2 if sign_class is SignClass.POSITIVE else (a - m) / 2


def density(net: SignedNetwork, sign_class: SignClass) -> Fraction:
    """Link count of the sign class (self-links included) over N(N-1).

    Returned as an exact rational so that the unsigned density equals the
    positive plus the negative density identically; convert with float()
    for reporting.
    """
    n = net.n
    if n < 2:
        raise ValueError("density needs at least 2 markets")
    count = int(decompose(net.A, sign_class).sum())
    return Fraction(count, n * (n - 1))


def _class_edges(net: SignedNetwork, sign_class: SignClass) -> np.ndarray:
    return np.asarray(decompose(net.A, sign_class), dtype=np.int64)


def _continent_mix(net: SignedNetwork, sign_class: SignClass, ms: MarketSet) -> np.ndarray:
    codes = ms.continent_codes()
    edges = _class_edges(net, sign_class)
    counts = np.zeros((3, 3), dtype=np.int64)
    for a in range(3):
        for b in range(3):
            counts[a, b] = edges[np.ix_(codes == a, codes == b)].sum()
    return counts


def continent_assortativity(
    net: SignedNetwork, sign_class: SignClass, ms: MarketSet | None = None
) -> float | None:
    """Mixing coefficient over the three continent labels.

    r = (sum_k e_kk - sum_k e_k. * e_.k) / (1 - sum_k e_k. * e_.k), where
    e is the matrix of edge fractions between continents. None when the
    class has no edges or the denominator vanishes (all mass on a single
    continent block).
    """
    ms = net.markets if ms is None else ms
    counts = _continent_mix(net, sign_class, ms)
    total = counts.sum()
    if total == 0:
        return None
    e = counts / total
    agreement = float(np.trace(e))
    rand = float((e.sum(axis=1) * e.sum(axis=0)).sum())
    denom = 1.0 - rand
    if denom == 0.0:
        return None
    return (agreement - rand) / denom


def degree_assortativity(net: SignedNetwork, sign_class: SignClass) -> float | None:
    """Directed degree-mixing coefficient of the sign-class subnetwork.

    Over the class's edges, correlates the source's out-degree with the
    target's in-degree (degrees taken within the same subnetwork). None when
    there are no edges or either endpoint degree has zero variance.
    """
    edges = _class_edges(net, sign_class)
    src, tgt = np.nonzero(edges)
    if src.size == 0:
        return None
    out_deg = edges.sum(axis=1)
    in_deg = edges.sum(axis=0)
    x = out_deg[src]
    y = in_deg[tgt]
    # moments scaled by E^2 stay integers, so zero variance is detected
    # exactly rather than through float rounding
    e = int(src.size)
    sx = int(x.sum())
    sy = int(y.sum())
    var_x = e * int((x * x).sum()) - sx * sx
    var_y = e * int((y * y).sum()) - sy * sy
    if var_x == 0 or var_y == 0:
        return None
    cov = e * int((x * y).sum()) - sx * sy
    return float(cov / (np.sqrt(float(var_x)) * np.sqrt(float(var_y))))


@dataclass(frozen=True)
class NodeStrengths:
    """Positive/negative in- and out-strengths and their net values."""

    in_pos: float
    out_pos: float
    in_neg: float
    out_neg: float
    net_in: float
    net_out: float


def node_strengths(net: SignedNetwork) -> dict[str, NodeStrengths]:
    """Column sums give in-strengths, row sums out-strengths (row = source)."""
    wp = decompose(net.W, SignClass.POSITIVE)
    wn = decompose(net.W, SignClass.NEGATIVE)
    in_pos = wp.sum(axis=0)
    out_pos = wp.sum(axis=1)
    in_neg = wn.sum(axis=0)
    out_neg = wn.sum(axis=1)
    out = {}
    for i, mid in enumerate(net.markets.ids):
        out[mid] = NodeStrengths(
            in_pos=float(in_pos[i]),
            out_pos=float(out_pos[i]),
            in_neg=float(in_neg[i]),
            out_neg=float(out_neg[i]),
            net_in=float(in_pos[i] - in_neg[i]),
            net_out=float(out_pos[i] - out_neg[i]),
        )
    return out


QUADRANTS = ("Q1", "Q2", "Q3", "Q4", "Axis")


def quadrant_classify(strengths: dict[str, NodeStrengths]) -> dict[str, str]:
    """Net-strength quadrant per market; exact zeros land on Axis."""
    out = {}
    for mid, ns in strengths.items():
        if ns.net_out > 0 and ns.net_in > 0:
            q = "Q1"
        elif ns.net_out < 0 and ns.net_in > 0:
            q = "Q2"
        elif ns.net_out < 0 and ns.net_in < 0:
            q = "Q3"
        elif ns.net_out > 0 and ns.net_in < 0:
            q = "Q4"
        else:
            q = "Axis"
        out[mid] = q
    return out


@dataclass(frozen=True)
class ContinentFlow:
    """3x3 aggregate of links or weights between continents for one sign class."""

    values: np.ndarray  # indexed (from-continent, to-continent)
    basis: Basis
    sign_class: SignClass
    continents: tuple[Continent, ...] = CONTINENT_ORDER

    def get(self, from_continent: Continent, to_continent: Continent) -> float:
        i = self.continents.index(from_continent)
        j = self.continents.index(to_continent)
        return float(self.values[i, j])


def continent_flows(
    net: SignedNetwork,
    basis: Basis,
    sign_class: SignClass,
    ms: MarketSet | None = None,
) -> ContinentFlow:
    """Block sums of the class-decomposed matrix; diagonal blocks keep self-links.

    The unsigned strength table is assembled as the positive table plus the
    negative table (a partition of the same addends), which keeps the
    positive + negative = unsigned identity exact in floating point.
    """
    ms = net.markets if ms is None else ms
    if basis is Basis.STRENGTHS and sign_class is SignClass.UNSIGNED:
        pos = continent_flows(net, basis, SignClass.POSITIVE, ms)
        neg = continent_flows(net, basis, SignClass.NEGATIVE, ms)
        return ContinentFlow(
            values=pos.values + neg.values, basis=basis, sign_class=sign_class
        )
    m = net.A if basis is Basis.DEGREES else net.W
    part = decompose(m, sign_class)
    codes = ms.continent_codes()
    values = np.zeros((3, 3), dtype=part.dtype)
    for a in range(3):
        for b in range(3):
            values[a, b] = part[np.ix_(codes == a, codes == b)].sum()
    return ContinentFlow(values=values, basis=basis, sign_class=sign_class)


def metrics_summary(net: SignedNetwork) -> dict:
    """Every structural metric as one JSON-serializable mapping.

    Undefined assortativities appear as None with a companion reason string.
    """
    summary: dict = {"n_markets": net.n}
    summary["edge_counts"] = {
        cls.value: int(decompose(net.A, cls).sum()) for cls in SignClass
    }
    summary["density"] = {cls.value: float(density(net, cls)) for cls in SignClass}

    cont: dict = {}
    cont_reason: dict = {}
    deg: dict = {}
    deg_reason: dict = {}
    for cls in SignClass:
        edges = _class_edges(net, cls)
        n_edges = int(edges.sum())
        c_val = continent_assortativity(net, cls)
        cont[cls.value] = c_val
        if c_val is None:
            cont_reason[cls.value] = (
                "no edges" if n_edges == 0 else "all edges in one continent block"
            )
        d_val = degree_assortativity(net, cls)
        deg[cls.value] = d_val
        if d_val is None:
            deg_reason[cls.value] = "no edges" if n_edges == 0 else "zero degree variance"
    summary["assortativity"] = {
        "continent": cont,
        "continent_reason": cont_reason,
        "degree": deg,
        "degree_reason": deg_reason,
    }

    strengths = node_strengths(net)
    summary["strengths"] = {
        mid: {
            "in_pos": ns.in_pos,
            "out_pos": ns.out_pos,
            "in_neg": ns.in_neg,
            "out_neg": ns.out_neg,
            "net_in": ns.net_in,
            "net_out": ns.net_out,
        }
        for mid, ns in strengths.items()
    }
    summary["quadrants"] = quadrant_classify(strengths)

    flows: dict = {}
    for basis in Basis:
        flows[basis.value] = {}
        for cls in SignClass:
            flow = continent_flows(net, basis, cls)
            flows[basis.value][cls.value] = {
                from_c.value: {
                    to_c.value: (
                        int(flow.values[i, j])
                        if basis is Basis.DEGREES
                        else float(flow.values[i, j])
                    )
                    for j, to_c in enumerate(flow.continents)
                }
                for i, from_c in enumerate(flow.continents)
            }
    summary["continent_flows"] = flows
    return summary

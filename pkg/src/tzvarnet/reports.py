"""Artifact serialization: matrix CSVs, metric reports, manifests.

Floats are written with shortest round-trip precision (repr), so re-reading
an artifact reproduces the in-memory value bit for bit. JSON is emitted
with sorted keys; all artifact contents are independent of thread count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, canonical_dict, config_hash
from .errors import DataError
from .evalcmp import ComparisonRow
from .markets import MarketSet
from .netmetrics import metrics_summary
from .network import SignedNetwork
from .rolling import WindowFlows
from .selection import LambdaSelection
from .tzvar import CoefficientMatrix


def fmt(x: float) -> str:
    return repr(float(x))


def write_matrix_csv(path: str | Path, m: np.ndarray, ids: tuple[str, ...]) -> None:
    """N x N matrix with market ids as the first row and first column."""
    m = np.asarray(m)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["", *ids])
        for i, mid in enumerate(ids):
            row = [mid]
            for j in range(len(ids)):
                v = m[i, j]
                row.append(str(int(v)) if np.issubdtype(m.dtype, np.integer) else fmt(v))
            writer.writerow(row)


def read_matrix_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows) < 2:
        raise DataError(f"{path}: not a matrix CSV")
    ids = tuple(rows[0][1:])
    n = len(ids)
    m = np.empty((n, n))
    if len(rows) != n + 1:
        raise DataError(f"{path}: expected {n + 1} rows, found {len(rows)}")
    for i, row in enumerate(rows[1:]):
        if len(row) != n + 1 or row[0] != ids[i]:
            raise DataError(f"{path}: malformed row {i + 2}")
        for j, cell in enumerate(row[1:]):
            try:
                m[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell at row {i + 2}") from None
    return ids, m


def network_from_files(
    adjacency_path: str | Path, weights_path: str | Path, markets: MarketSet
) -> SignedNetwork:
    a_ids, a = read_matrix_csv(adjacency_path)
    w_ids, w = read_matrix_csv(weights_path)
    if a_ids != markets.ids or w_ids != markets.ids:
        raise DataError("matrix ids do not match the market roster")
    return SignedNetwork(A=a.astype(np.int8), W=w, markets=markets)


def coefficients_to_dict(cm: CoefficientMatrix) -> dict:
    ids = cm.markets.ids
    return {
        "structure": cm.structure.value,
        "markets": list(ids),
        "coefficients": {
            target: {source: float(cm.B[i, j]) for j, source in enumerate(ids)}
            for i, target in enumerate(ids)
        },
        "intercepts": {mid: float(cm.intercepts[i]) for i, mid in enumerate(ids)},
        "converged": {mid: bool(cm.converged[i]) for i, mid in enumerate(ids)},
    }


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def selections_to_dict(selections: dict[str, LambdaSelection]) -> dict:
    out = {}
    for mid, sel in selections.items():
        out[mid] = {
            "lambda_star": sel.lambda_star,
            "top": [{"lambda": lam, "freq": q} for lam, q in sel.top],
            "R": sel.replications,
            "M": sel.top_m,
        }
        if sel.note:
            out[mid]["note"] = sel.note
    return out


def metrics_csv_rows(summary: dict, period: str) -> list[list[str]]:
    rows: list[list[str]] = []

    def add(metric, basis="", sign_class="", from_c="", to_c="", market="", value=None, reason=""):
        if value is None:
            cell = ""
        elif isinstance(value, str):
            cell = value
        elif isinstance(value, (int, np.integer)):
            cell = str(int(value))
        else:
            cell = fmt(value)
        rows.append([period, metric, basis, sign_class, from_c, to_c, market, cell, reason])

    for cls, v in summary["density"].items():
        add("density", sign_class=cls, value=v)
    for cls, v in summary["edge_counts"].items():
        add("edge_count", sign_class=cls, value=v)
    assort = summary["assortativity"]
    for cls, v in assort["continent"].items():
        add(
            "continent_assortativity",
            sign_class=cls,
            value=v,
            reason=assort["continent_reason"].get(cls, ""),
        )
    for cls, v in assort["degree"].items():
        add(
            "degree_assortativity",
            sign_class=cls,
            value=v,
            reason=assort["degree_reason"].get(cls, ""),
        )
    for mid, st in summary["strengths"].items():
        add("in_strength", sign_class="positive", market=mid, value=st["in_pos"])
        add("in_strength", sign_class="negative", market=mid, value=st["in_neg"])
        add("out_strength", sign_class="positive", market=mid, value=st["out_pos"])
        add("out_strength", sign_class="negative", market=mid, value=st["out_neg"])
        add("net_in_strength", market=mid, value=st["net_in"])
        add("net_out_strength", market=mid, value=st["net_out"])
    for mid, q in summary["quadrants"].items():
        add("quadrant", market=mid, value=q)
    for basis, per_class in summary["continent_flows"].items():
        for cls, table in per_class.items():
            for from_c, inner in table.items():
                for to_c, v in inner.items():
                    add(
                        "continent_flow",
                        basis=basis,
                        sign_class=cls,
                        from_c=from_c,
                        to_c=to_c,
                        value=v,
                    )
    return rows


_METRICS_HEADER = [
    "period", "metric", "basis", "sign_class", "from", "to", "market", "value", "reason",
]


def write_metrics_csv(summary: dict, period: str, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_METRICS_HEADER)
        writer.writerows(metrics_csv_rows(summary, period))


def write_network_metrics(net: SignedNetwork, period: str, out_dir: Path) -> list[str]:
    summary = metrics_summary(net)
    write_json(summary, out_dir / "metrics.json")
    write_metrics_csv(summary, period, out_dir / "metrics.csv")
    return ["metrics.json", "metrics.csv"]


def write_flows_csv(results: list[WindowFlows], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "window_start", "window_end", "year_label", "sign_class",
                "from_continent", "to_continent", "value", "partial", "error",
            ]
        )
        for res in results:
            w = res.window
            base = [w.start_date.isoformat(), w.end_date.isoformat(), w.year_label or ""]
            if res.error is not None:
                writer.writerow(base + ["", "", "", "", "", res.error])
                continue
            partial = ";".join(res.partial)
            for flow in (res.positive, res.negative):
                for i, from_c in enumerate(flow.continents):
                    for j, to_c in enumerate(flow.continents):
                        writer.writerow(
                            base
                            + [
                                flow.sign_class.value,
                                from_c.value,
                                to_c.value,
                                fmt(flow.values[i, j]),
                                partial,
                                "",
                            ]
                        )


def write_stability_csv(rows: list[tuple[float, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "density", "mutual_proportion"])
        for i, (dens, mutual) in enumerate(rows, start=1):
            writer.writerow([str(i), fmt(dens), fmt(mutual)])


def write_comparison_csv(rows: list[ComparisonRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["market", "continent", "r2_is", "r2_oos"])
        for row in rows:
            writer.writerow(
                [
                    row.market,
                    row.continent,
                    "" if row.r2_is is None else fmt(row.r2_is),
                    "" if row.r2_oos is None else fmt(row.r2_oos),
                ]
            )


def write_gap_report(panel, path: str | Path) -> int:
    """One row per filled gap cell (date, market); returns the gap count."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "market"])
        count = 0
        if panel.gap_mask is not None:
            rows, cols = panel.gap_mask.nonzero()
            for r, c in zip(rows, cols):
                writer.writerow([panel.dates[r].isoformat(), panel.markets.ids[c]])
                count += 1
    return count


def write_ar_diagonal_csv(pairs: list[tuple[str, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["market", "ar_coefficient"])
        for mid, coef in pairs:
            writer.writerow([mid, fmt(coef)])


def versions() -> dict:
    import numba

    return {
        "tzvarnet": __version__,
        "python": ".".join(str(v) for v in sys.version_info[:3]),
        "numpy": np.__version__,
        "numba": numba.__version__,
    }


def write_manifest(
    out_dir: Path,
    subcommand: str,
    cfg: RunConfig | None,
    artifacts: list[str],
    extra: dict | None = None,
) -> None:
    payload: dict = {
        "subcommand": subcommand,
        "artifacts": sorted(artifacts),
        "versions": versions(),
    }
    if cfg is not None:
        payload["config"] = canonical_dict(cfg)
        payload["config_sha256"] = config_hash(cfg)
        payload["seed"] = cfg.seed
    if extra:
        payload.update(extra)
    write_json(payload, out_dir / "manifest.json")


def scenario_hash(scenario: dict) -> str:
    blob = json.dumps(scenario, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()

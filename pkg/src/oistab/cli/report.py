"""Machine-readable analysis reports.

A Report is a tree of plain JSON values: expressions are stored as their
canonical strings, so serialization round-trips exactly and repeated runs
produce byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .. import __version__
from ..inversion import BoundEstimate, InverseMap
from ..model import AffineSystem
from ..structure import (
    Assumption1Violation,
    Assumption2Violation,
    IterationCap,
    StructureReport,
    StructureStep,
    Terminated,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ASSUMPTION2 = 2
EXIT_ITERATION_CAP = 3
EXIT_ASSUMPTION1 = 4
EXIT_TOLERANCE = 5
EXIT_CERTIFICATE_FAILED = 6

_EXIT_BY_KIND = {
    "terminated": EXIT_OK,
    "assumption2_violation": EXIT_ASSUMPTION2,
    "iteration_cap": EXIT_ITERATION_CAP,
    "assumption1_violation": EXIT_ASSUMPTION1,
}


def exit_code_for(outcome: dict) -> int:
    return _EXIT_BY_KIND[outcome["kind"]]


@dataclass
class Report:
    system: dict
    steps: list
    outcome: dict
    meta: dict
    inverse: Optional[dict] = None
    bounds: Optional[dict] = None
    verification: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"system": self.system, "steps": self.steps, "outcome": self.outcome}
        for key in ("inverse", "bounds", "verification"):
            value = getattr(self, key)
            if value:
                out[key] = value
        out["meta"] = self.meta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(
            system=data["system"],
            steps=data["steps"],
            outcome=data["outcome"],
            meta=data["meta"],
            inverse=data.get("inverse"),
            bounds=data.get("bounds"),
            verification=data.get("verification"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    @property
    def exit_code(self) -> int:
        return exit_code_for(self.outcome)


def _matrix(M) -> Optional[list]:
    return None if M is None else M.to_strings()


def system_section(sys: AffineSystem) -> dict:
    return {
        "name": sys.name,
        "states": [s.name for s in sys.states],
        "n": sys.n,
        "m": sys.m,
        "p": sys.p,
        "f": [str(v) for v in sys.f],
        "G": [[str(v) for v in row] for row in sys.G],
        "h": [str(v) for v in sys.h],
    }


def step_section(st: StructureStep) -> dict:
    out = {
        "k": st.k,
        "r": st.r,
        "mode": st.mode,
        "M": _matrix(st.M),
        "h": [str(v) for v in st.h],
        "hhat": [str(v) for v in st.hhat],
        "Jbar": _matrix(st.Jbar),
    }
    if st.k > 0:
        w = st.rank_witness
        out.update(
            {
                "E": list(st.E),
                "F": _matrix(st.F),
                "R": _matrix(st.R),
                "Jhat": _matrix(st.Jhat),
                "rank_witness": {
                    "rank": w.rank,
                    "pivot_rows": list(w.pivot_rows),
                    "pivot_cols": list(w.pivot_cols),
                    "pivot_minor": str(w.pivot_minor),
                    "locus": [str(q) for q in w.locus],
                },
            }
        )
        if st.locus:
            out["off_locus"] = [str(q) for q in st.locus]
    out["assumption1_violations"] = [
        {"row": row, "input": i + 1, "column": col, "lie_derivative": str(v)}
        for row, i, col, v in st.a1_violations
    ]
    return out


def outcome_section(rep: StructureReport) -> dict:
    o = rep.outcome
    if isinstance(o, Terminated):
        out = {"kind": o.kind, "k_star": o.k_star}
    elif isinstance(o, IterationCap):
        out = {"kind": o.kind, "max_k": o.max_k, "note": "iteration cap reached; not a proof that k* is infinite"}
    elif isinstance(o, Assumption2Violation):
        out = {
            "kind": o.kind,
            "step": o.step,
            "locus": [str(q) for q in o.locus],
            "rank": o.rank,
            "pivot_rows": list(o.pivot_rows),
        }
    elif isinstance(o, Assumption1Violation):
        out = {
            "kind": o.kind,
            "step": o.step,
            "violations": [
                {"row": row, "input": i + 1, "column": col, "lie_derivative": str(v)}
                for row, i, col, v in o.violations
            ],
        }
    else:  # pragma: no cover
        raise TypeError(o)
    out["ranks"] = rep.ranks
    out["singh_activated_at"] = rep.singh_activated_at
    out["exit_code"] = _EXIT_BY_KIND[o.kind]
    return out


def inverse_section(inv: InverseMap) -> dict:
    out = {
        "k_star": inv.k_star,
        "mode": inv.mode,
        "y_symbols": [s.name for s in inv.y_symbols],
        "u": [str(e) for e in inv.u],
        "polynomial_in_y": inv.polynomial_in_y,
    }
    if inv.A is not None:
        out["A"] = [str(a) for a in inv.A]
        out["B"] = inv.B.to_strings()
    return out


def bounds_section(b: BoundEstimate) -> dict:
    return {
        "norm": b.norm,
        "box": b.box,
        "sample_count": b.sample_count,
        "skipped": b.skipped,
        "seed": b.seed,
        "b_norm": b.b_norm,
        "radius_grid": b.radius_grid,
        "gamma1": b.gamma1,
        "gamma2": b.gamma2,
        "rho1": b.rho1,
        "rho2": b.rho2,
        "note": "sampled maxima on the stated box, not global class-K-infinity functions",
    }


def meta_section(config: dict) -> dict:
    return {"tool": "oistab", "version": __version__, "config": config}


def emit_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def _fmt_matrix(rows: list, indent: str = "    ") -> list[str]:
    if not rows:
        return [indent + "[]"]
    widths = [max(len(r[j]) for r in rows) for j in range(len(rows[0]))] if rows[0] else []
    return [indent + "[ " + "  ".join(v.rjust(w) for v, w in zip(r, widths)) + " ]" for r in rows]


def emit_text(report: Report) -> str:
    s = report.system
    out = [f"system {s['name'] or '(unnamed)'}: n={s['n']} m={s['m']} p={s['p']}"]
    for st in report.steps:
        out.append(f"step k={st['k']}  r={st['r']}  mode={st['mode']}")
        if st["k"] > 0:
            out.append(f"  row order E = {st['E']}")
            out.append("  R =")
            out.extend(_fmt_matrix(st["R"]))
            w = st["rank_witness"]
            out.append(f"  pivot minor {w['pivot_minor']}  locus {w['locus'] or '[]'}")
        out.append("  M =")
        out.extend(_fmt_matrix(st["M"]))
        out.append(f"  h = [{', '.join(st['h'])}]")
        for v in st["assumption1_violations"]:
            out.append(f"  Assumption 1 fails: L_g{v['input']} of row {v['row']} column {v['column']} = {v['lie_derivative']}")
    o = report.outcome
    if o["kind"] == "terminated":
        out.append(f"outcome: terminated, k* = {o['k_star']}, ranks {o['ranks']}")
    elif o["kind"] == "assumption2_violation":
        out.append(f"outcome: Assumption 2 fails at step {o['step']} -> {o['step'] + 1}; locus {o['locus']}")
    elif o["kind"] == "iteration_cap":
        out.append(f"outcome: iteration cap {o['max_k']} reached ({o['note']})")
    else:
        out.append(f"outcome: Assumption 1 fails at step {o['step']} (affine-only mode)")
    if o.get("singh_activated_at") is not None:
        out.append(f"  Singh's variant active from k = {o['singh_activated_at']}")
    if report.inverse:
        inv = report.inverse
        out.append(f"inverse ({inv['mode']}), y^k* = ({', '.join(inv['y_symbols'])}):")
        for i, e in enumerate(inv["u"], 1):
            out.append(f"  u{i} = {e}")
        if inv["mode"] != "affine":
            out.append(f"  polynomial in y: {inv['polynomial_in_y']}")
    if report.bounds:
        b = report.bounds
        out.append(f"bounds on box {b['box']} ({b['sample_count']} samples, |B(0)| = {b['b_norm']:.12g})")
        out.append("  r, gamma1, gamma2, rho1, rho2")
        for row in zip(b["radius_grid"], b["gamma1"], b["gamma2"], b["rho1"], b["rho2"]):
            out.append("  " + ", ".join(f"{v:.6g}" for v in row))
    if report.verification:
        out.append("verification:")
        for k, v in report.verification.items():
            out.append(f"  {k}: {json.dumps(v)}")
    return "\n".join(out) + "\n"


def emit_report(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return emit_json(report)
    if fmt == "text":
        return emit_text(report)
    raise ValueError(f"unknown format {fmt!r}")

"""Regenerate systems/*.sys and the golden reports in tests/golden/.

Run after an intentional change to the report format:

    python scripts/make_corpus.py
"""

from pathlib import Path

from oistab.cli.dsl import format_system
from oistab.cli.report import emit_json
from oistab.fixtures import LINEAR_SEEDS, corpus
from oistab.pipeline import analyze_system

ROOT = Path(__file__).resolve().parents[1]

NOTES = {
    "example1": "worked example 1; terminates with k* = 2",
    "example2": "rank of the decoupling matrix drops on x2 = 0",
    "example3": "Assumption 1 fails at k = 1; Singh's variant terminates",
    "example3_extended": "example3 with x3' = x4, x4' = u2",
    "example4": "output-input stable, but the decoupling matrix loses rank on x4 = 0",
    "double_integrator": "x1' = x2, x2' = u, y = x1",
}


def main():
    sysdir = ROOT / "systems"
    golden = ROOT / "tests" / "golden"
    sysdir.mkdir(exist_ok=True)
    golden.mkdir(parents=True, exist_ok=True)
    seeds = {f"linear_seed{s}": (s, n, m) for s, n, m in LINEAR_SEEDS}
    for name, sys_ in corpus().items():
        if name in seeds:
            s, n, m = seeds[name]
            note = f"random linear system, seed {s}, n = {n}, m = p = {m}"
        else:
            note = NOTES[name]
        (sysdir / f"{name}.sys").write_text(f"# {note}\n" + format_system(sys_))
        report = analyze_system(sys_).report
        (golden / f"{name}.json").write_text(emit_json(report))
        print(f"{name}: {report.outcome['kind']}")


if __name__ == "__main__":
    main()

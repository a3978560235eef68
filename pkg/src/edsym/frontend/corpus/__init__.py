"""Bundled problem files and the pipelines whose outputs are pinned as goldens.

Run ``python -m edsym.frontend.corpus`` to rewrite the golden files.
"""

from __future__ import annotations

from pathlib import Path

HERE = Path(__file__).resolve().parent
GOLDEN = HERE / "golden"

# (problem, golden suffix, CLI arguments after the file name)
PIPELINES: list[tuple[str, str, tuple[str, ...]]] = [
    ("heat-I", "determine", ("determine",)),
    ("heat-I", "determine-substitution", ("determine", "--strategy", "substitution")),
    ("heat-I", "determine-split", ("determine", "--assume", "t:t", "--assume", "x:x,t",
                                   "--split", "w")),
    ("heat-I", "determine-latex", ("determine", "--format", "latex")),
    ("heat-I", "determine-json", ("determine", "--format", "json")),
    ("heat-I", "close", ("close",)),
    ("heat-I", "section", ("section",)),
    ("heat-I", "check", ("check",)),
    ("heat-Iprime", "contact", ("contact",)),
    ("heat-Iprime", "determine", ("determine",)),
    ("heat-Iprime", "check", ("check",)),
    ("boltzmann", "determine", ("determine",)),
    ("boltzmann", "determine-substitution", ("determine", "--strategy", "substitution")),
    ("boltzmann", "check", ("check",)),
    ("boltzmann-Iprime", "determine", ("determine",)),
    ("boltzmann-Iprime", "check", ("check",)),
    ("maxwell", "determine", ("determine",)),
    ("maxwell", "check", ("check",)),
    ("poisson", "contact", ("contact",)),
    ("poisson", "determine", ("determine",)),
    ("poisson", "check", ("check",)),
    ("poisson-Iprime", "determine", ("determine",)),
    ("poisson-Iprime", "check", ("check", "--format", "json")),
    ("ode-second-order", "determine", ("determine",)),
    ("ode-second-order", "determine-substitution", ("determine", "--strategy", "substitution")),
    ("edelen", "contact", ("contact",)),
    ("edelen", "determine", ("determine",)),
]

PROBLEMS = sorted(p.stem for p in HERE.glob("*.eds"))
PIPELINES += [(name, "info", ("info",)) for name in PROBLEMS]


def path(name: str) -> Path:
    return HERE / f"{name}.eds"


def golden_path(name: str, suffix: str) -> Path:
    ext = {"determine-latex": "tex", "determine-json": "json"}.get(suffix, "txt")
    if suffix == "check" and name == "poisson-Iprime":
        ext = "json"
    return GOLDEN / f"{name}.{suffix}.{ext}"


def run_pipeline(name: str, args: tuple[str, ...]) -> tuple[str, int]:
    from ..cli import run

    out, err, code = run([args[0], str(path(name)), *args[1:]])
    return out + err, code


def regenerate() -> list[Path]:
    GOLDEN.mkdir(exist_ok=True)
    written = []
    for name, suffix, args in PIPELINES:
        out, code = run_pipeline(name, args)
        target = golden_path(name, suffix)
        target.write_text(out, encoding="utf-8")
        written.append(target)
    return written

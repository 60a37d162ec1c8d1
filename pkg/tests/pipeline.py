"""Runs the full CLI pipeline over a copy of the pipeline fixtures."""

from __future__ import annotations

import contextlib
import io
import shutil
from pathlib import Path

from rsphunt.cli import cli_main

REPORT_KINDS = ("categories", "languages", "contacts", "top-abused", "popularity", "redirects", "clusters")
WEBSITES = ("cloaked-shell.test", "benign-shell.test", "vantage-split.test", "content-split.test", "stable-site.test")
HANDLES = ("usdt_otc_desk", "bet_club_group", "ts775")


def copy_fixtures(fixtures: Path, dest: Path) -> Path:
    """Copy what the pipeline config references; returns the config path."""
    dest.mkdir(parents=True, exist_ok=True)
    shutil.copytree(fixtures / "pipeline", dest / "pipeline")
    shutil.copytree(fixtures / "telegram", dest / "telegram")
    shutil.copy(fixtures / "cloaking_vantage.json", dest / "cloaking_vantage.json")
    return dest / "pipeline" / "config.toml"


def run(argv: list[str]) -> tuple[int, str]:
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = cli_main(argv)
    return code, out.getvalue()


def run_pipeline(fixtures: Path, dest: Path, models: Path) -> dict[str, str]:
    """Every stage in order; returns ``{name: output}`` for stdout of each stage and each report."""
    config = copy_fixtures(fixtures, dest)
    work = config.parent
    (work / "websites.txt").write_text("\n".join(WEBSITES) + "\n", encoding="utf-8")
    (work / "handles.txt").write_text("\n".join(HANDLES) + "\n", encoding="utf-8")
    common = ["--config", str(config), "--models", str(models)]
    stages = {
        "hunt": ["hunt", *common, "--seeds-keywords", str(work / "seeds_keywords.txt"),
                 "--seeds-urs", str(work / "seeds_urs.txt"), "--state", str(work / "state.json")],
        "classify": ["classify", *common],
        "extract-contacts": ["extract-contacts", *common],
        "infiltrate": ["infiltrate", *common, "--websites", str(work / "websites.txt"), "--cloaking"],
        "tg-fetch": ["tg-fetch", *common, "--handles", str(work / "handles.txt")],
    }
    outputs = {}
    for name, argv in stages.items():
        code, out = run(argv)
        if code != 0:
            raise RuntimeError(f"stage {name} exited with {code}")
        outputs[name] = out
    for kind in REPORT_KINDS:
        target = work / f"report-{kind}.txt"
        argv = ["report", *common, "--kind", kind, "--output", str(target)]
        if kind == "popularity":
            argv += ["--ranking", str(work / "ranking.txt")]
        code, _ = run(argv)
        if code != 0:
            raise RuntimeError(f"report {kind} exited with {code}")
        outputs[f"report-{kind}"] = target.read_text(encoding="utf-8")
    return outputs


def store_files(dest: Path) -> dict[str, bytes]:
    root = dest / "pipeline" / "store"
    return {p.name: p.read_bytes() for p in sorted(root.glob("*.jsonl"))}

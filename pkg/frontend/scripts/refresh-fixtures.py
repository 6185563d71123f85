"""Regenerate test fixtures: one bundle produced by the experiment suite
runner, exactly as the CLI writes it.  Run from frontend/."""

from pathlib import Path
import shutil

from markovlab.fpkstudy import ExperimentSuite, run_suite

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "bundle"

if OUT.exists():
    shutil.rmtree(OUT)
run_suite(ExperimentSuite(
    name="plots-fixture",
    out_dir=str(OUT),
    master_seed=7,
    experiments=(
        ("dichotomy_study", {}),
        ("mehler_fourier", {"n_mc": 20_000}),
        ("mehler_truncation", {}),
        ("hjb_hopf_cole", {}),
    ),
))
print("wrote", sorted(p.name for p in OUT.iterdir()))

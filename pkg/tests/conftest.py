import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


# (criterion, ok, detail) triples recorded by test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    groups = {}
    for crit, ok, detail in ACCEPTANCE_RESULTS:
        groups.setdefault(str(crit), []).append((ok, detail))
    for crit in sorted(groups, key=int):
        parts = groups[crit]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {verdict}  " + "; ".join(d for _, d in parts))


@pytest.fixture(scope="session")
def cor3_sweep():
    """Reports of the shipped Cor.3 codec fixture, one per blocklength."""
    import json
    import os

    from skregion.cli import load_sim_config, simulate

    path = FIXTURES / "sim_cor3.json"
    cfg = load_sim_config(path)
    assert cfg == {**json.loads(path.read_text())}
    reports = simulate(cfg, FIXTURES, cfg["seed"], threads=os.cpu_count() or 1)
    return {r.n: r for r in reports}

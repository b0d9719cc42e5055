"""The acceptance gate: one test per criterion, each printing its verdict."""

import pytest

from slopelab.acceptance import CRITERIA, run_one

IDS = [cid for cid, _, _ in CRITERIA]
TITLES = {cid: title for cid, title, _ in CRITERIA}


@pytest.mark.parametrize("crit_id", IDS)
def test_criterion(crit_id):
    record = run_one(crit_id)
    status = "PASS" if record["passed"] else "FAIL"
    print(f"[{status}] criterion {crit_id:2d}: {TITLES[crit_id]} ({record['runtime_s']:.1f}s)")
    for check in record["checks"]:
        if not check["ok"]:
            print(f"    failed: {check}")
    assert record["passed"], f"criterion {crit_id} ({TITLES[crit_id]}) failed: " + "; ".join(
        str(c) for c in record["checks"] if not c["ok"]
    )


def test_report_is_deterministic():
    a = run_one(1)
    b = run_one(1)
    a.pop("runtime_s")
    b.pop("runtime_s")
    assert a == b

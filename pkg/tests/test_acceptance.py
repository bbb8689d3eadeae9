"""One line per acceptance criterion; the summary is printed at the end."""

import pytest

from toric_transit import paper_data
from toric_transit.checks import run_check

from conftest import ACCEPTANCE_LINES

CHECKS = paper_data.list_checks()


@pytest.mark.parametrize("check_id,title", [(c[0], c[1]) for c in CHECKS],
                         ids=[c[0] for c in CHECKS])
def test_acceptance(ctx, check_id, title):
    report = run_check(check_id, ctx)
    line = f"{check_id:<4} {'PASS' if report.status == 'pass' else 'FAIL':<5} {title}"
    if report.status != "pass":
        line += f"  [{report.message}]"
    ACCEPTANCE_LINES[check_id] = line
    print(line)
    assert report.status == "pass", report.message or report.witness

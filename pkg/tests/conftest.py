"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary.

Acceptance tests are named ``test_ac<k>_...``; a criterion passes only when
every test carrying its number passes. Tests attach a one-line summary with
``record_property("detail", ...)``.
"""

import re

_acceptance: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"::test_ac(\d+)_", report.nodeid)
    if not m or not (report.when == "call" or report.failed):
        return
    entry = _acceptance.setdefault(int(m.group(1)), {"ok": True, "details": []})
    entry["ok"] &= report.passed
    detail = dict(report.user_properties).get("detail")
    if detail:
        entry["details"].append(detail)
    elif report.failed:
        entry["details"].append(f"{report.nodeid.split('::')[-1]} failed")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_acceptance):
        entry = _acceptance[k]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"AC-{k} {status}: " + "; ".join(entry["details"]))

"""Shared pytest wiring.

Tests in test_acceptance.py carry a ``criterion(n)`` marker; after the run a
one-line PASS/FAIL verdict is printed per acceptance criterion.  Clauses
marked xfail(strict=True) are documented defects of the stated criterion:
they keep the suite green but the criterion line still reports FAIL,
honestly, naming the clause.
"""

import collections

import pytest

# criterion number -> list of (clause, outcome) with outcome in
# {"passed", "failed", "xfailed"}
_results: dict[int, list] = collections.defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    clause = marker.kwargs.get("clause", "")
    if report.passed:
        verdict = "passed"
    elif report.skipped and hasattr(report, "wasxfail"):
        verdict = "xfailed"
    else:
        verdict = "failed"
    _results[number].append((clause, verdict))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        entries = _results[number]
        hard_failures = sorted({c or "(unnamed)" for c, v in entries
                                if v == "failed"})
        defect_failures = sorted({c or "(unnamed)" for c, v in entries
                                  if v == "xfailed"})
        if hard_failures or defect_failures:
            details = []
            if hard_failures:
                details.append(f"failing clauses: {', '.join(hard_failures)}")
            if defect_failures:
                details.append(
                    "clauses failing as stated due to documented source-text "
                    f"defects: {', '.join(defect_failures)}"
                )
            tr.write_line(f"CRITERION {number}: FAIL  ({'; '.join(details)})")
        else:
            tr.write_line(f"CRITERION {number}: PASS")

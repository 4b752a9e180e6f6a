import re

_CRITERION = re.compile(r"test_criterion_(\d+)([a-z]?)")


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    m = _CRITERION.search(name)
    if not m:
        return
    label = m.group(1).lstrip("0") + m.group(2)
    status = "PASS" if report.passed else "FAIL"
    print(f"\nacceptance criterion {label}: {status}  [{name}]")

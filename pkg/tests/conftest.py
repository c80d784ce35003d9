import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def rigid(points, degrees, tx, ty):
    """Rotate about the origin, then translate."""
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    arr = np.asarray(points, dtype=float)
    return np.column_stack([c * arr[:, 0] - s * arr[:, 1] + tx, s * arr[:, 0] + c * arr[:, 1] + ty])


@pytest.fixture
def unit_square():
    from footreg.geometry import Ring

    return Ring([(0, 0), (1, 0), (1, 1), (0, 1)])


# -- acceptance summary -------------------------------------------------------
# Tests in test_acceptance.py are named test_criterion_<n>_...; each outcome is
# collected here and printed as one PASS/FAIL line per criterion at the end.

_criteria: dict[int, list[tuple[str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if not item.name.startswith("test_criterion_"):
        return
    number = int(item.name.split("_")[2])
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        if report.outcome == "passed":
            _criteria.setdefault(number, []).append(("PASS", detail))
        else:
            crash = getattr(report.longrepr, "reprcrash", None)
            reason = crash.message.splitlines()[0] if crash is not None and crash.message else ""
            _criteria.setdefault(number, []).append(("FAIL", "; ".join(part for part in (detail, reason) if part)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        runs = _criteria[number]
        verdict = "FAIL" if any(v == "FAIL" for v, _ in runs) else "PASS"
        details = "; ".join(d for _, d in runs if d)
        terminalreporter.write_line(f"criterion {number}: {verdict}" + (f" ({details})" if details else ""))

import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# Acceptance criteria: number -> list of (label, passed, detail); printed after the run.
ACCEPTANCE: dict = {}

CRITERIA = {
    1: "table reproduction",
    2: "near-origin asymptotics",
    3: "bound for the Sigma class",
    4: "constant cross-checks",
    5: "exact identities",
    6: "oracle inequalities",
    7: "certificate soundness",
    8: "three-term mode",
}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        items = ACCEPTANCE.get(n)
        if not items:
            terminalreporter.write_line(f"criterion {n} ({title}): NOT RUN")
            continue
        ok = all(passed for _, passed, _ in items)
        terminalreporter.write_line(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}")
        for label, passed, detail in items:
            mark = "ok  " if passed else "FAIL"
            terminalreporter.write_line(f"    {mark} {label}: {detail}")

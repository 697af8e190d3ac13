from __future__ import annotations

from hypothesis import settings

# Seeded, reproducible property runs.
settings.register_profile("lpcre", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("lpcre")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=int):
        entries = RESULTS[key]
        ok = all(flag for flag, _ in entries)
        terminalreporter.write_line(f"CRITERION {key}: {'PASS' if ok else 'FAIL'}")
        for flag, detail in entries:
            if not flag:
                terminalreporter.write_line(f"    failed: {detail}")

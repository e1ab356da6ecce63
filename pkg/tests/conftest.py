def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    checks = [RESULTS[k] for k in sorted(k for k in RESULTS if isinstance(k, int))]
    if not checks:
        return
    terminalreporter.section("acceptance criteria")
    for r in checks:
        terminalreporter.write_line(r.line())
    passed = sum(r.passed for r in checks)
    terminalreporter.write_line(f"{passed}/{len(checks)} criteria pass "
                                f"({RESULTS['_seconds']:.1f}s)")

import pytest


@pytest.fixture
def report(capsys):
    """Print one visible PASS/FAIL line, then assert."""

    def emit(label: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return emit

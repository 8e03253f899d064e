import contextlib

import pytest

# criterion id -> (status, title, detail); filled by the ``criterion`` fixture
_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion as PASS, FAIL or SKIP.

    The yielded dict collects the numbers worth printing next to the verdict.
    """
    @contextlib.contextmanager
    def record(key: str, title: str):
        info: dict = {}
        try:
            yield info
        except pytest.skip.Exception as exc:
            _ACCEPTANCE[key] = ("SKIP", title, str(exc))
            raise
        except BaseException as exc:
            msg = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            _ACCEPTANCE[key] = ("FAIL", title, _fmt(info) + ("; " if info else "") + msg)
            raise
        else:
            _ACCEPTANCE[key] = ("PASS", title, _fmt(info))
    return record


def _fmt(info: dict) -> str:
    parts = []
    for k, v in info.items():
        parts.append(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}")
    return ", ".join(parts)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k[1:].rstrip("ab")), k)):
        status, title, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{key:<4} {status:<4}  {title}" + (f"  [{detail}]" if detail else ""))

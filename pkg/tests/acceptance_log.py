"""Verdicts of the acceptance criteria, printed in the terminal summary."""

RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = (ok, detail)

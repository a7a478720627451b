"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

RESULTS = {}


def record(number, name, ok, detail, seconds=None, limit=None):
    timing = ""
    if seconds is not None:
        timing = f" [{seconds:.1f} s" + (f" / limit {limit:g} s" if limit else "") + "]"
        if limit is not None:
            ok = ok and seconds < limit
    RESULTS[number] = (bool(ok), f"{name}: {detail}{timing}")
    return bool(ok)

"""Runtime support for models exported by `statmodel export`.

Metric dicts map category name -> non-negative integer count; a missing key
means zero.
"""


def handle_function_call(caller, callee, iterations):
    """Return a new dict: caller[k] + iterations * callee[k] for every key."""
    if iterations < 0:
        raise ValueError("iterations must be non-negative, got %d" % iterations)
    out = dict(caller)
    if iterations == 0:
        return out
    for key, count in callee.items():
        out[key] = out.get(key, 0) + iterations * count
    return out

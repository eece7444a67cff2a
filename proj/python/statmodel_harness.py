"""Checks an exported Python model against `statmodel eval --json`.

    python3 statmodel_harness.py --cli build/statmodel --model m.json \
        --emitted m.py --random 20 --seed 7
"""

import argparse
import importlib.util
import inspect
import json
import random
import subprocess
import sys
import traceback


class HarnessError(Exception):
    pass


def load_emitted(path):
    spec = importlib.util.spec_from_file_location("emitted_model", path)
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as exc:  # surfaced verbatim
        raise HarnessError("import of %s failed: %s" % (path, "".join(
            traceback.format_exception_only(type(exc), exc)).strip()))
    return module


def cli_eval(cli, model, root, binding):
    cmd = [cli, "eval", model, "--json", "--function", root]
    for k, v in sorted(binding.items()):
        cmd += ["-p", "%s=%d" % (k, v)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        return None, proc.stderr.strip()
    return json.loads(proc.stdout), None


def py_eval(module, root, binding):
    fn = getattr(module, root, None)
    if fn is None:
        raise HarnessError("emitted module has no function %s" % root)
    params = list(inspect.signature(fn).parameters)
    missing = [p for p in params if p not in binding]
    if missing:
        noun = "parameters" if len(missing) > 1 else "parameter"
        return None, "UnboundParameter: missing %s: %s" % (noun, ", ".join(missing))
    return fn(**{p: binding[p] for p in params}), None


def normalize(counts):
    return {k: int(v) for k, v in counts.items() if int(v) != 0}


def compare(cli, model_path, emitted_path, bindings, root=None):
    """Returns (ok, lines). Stops at the first mismatch."""
    with open(model_path) as f:
        model = json.load(f)
    root = root or model.get("entry")
    if not root:
        return False, ["model has no entry; pass --root"]
    try:
        module = load_emitted(emitted_path)
    except HarnessError as exc:
        return False, [str(exc)]

    lines = []
    for binding in bindings:
        native, native_err = cli_eval(cli, model_path, root, binding)
        try:
            emitted, emitted_err = py_eval(module, root, binding)
        except Exception as exc:
            return False, lines + ["%s: emitted model raised %s: %s" % (binding, type(exc).__name__, exc)]
        if native_err or emitted_err:
            both_unbound = (native_err and "error[UnboundParameter]" in native_err
                            and emitted_err and emitted_err.startswith("UnboundParameter"))
            if both_unbound:
                lines.append("%s: UnboundParameter in both" % binding)
                continue
            return False, lines + ["%s: native=%r emitted=%r" % (binding, native_err, emitted_err)]
        a = normalize(native["per_category"])
        b = normalize(emitted)
        if a != b:
            keys = sorted(set(a) | set(b))
            diff = ["%s native=%d emitted=%d" % (k, a.get(k, 0), b.get(k, 0))
                    for k in keys if a.get(k, 0) != b.get(k, 0)]
            return False, lines + ["%s: mismatch: %s" % (binding, "; ".join(diff))]
        lines.append("%s: equal" % binding)
    return True, lines


def random_bindings(names, count, seed, low=-5, high=5000):
    rng = random.Random(seed)
    return [{n: rng.randint(low, high) for n in names} for _ in range(count)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cli", required=True)
    ap.add_argument("--model", required=True)
    ap.add_argument("--emitted", required=True)
    ap.add_argument("--root")
    ap.add_argument("--random", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-p", "--param", action="append", default=[],
                    help="fixed binding key=value; disables random bindings")
    args = ap.parse_args(argv)

    with open(args.model) as f:
        names = [p["name"] for p in json.load(f)["params"]]
    if args.param:
        bindings = [dict((k, int(v)) for k, v in (p.split("=", 1) for p in args.param))]
    else:
        bindings = random_bindings(names, args.random, args.seed)
    ok, lines = compare(args.cli, args.model, args.emitted, bindings, args.root)
    for line in lines:
        print(line)
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

"""Runtime shim and emitted-model equivalence checks."""

import argparse
import json
import os
import subprocess
import sys
import unittest

from statmodel_runtime import handle_function_call
import statmodel_harness as harness

ARGS = None


def run(*cmd):
    return subprocess.run(list(cmd), capture_output=True, text=True)


class ShimTest(unittest.TestCase):
    def test_scales_callee(self):
        self.assertEqual(handle_function_call({"fp": 2}, {"fp": 3}, 4), {"fp": 14})

    def test_zero_iterations(self):
        out = handle_function_call({}, {"m": 5}, 0)
        self.assertEqual({k: v for k, v in out.items() if v}, {})

    def test_disjoint_keys(self):
        self.assertEqual(handle_function_call({"a": 1}, {"b": 2}, 3), {"a": 1, "b": 6})

    def test_negative_iterations(self):
        with self.assertRaises(ValueError):
            handle_function_call({}, {"a": 1}, -1)

    def test_does_not_mutate_caller(self):
        caller = {"a": 1}
        handle_function_call(caller, {"a": 2}, 2)
        self.assertEqual(caller, {"a": 1})

    def test_fold_order_irrelevant(self):
        callees = [({"a": 1, "b": 2}, 3), ({"b": 5}, 2), ({"c": 7, "a": 1}, 4)]
        acc1 = {}
        for c, n in callees:
            acc1 = handle_function_call(acc1, c, n)
        acc2 = {}
        for c, n in reversed(callees):
            acc2 = handle_function_call(acc2, c, n)
        self.assertEqual(acc1, acc2)


class EquivalenceTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        os.makedirs(ARGS.workdir, exist_ok=True)
        f = ARGS.fixtures
        cls.models = {}
        for name, src, elf, dis in [("fig6", "fig6.cpp", "fig6.elf", "fig6.dis"),
                                    ("triad", "triad.c", "tiny.elf", "tiny.dis")]:
            model = os.path.join(ARGS.workdir, name + ".json")
            emitted = os.path.join(ARGS.workdir, name + ".py")
            r = run(ARGS.cli, "analyze", "--source", os.path.join(f, src), "--elf", os.path.join(f, elf),
                    "--disasm", os.path.join(f, dis), "--arch", ARGS.arch, "--reproducible", "-o", model)
            assert r.returncode == 0, r.stderr
            r = run(ARGS.cli, "export", model, "-o", emitted)
            assert r.returncode == 0, r.stderr
            cls.models[name] = (model, emitted)

    def check_random(self, name, seed):
        model, emitted = self.models[name]
        with open(model) as fh:
            names = [p["name"] for p in json.load(fh)["params"]]
        self.assertTrue(names)
        ok, lines = harness.compare(ARGS.cli, model, emitted, harness.random_bindings(names, 20, seed))
        self.assertTrue(ok, "\n".join(lines))
        self.assertEqual(len(lines), 20)

    def test_fig6_twenty_random_bindings(self):
        self.check_random("fig6", 1)

    def test_triad_twenty_random_bindings(self):
        self.check_random("triad", 2)

    def test_emitted_signatures(self):
        with open(self.models["fig6"][1]) as fh:
            text = fh.read()
        self.assertIn("from statmodel_runtime import handle_function_call\n", text)
        self.assertIn("def A_foo_2(y):", text)
        self.assertIn("def main_0(y_16):", text)

    def test_corrupted_module_reports_import_error(self):
        bad = os.path.join(ARGS.workdir, "corrupt.py")
        with open(self.models["fig6"][1]) as src, open(bad, "w") as dst:
            dst.write(src.read().replace("def main_0(y_16):", "def main_0(y_16)"))
        ok, lines = harness.compare(ARGS.cli, self.models["fig6"][0], bad, [{"y_16": 3}])
        self.assertFalse(ok)
        self.assertIn("SyntaxError", lines[0])

    def test_missing_parameter_parity(self):
        model, emitted = self.models["triad"]
        ok, lines = harness.compare(ARGS.cli, model, emitted, [{}])
        self.assertTrue(ok, "\n".join(lines))
        self.assertIn("UnboundParameter in both", lines[0])
        r = run(ARGS.cli, "eval", model)
        self.assertEqual(r.returncode, 65)
        self.assertIn("error[UnboundParameter]: missing parameter: N", r.stderr)

    def test_empty_model_is_header_only(self):
        model = os.path.join(ARGS.workdir, "empty.json")
        with open(model, "w") as fh:
            json.dump({"schema_version": 1, "arch_ref": "", "params": [], "functions": {},
                       "entry": None, "meta": {}}, fh)
        r = run(ARGS.cli, "export", model)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue(all(line.startswith("#") for line in r.stdout.splitlines() if line))
        compile(r.stdout, "empty.py", "exec")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--fixtures", required=True)
    ap.add_argument("--arch", required=True)
    ap.add_argument("--workdir", required=True)
    ARGS, rest = ap.parse_known_args()
    unittest.main(argv=[sys.argv[0]] + rest, verbosity=2)

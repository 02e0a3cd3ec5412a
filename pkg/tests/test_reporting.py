import hashlib
import json
import math
import tempfile
import unittest
from pathlib import Path
import sys

import numpy as np

repo_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(repo_root / "scripts"))

import reporting
from reporting import RunManifest, compute_digest, format_number, to_json, write_csv, write_json, write_trace_svg


class JsonTests(unittest.TestCase):
    def test_floats_round_trip_exactly(self):
        values = [0.1, 1 / 3, math.pi, 2.0 ** -40, 0.14644660940672627]
        self.assertEqual(json.loads(to_json({"v": values}))["v"], values)

    def test_numpy_and_non_finite_values(self):
        payload = json.loads(to_json({
            "array": np.array([1.5, 2.5]),
            "int": np.int64(3),
            "flag": np.bool_(True),
            "nan": float("nan"),
            "inf": np.inf,
        }))
        self.assertEqual(payload, {"array": [1.5, 2.5], "flag": True, "inf": None, "int": 3, "nan": None})

    def test_keys_are_sorted(self):
        text = to_json({"b": 1, "a": 2})
        self.assertLess(text.index('"a"'), text.index('"b"'))

    def test_write_is_atomic_and_leaves_no_temp_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "nested" / "report.json"
            write_json(path, {"x": 1})
            self.assertEqual(json.loads(path.read_text()), {"x": 1})
            self.assertEqual([p.name for p in path.parent.iterdir()], ["report.json"])


class CsvTests(unittest.TestCase):
    def test_seventeen_significant_digits(self):
        self.assertEqual(format_number(0.1), "0.10000000000000001")
        self.assertEqual(float(format_number(math.pi)), math.pi)

    def test_rows(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write_csv(Path(tmpdir) / "census.csv", ["pattern", "count", "fraction"],
                             [("UUU", 3, 0.25), ("YUU", 9, 0.75)])
            lines = path.read_text().splitlines()
            self.assertEqual(lines[0], "pattern,count,fraction")
            self.assertEqual(lines[1], "UUU,3,0.25")


class ManifestTests(unittest.TestCase):
    def test_digest_is_recomputable(self):
        data = b"1: sentence 1 is false\n"
        manifest = RunManifest.for_input("liar", data, seed=None)
        self.assertEqual(manifest.input_digest, hashlib.blake2b(data, digest_size=8).hexdigest())
        self.assertEqual(len(manifest.input_digest), 16)
        self.assertEqual(compute_digest(data), manifest.input_digest)

    def test_manifest_fields(self):
        payload = RunManifest.for_input("poll", b"{}", seed=7).to_dict()
        self.assertEqual(payload["subcommand"], "poll")
        self.assertEqual(payload["seed"], 7)
        self.assertEqual(payload["tool_version"], reporting.TOOL_VERSION)
        self.assertTrue(payload["timestamp"].endswith("+00:00"))


class SvgTests(unittest.TestCase):
    def test_plot_is_byte_identical(self):
        times = np.linspace(0.0, math.pi, 50)
        series = {"1:true": np.cos(times) ** 2, "1:false": np.sin(times) ** 2}
        with tempfile.TemporaryDirectory() as tmpdir:
            first = write_trace_svg(Path(tmpdir) / "a.svg", times, series, title="classic")
            second = write_trace_svg(Path(tmpdir) / "b.svg", times, series, title="classic")
            self.assertEqual(first.read_bytes(), second.read_bytes())
            self.assertIn(b"<svg", first.read_bytes())


if __name__ == "__main__":
    unittest.main()

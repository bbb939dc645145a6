import json
import tempfile
import tomllib
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from deniakit.channel import dump_channel

from .test_channel import swapped_channel


def run(*args):
    out = StringIO()
    call_command("deniakit", *[str(a) for a in args], stdout=out, no_color=True)
    return out.getvalue()


class ChannelCommandTests(SimpleTestCase):
    def test_validate(self):
        output = run("channel", "validate", "example1")
        self.assertIn("ok: |X|=2 |Y|=2 |Z|=3", output)

    def test_marginals(self):
        output = run("channel", "marginals", "--bec", 0.3)
        self.assertIn("Judy P(z|x)", output)
        self.assertIn("0: 0.7 0.3 0", output)

    def test_degraded(self):
        self.assertIn("degraded: yes", run("channel", "degraded", "example2"))

    def test_malformed_file_is_a_usage_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.json"
            path.write_text('{"x": ["0"],\n "y": [}')
            with self.assertRaises(CommandError) as ctx:
                run("channel", "validate", path)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("line 2", str(ctx.exception))

    def test_duplicate_symbol_names_are_a_usage_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "dup.json"
            path.write_text(json.dumps({"x": ["0", "0"], "y": ["0"], "z": ["0"], "p": [[[1.0]], [[1.0]]]}))
            with self.assertRaises(CommandError) as ctx:
                run("channel", "validate", path)
        self.assertEqual(ctx.exception.returncode, 2)


class ZeroInfoCommandTests(SimpleTestCase):
    def test_transmitter_classes(self):
        self.assertEqual(run("zeroinfo", "example2").strip(), "{1,2} {3}")

    def test_receiver_classes(self):
        self.assertEqual(run("zeroinfo", "example2", "--side", "rx").strip(), "{1,2} {3}")

    def test_receiver_side_needs_a_degraded_channel(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "swapped.json"
            path.write_text(dump_channel(swapped_channel()))
            with self.assertRaises(CommandError) as ctx:
                run("zeroinfo", path, "--side", "rx")
        self.assertEqual(ctx.exception.returncode, 1)

    def test_json_output(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "classes.json"
            output = run("zeroinfo", "example2", "--out", out)
            payload = json.loads(out.read_text())
            self.assertTrue(Path(f"{out}.manifest.toml").exists())
        self.assertEqual(payload["classes"], [["1", "2"], ["3"]])
        self.assertIn("Manifest saved", output)


class RegionCommandTests(SimpleTestCase):
    def test_equivocation_plateau(self):
        lines = run("region", "eq", "--bec", 0.5, "--grid", 6).splitlines()
        self.assertEqual(lines[0], "D,R,kind,channel_digest")
        rates = [float(line.split(",")[1]) for line in lines[1:]]
        self.assertEqual(rates, [1.0] * 6)

    def test_closed_form_regions_need_the_erasure_example(self):
        with self.assertRaises(CommandError) as ctx:
            run("region", "bcc", "example1")
        self.assertEqual(ctx.exception.returncode, 2)

    def test_transmitter_region(self):
        lines = run("region", "tx", "example2", "--grid", 3).splitlines()
        self.assertEqual(len(lines), 4)
        last = lines[-1].split(",")
        self.assertAlmostEqual(float(last[0]), 1.0, delta=1e-3)
        self.assertAlmostEqual(float(last[1]), 1.0, delta=1e-3)

    def test_inclusion_check(self):
        run("region", "message", "--bec", 0.5, "--grid", 3, "--check-inclusion")
        with self.assertRaises(CommandError) as ctx:
            run("region", "tx", "--bec", 0.5, "--grid", 3, "--check-inclusion")
        self.assertEqual(ctx.exception.returncode, 2)


class SimulateCommandTests(SimpleTestCase):
    def test_transmitter_report(self):
        report = json.loads(
            run(
                "simulate", "transmitter", "example2", "--n", 3, "--rate", 1,
                "--deniability", "0.6666666667", "--cloud-law", "1,0", "--distinct", "--seed", 7,
            )
        )
        self.assertEqual(report["procedure"], "clique")
        self.assertEqual(report["messages"], 8)
        self.assertLessEqual(report["kl_plausibility"], 1e-12)
        self.assertAlmostEqual(report["h_m_given_fake_z"], 2.0, places=6)

    def test_receiver_report(self):
        report = json.loads(run("simulate", "receiver", "example2", "--n", 2, "--trials", 500))
        self.assertEqual(report["procedure"], "zero-info")
        self.assertEqual(report["monte_carlo"]["trials"], 500)
        self.assertLessEqual(report["kl_plausibility"], 1e-12)

    def test_message_report(self):
        report = json.loads(run("simulate", "message", "--bec", 0.5, "--n", 2))
        self.assertEqual(report["messages"], 4)
        self.assertEqual(report["procedure"], "uniform-s")

    def test_wrong_procedure(self):
        with self.assertRaises(CommandError) as ctx:
            run("simulate", "message", "--bec", 0.5, "--fake", "clique")
        self.assertEqual(ctx.exception.returncode, 2)


class RerunCommandTests(SimpleTestCase):
    def test_region_rerun_is_byte_identical(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "eq.csv"
            run("region", "eq", "--bec", 0.5, "--out", out)
            first = out.read_bytes()
            output = run("rerun", f"{out}.manifest.toml")
            self.assertEqual(out.read_bytes(), first)
        self.assertIn("Reproduced byte-identical outputs", output)

    def test_simulation_rerun_elsewhere(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "tx.json"
            run(
                "simulate", "transmitter", "example2", "--n", 3, "--rate", 1,
                "--deniability", "0.6666666667", "--cloud-law", "1,0", "--distinct", "--seed", 7,
                "--out", out,
            )
            manifest = tomllib.loads(Path(f"{out}.manifest.toml").read_text())
            self.assertEqual(manifest["options"]["fake"], "clique")
            self.assertEqual(manifest["options"]["cloud_law"], [1.0, 0.0])
            self.assertIn("codebook", manifest["output_digests"])

            again = Path(tmp) / "again.json"
            run("rerun", f"{out}.manifest.toml", "--out", again)
            self.assertEqual(again.read_bytes(), out.read_bytes())
            self.assertEqual(
                Path(f"{again}.codebook.json").read_bytes(), Path(f"{out}.codebook.json").read_bytes()
            )

    def test_tampered_output_is_reported(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "eq.csv"
            run("region", "eq", "--bec", 0.5, "--out", out)
            manifest = Path(f"{out}.manifest.toml")
            text = manifest.read_text()
            manifest.write_text(text.replace("grid = 11", "grid = 5"))
            with self.assertRaises(CommandError) as ctx:
                run("rerun", manifest)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_manifest(self):
        with self.assertRaises(CommandError) as ctx:
            run("rerun", "/nonexistent/run.manifest.toml")
        self.assertEqual(ctx.exception.returncode, 2)

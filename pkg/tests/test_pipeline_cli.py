"""File formats, pipeline runs, the stability experiment and the CLI."""

import json
import subprocess
import sys

import numpy as np
import pytest

import persign
from persign import io as pio
from persign import pipeline as pl
from persign.measures import SignedMeasure
from persign.simplicial import AttributedGraph, build_rips


def run_cli(args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "persign.cli"] + [str(a) for a in args],
        capture_output=True, text=True, cwd=cwd)


def small_cloud(path, seed=0, n=12):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 2))
    pio.atomic_write_text(path, "\n".join(
        f"{float(x)!r},{float(y)!r}" for x, y in pts) + "\n")
    return pts


def cycle_edge_file(path, n=6):
    lines = [f"{i} {(i + 1) % n}" for i in range(n)]
    pio.atomic_write_text(path, "\n".join(lines) + "\n")


class TestPointCloudIO:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "cloud.csv"
        pts = small_cloud(path, seed=5)
        cloud = pio.read_point_cloud(path)
        assert np.array_equal(cloud.points, pts)

    def test_clouds_are_comma_separated_only(self, tmp_path):
        path = tmp_path / "cloud.txt"
        path.write_text("0 1\n2 3\n")
        with pytest.raises(pio.InputError, match="not a number"):
            pio.read_point_cloud(path)

    def test_bad_number_names_file_and_line(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0,1\n2,zebra\n")
        with pytest.raises(pio.InputError) as err:
            pio.read_point_cloud(path)
        assert str(path) in str(err.value)
        assert ":2:" in str(err.value)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0,1\n2,3,4\n")
        with pytest.raises(pio.InputError) as err:
            pio.read_point_cloud(path)
        assert err.value.line == 2

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("\n\n")
        with pytest.raises(pio.InputError, match="no points"):
            pio.read_point_cloud(path)


class TestGraphIO:
    def test_whitespace_and_comma_edges_agree(self, tmp_path):
        ws = tmp_path / "edges.txt"
        ws.write_text("0 1\n1 2\n")
        cs = tmp_path / "edges.csv"
        cs.write_text("0,1\n1,2\n")
        g1 = pio.read_graph(ws)
        g2 = pio.read_graph(cs)
        assert g1.edges == g2.edges == ((0, 1), (1, 2))

    def test_numeric_labels_sort_numerically(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("10 2\n2 1\n")
        g = pio.read_graph(path)
        # labels 1, 2, 10 in numeric order, so the edge 10-2 maps to (1, 2)
        assert g.edges == ((0, 1), (1, 2))

    def test_string_labels_sort_lexicographically(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("b c\na b\n")
        g = pio.read_graph(path)
        assert g.edges == ((0, 1), (1, 2))

    def test_self_loop_reports_line(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n2 2\n")
        with pytest.raises(pio.InputError, match="self loop") as err:
            pio.read_graph(path)
        assert err.value.line == 2

    def test_duplicate_edge_rejected(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n1 0\n")
        with pytest.raises(pio.InputError, match="duplicate edge"):
            pio.read_graph(path)

    def test_attribute_table(self, tmp_path):
        edges = tmp_path / "edges.txt"
        edges.write_text("0 1\n1 2\n")
        attrs = tmp_path / "attrs.csv"
        attrs.write_text("vertex,height,mass\n2,0.5,3\n0,1.5,1\n1,2.5,2\n")
        g = pio.read_graph(edges, attrs)
        assert set(g.vertex_attributes) == {"height", "mass"}
        assert np.array_equal(g.vertex_attributes["height"], [1.5, 2.5, 0.5])
        assert np.array_equal(g.vertex_attributes["mass"], [1.0, 2.0, 3.0])

    def test_attribute_only_vertices_become_isolated(self, tmp_path):
        edges = tmp_path / "edges.txt"
        edges.write_text("0 1\n")
        attrs = tmp_path / "attrs.csv"
        attrs.write_text("vertex,height\n0,1.0\n1,2.0\n7,3.0\n")
        g = pio.read_graph(edges, attrs)
        assert g.vertex_count == 3
        assert g.edges == ((0, 1),)
        assert np.array_equal(g.vertex_attributes["height"], [1.0, 2.0, 3.0])

    def test_missing_attribute_row_rejected(self, tmp_path):
        edges = tmp_path / "edges.txt"
        edges.write_text("0 1\n1 2\n")
        attrs = tmp_path / "attrs.csv"
        attrs.write_text("vertex,height\n0,1.0\n1,2.0\n")
        with pytest.raises(pio.InputError):
            pio.read_graph(edges, attrs)


class TestComplexAndMeasureIO:
    def test_complex_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        cloud = persign.PointCloud(rng.normal(size=(8, 2)))
        c = build_rips(cloud, max_edge_length=1.2, max_dim=2)
        path = tmp_path / "complex.json"
        pio.write_complex(c, path)
        back = pio.read_complex(path)
        assert back.simplices == c.simplices
        assert np.array_equal(back.values, c.values)
        assert back.num_parameters == c.num_parameters

    def test_truncated_complex_file(self, tmp_path):
        path = tmp_path / "complex.json"
        path.write_text('{"simplices": [[0]]}')
        with pytest.raises(pio.InputError, match="bad complex file"):
            pio.read_complex(path)

    def test_invalid_json_reports_path(self, tmp_path):
        path = tmp_path / "complex.json"
        path.write_text("{nope")
        with pytest.raises(pio.InputError, match="invalid JSON"):
            pio.read_complex(path)

    def test_measure_round_trip(self, tmp_path):
        mu = SignedMeasure.from_atoms(
            [(0.0, 1.0), (2.5, -1.0)], [2, -3], dim=2)
        path = tmp_path / "mu.json"
        pio.write_measure(mu, path)
        back = pio.read_measure(path)
        assert back.same_atoms(mu)

    def test_dump_json_is_stable(self):
        a = pio.dump_json({"b": 1, "a": [1.5, 2]})
        b = pio.dump_json({"a": [1.5, 2], "b": 1})
        assert a == b

    def test_write_gram_header(self, tmp_path):
        from persign.transport import GramMatrix
        gram = GramMatrix(np.array([[1.0, 0.5], [0.5, 1.0]]),
                          labels=("x", "y"))
        path = tmp_path / "gram.csv"
        pio.write_gram(gram, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",x,y"
        assert lines[1].startswith("x,")
        assert float(lines[1].split(",")[2]) == 0.5

    def test_write_features_one_value_per_line(self, tmp_path):
        from persign.vectorize import FeatureVector
        vec = FeatureVector(np.array([1.0, 0.25, -3.0]), info={})
        path = tmp_path / "f.csv"
        pio.write_features(vec, path)
        assert path.read_text() == "1.0\n0.25\n-3.0\n"


class TestSeeds:
    def test_splitmix64_is_deterministic_and_64_bit(self):
        seen = {pl.splitmix64(s) for s in range(200)}
        assert len(seen) == 200
        assert all(0 <= v < 2 ** 64 for v in seen)
        assert pl.splitmix64(42) == pl.splitmix64(42)

    def test_sample_seed_varies_per_index_not_per_run(self):
        a = [pl.sample_seed(7, i) for i in range(10)]
        b = [pl.sample_seed(7, i) for i in range(10)]
        assert a == b
        assert len(set(a)) == 10
        assert pl.sample_seed(8, 0) != pl.sample_seed(7, 0)


class TestPipelineConfig:
    def test_ini_round_trip_is_lossless(self):
        cfg = pl.PipelineConfig(
            filtration="rips", max_edge_length=2.5, max_dim=3,
            descriptor="dtm", descriptor_mass=0.25,
            degrees=(0, 1, 2), field_p=2, measure="euler",
            resolution=17, beta=0.05, vectorization="sliced-wasserstein",
            bandwidths=(0.3, 0.7), axis_scales=(1.0, 2.0),
            directions=13, sw_scale=0.5, seed=99)
        again = pl.PipelineConfig.from_ini(cfg.to_ini())
        assert again == cfg

    def test_auto_bandwidths_survive_round_trip(self):
        cfg = pl.PipelineConfig()
        assert cfg.bandwidths is None and cfg.axis_scales is None
        again = pl.PipelineConfig.from_ini(cfg.to_ini())
        assert again == cfg

    def test_content_hash_tracks_content(self):
        a = pl.PipelineConfig(seed=1)
        b = pl.PipelineConfig.from_ini(a.to_ini())
        assert a.content_hash() == b.content_hash()
        assert a.content_hash() != pl.PipelineConfig(seed=2).content_hash()

    def test_validate_lists_every_problem(self):
        cfg = pl.PipelineConfig(filtration="nope", resolution=0, beta=0.9)
        with pytest.raises(ValueError) as err:
            cfg.validate()
        msg = str(err.value)
        assert "filtration" in msg
        assert "resolution" in msg
        assert "beta" in msg

    def test_lower_star_requires_attributes(self):
        with pytest.raises(ValueError, match="attribute"):
            pl.PipelineConfig(filtration="lower-star").validate()

    def test_bad_ini_raises_input_error(self):
        with pytest.raises(pio.InputError, match="bad config"):
            pl.PipelineConfig.from_ini("not an ini file [")


def fast_config(**kw):
    base = dict(filtration="function-rips", max_edge_length=2.0, max_dim=2,
                descriptor="kde_codensity", descriptor_bandwidth=0.5,
                degrees=(0, 1), resolution=8, beta=0.01,
                vectorization="convolution", directions=8, seed=11)
    base.update(kw)
    return pl.PipelineConfig(**base)


class TestRunPipeline:
    def test_smoke_outputs_and_manifest(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        small_cloud(a, seed=1)
        small_cloud(b, seed=2)
        out = tmp_path / "run"
        cfg = fast_config()
        manifest = pl.run_pipeline([a, b], cfg, out)
        assert manifest["config_sha256"] == cfg.content_hash()
        assert manifest["master_seed"] == cfg.seed
        assert manifest["failures"] == []
        assert [s["stem"] for s in manifest["samples"]] == ["a", "b"]
        for index, sample in enumerate(manifest["samples"]):
            assert sample["seed"] == pl.sample_seed(cfg.seed, index)
            for name in sample["outputs"]:
                assert (out / name).is_file()
        names = set(manifest["samples"][0]["outputs"])
        assert {"a.features.csv", "a.meta.json",
                "a.measure-h0.json", "a.measure-h1.json"} <= names
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == manifest

    def test_meta_sidecar_contents(self, tmp_path):
        a = tmp_path / "a.csv"
        small_cloud(a, seed=1)
        out = tmp_path / "run"
        cfg = fast_config()
        pl.run_pipeline([a], cfg, out)
        meta = json.loads((out / "a.meta.json").read_text())
        assert meta["seed"] == pl.sample_seed(cfg.seed, 0)
        assert len(meta["blocks"]) == 2
        assert "kernel" in meta and "grid" in meta

    def test_vectorization_none_writes_measures_only(self, tmp_path):
        a = tmp_path / "a.csv"
        small_cloud(a, seed=1)
        out = tmp_path / "run"
        manifest = pl.run_pipeline([a], fast_config(vectorization="none"),
                                   out)
        names = manifest["samples"][0]["outputs"]
        assert all(".measure-" in n for n in names)
        assert not (out / "a.features.csv").exists()

    def test_keep_going_records_failure(self, tmp_path):
        good = tmp_path / "good.csv"
        small_cloud(good, seed=1)
        bad = tmp_path / "bad.csv"
        bad.write_text("1,oops\n")
        out = tmp_path / "run"
        manifest = pl.run_pipeline([bad, good], fast_config(), out,
                                   keep_going=True)
        assert [s["stem"] for s in manifest["samples"]] == ["good"]
        assert len(manifest["failures"]) == 1
        failure = manifest["failures"][0]
        assert failure["stem"] == "bad"
        assert "oops" in failure["error"]
        # seeds follow the input position, so the good file keeps index 1
        assert manifest["samples"][0]["seed"] == pl.sample_seed(11, 1)

    def test_without_keep_going_first_error_raises(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,oops\n")
        with pytest.raises(pio.InputError):
            pl.run_pipeline([bad], fast_config(), tmp_path / "run")

    def test_reruns_are_byte_identical(self, tmp_path):
        a = tmp_path / "a.csv"
        small_cloud(a, seed=4)
        cfg = fast_config()
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        pl.run_pipeline([a], cfg, out1)
        pl.run_pipeline([a], cfg, out2)
        for name in ("a.features.csv", "a.meta.json", "manifest.json",
                     "a.measure-h0.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def stability_graph(n=7):
    edges = tuple((i, (i + 1) % n) for i in range(n))
    return AttributedGraph(n, edges, {})


class TestStabilityExperiment:
    def test_rows_schema_and_pair_count(self):
        rows = pl.stability_experiment(stability_graph(), steps=4, walks=2,
                                       noise=0.4, seed=3, resolution=16)
        assert pl.STABILITY_COLUMNS == ("walk", "i", "j", "f_l1", "kr1",
                                        "sw_dist", "conv_l2")
        assert len(rows) == 2 * 6
        assert sorted({r[0] for r in rows}) == [0, 1]
        for row in rows:
            assert len(row) == len(pl.STABILITY_COLUMNS)
            assert row[1] < row[2]
            assert all(x >= 0 for x in row[3:])

    def test_hilbert_bound_holds_on_every_row(self):
        rows = pl.stability_experiment(stability_graph(), steps=5, walks=3,
                                       noise=0.6, seed=8, resolution=24)
        for row in rows:
            assert row[4] <= 2.0 * row[3] + 1e-9

    def test_euler_bound_holds_on_every_row(self):
        rows = pl.stability_experiment(stability_graph(), steps=5, walks=3,
                                       noise=0.6, seed=8, resolution=24,
                                       measure="euler")
        for row in rows:
            assert row[4] <= row[3] + 1e-9

    def test_f_l1_matches_hand_sum(self):
        graph = stability_graph()
        seed, steps, noise = 21, 4, 0.3
        rows = pl.stability_experiment(graph, steps=steps, walks=1,
                                       noise=noise, seed=seed, resolution=16)
        rng = np.random.default_rng(pl.sample_seed(seed, 0))
        fs = pl._walk_functions(graph, steps, noise, rng)
        by_pair = {(r[1], r[2]): r[3] for r in rows}
        for i in range(steps):
            vi = pl._lower_star_values(graph, fs[i])
            for j in range(i + 1, steps):
                vj = pl._lower_star_values(graph, fs[j])
                want = float(np.abs(vi - vj).sum())
                assert by_pair[(i, j)] == pytest.approx(want, abs=1e-12)

    def test_lower_star_values_cover_edges_componentwise(self):
        graph = AttributedGraph(3, ((0, 1), (1, 2)), {})
        f = np.array([[0.0, 5.0], [1.0, 4.0], [2.0, 3.0]])
        vals = pl._lower_star_values(graph, f)
        assert vals.shape == (5, 2)
        assert np.array_equal(vals[:3], f)
        assert np.array_equal(vals[3], [1.0, 5.0])
        assert np.array_equal(vals[4], [2.0, 4.0])

    def test_deterministic_for_fixed_seed(self):
        a = pl.stability_experiment(stability_graph(), steps=3, walks=2,
                                    noise=0.5, seed=5, resolution=12)
        b = pl.stability_experiment(stability_graph(), steps=3, walks=2,
                                    noise=0.5, seed=5, resolution=12)
        assert a == b

    def test_csv_rendering(self):
        rows = [(0, 0, 1, 1.5, 0.5, 0.25, 0.125)]
        text = pl.stability_rows_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == "walk,i,j,f_l1,kr1,sw_dist,conv_l2"
        assert lines[1] == "0,0,1,1.5,0.5,0.25,0.125"

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError, match="two steps"):
            pl.stability_experiment(stability_graph(), steps=1)
        with pytest.raises(ValueError, match="noise"):
            pl.stability_experiment(stability_graph(), noise=0.0)
        with pytest.raises(ValueError, match="measure"):
            pl.stability_experiment(stability_graph(), measure="betti")


class TestCLI:
    def test_rips_writes_complex(self, tmp_path):
        cloud = tmp_path / "cloud.csv"
        small_cloud(cloud, seed=1, n=8)
        out = tmp_path / "complex.json"
        proc = run_cli(["rips", cloud, "--max-edge-length", "1.5",
                        "--max-dim", "2", "--out", out])
        assert proc.returncode == 0, proc.stderr
        c = pio.read_complex(out)
        assert c.num_parameters == 1
        assert len(c.simplices) >= 8

    def test_measure_then_distance(self, tmp_path):
        cloud_a = tmp_path / "a.csv"
        cloud_b = tmp_path / "b.csv"
        small_cloud(cloud_a, seed=1, n=8)
        small_cloud(cloud_b, seed=2, n=8)
        mus = []
        for cloud in (cloud_a, cloud_b):
            cx = cloud.with_suffix(".complex.json")
            proc = run_cli(["function-rips", cloud, "--max-edge-length", "2",
                            "--descriptor", "kde_codensity",
                            "--bandwidth", "0.5", "--out", cx])
            assert proc.returncode == 0, proc.stderr
            mu_dir = cloud.with_suffix(".measures")
            proc = run_cli(["measure", cx, "--degrees", "0", "--resolution",
                            "6", "--out", mu_dir])
            assert proc.returncode == 0, proc.stderr
            mu = mu_dir / f"{cx.stem}.measure-h0.json"
            assert mu.is_file()
            mus.append(mu)
        proc = run_cli(["distance", mus[0], mus[1], "--p", "1"])
        assert proc.returncode == 0, proc.stderr
        d1 = float(proc.stdout.strip())
        proc = run_cli(["distance", mus[0], mus[1], "--p", "inf"])
        dinf = float(proc.stdout.strip())
        assert 0 <= dinf <= d1
        proc = run_cli(["distance", mus[0], mus[0], "--p", "2"])
        assert float(proc.stdout.strip()) == 0.0

    def test_graph_and_barcode(self, tmp_path):
        edges = tmp_path / "edges.txt"
        cycle_edge_file(edges, n=6)
        attrs = tmp_path / "attrs.csv"
        rows = ["vertex,height"] + [f"{i},{float(i)}" for i in range(6)]
        attrs.write_text("\n".join(rows) + "\n")
        cx = tmp_path / "complex.json"
        proc = run_cli(["graph", edges, attrs, "--use", "height",
                        "--out", cx])
        assert proc.returncode == 0, proc.stderr
        c = pio.read_complex((cx))
        assert c.num_parameters == 1
        proc = run_cli(["barcode", cx, "--degree", "0", "--resolution", "8"])
        assert proc.returncode == 0, proc.stderr
        assert "inf" in proc.stdout

    def test_validate_good_and_bad(self, tmp_path):
        cloud = tmp_path / "cloud.csv"
        small_cloud(cloud, seed=3, n=6)
        cx = tmp_path / "complex.json"
        run_cli(["rips", cloud, "--max-edge-length", "1.5", "--out", cx])
        proc = run_cli(["validate", cx])
        assert proc.returncode == 0
        assert "ok" in proc.stdout
        doc = {"axis_kinds": ["diameter"], "num_parameters": 1,
               "vertex_count": 2, "simplices": [[0], [1], [0, 1]],
               "values": [[5.0], [0.0], [1.0]]}
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(doc))
        proc = run_cli(["validate", broken])
        assert proc.returncode == 3
        assert "monotonicity" in proc.stdout

    def test_gram_writes_csv(self, tmp_path):
        cloud = tmp_path / "a.csv"
        small_cloud(cloud, seed=1, n=8)
        cx = tmp_path / "a.complex.json"
        run_cli(["rips", cloud, "--max-edge-length", "2", "--out", cx])
        mu_dir = tmp_path / "measures"
        run_cli(["measure", cx, "--degrees", "0", "--resolution", "6",
                 "--out", mu_dir])
        mu = mu_dir / "a.complex.measure-h0.json"
        out = tmp_path / "gram.csv"
        proc = run_cli(["gram", mu, mu, "--directions", "8", "--seed", "4",
                        "--out", out])
        assert proc.returncode == 0, proc.stderr
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        row = lines[1].split(",")
        assert float(row[1]) == pytest.approx(1.0)
        assert float(row[2]) == pytest.approx(1.0)

    def test_global_flags_before_or_after_subcommand(self, tmp_path):
        cloud = tmp_path / "cloud.csv"
        small_cloud(cloud, seed=1, n=8)
        before = tmp_path / "before.json"
        after = tmp_path / "after.json"
        p1 = run_cli(["--out", before, "rips", cloud,
                      "--max-edge-length", "1.5"])
        p2 = run_cli(["rips", cloud, "--max-edge-length", "1.5",
                      "--out", after])
        assert p1.returncode == 0, p1.stderr
        assert p2.returncode == 0, p2.stderr
        assert before.read_bytes() == after.read_bytes()

    def test_usage_error_is_exit_1(self, tmp_path):
        proc = run_cli(["rips"])
        assert proc.returncode == 1
        proc = run_cli(["no-such-command"])
        assert proc.returncode == 1

    def test_parse_error_is_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,frog\n")
        proc = run_cli(["rips", bad, "--max-edge-length", "1"])
        assert proc.returncode == 2
        assert "input error" in proc.stderr
        assert "bad.csv" in proc.stderr

    def test_numeric_error_is_exit_3(self, tmp_path):
        mu1 = tmp_path / "m1.json"
        mu2 = tmp_path / "m2.json"
        pio.write_measure(SignedMeasure.from_atoms([(0.0,)], [1], dim=1),
                          mu1)
        pio.write_measure(SignedMeasure.from_atoms([(0.0,)], [2], dim=1),
                          mu2)
        proc = run_cli(["distance", mu1, mu2])
        assert proc.returncode == 3
        assert "mass mismatch" in proc.stderr

    def test_featurize_reruns_byte_identical(self, tmp_path):
        cloud_a = tmp_path / "a.csv"
        cloud_b = tmp_path / "b.csv"
        small_cloud(cloud_a, seed=6, n=10)
        small_cloud(cloud_b, seed=7, n=10)
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(fast_config().to_ini())
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        for out in (out1, out2):
            proc = run_cli(["featurize", cloud_a, cloud_b, "--config", cfg,
                            "--out", out])
            assert proc.returncode == 0, proc.stderr
        names = sorted(p.name for p in out1.iterdir())
        assert names == sorted(p.name for p in out2.iterdir())
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert len(manifest["samples"]) == 2

    def test_featurize_keep_going(self, tmp_path):
        good = tmp_path / "good.csv"
        small_cloud(good, seed=6, n=10)
        bad = tmp_path / "bad.csv"
        bad.write_text("nope,1\n")
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(fast_config().to_ini())
        out = tmp_path / "run"
        proc = run_cli(["featurize", bad, good, "--config", cfg,
                        "--keep-going", "--out", out])
        assert proc.returncode == 0, proc.stderr
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["failures"]) == 1
        assert len(manifest["samples"]) == 1
        proc = run_cli(["featurize", bad, good, "--config", cfg,
                        "--out", tmp_path / "run-strict"])
        assert proc.returncode == 2

    def test_stability_csv_and_euler_flag(self, tmp_path):
        edges = tmp_path / "edges.txt"
        cycle_edge_file(edges, n=5)
        out = tmp_path / "rows.csv"
        proc = run_cli(["stability", edges, "--steps", "3", "--walks", "2",
                        "--noise", "0.4", "--resolution", "12", "--seed",
                        "2", "--out", out])
        assert proc.returncode == 0, proc.stderr
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(pl.STABILITY_COLUMNS)
        assert len(lines) == 1 + 2 * 3
        for line in lines[1:]:
            cells = line.split(",")
            assert float(cells[4]) <= 2.0 * float(cells[3]) + 1e-9
        out_euler = tmp_path / "rows-euler.csv"
        proc = run_cli(["stability", edges, "--steps", "3", "--walks", "2",
                        "--noise", "0.4", "--resolution", "12", "--seed",
                        "2", "--euler", "--out", out_euler])
        assert proc.returncode == 0, proc.stderr
        for line in out_euler.read_text().splitlines()[1:]:
            cells = line.split(",")
            assert float(cells[4]) <= float(cells[3]) + 1e-9

    def test_bench_reports_timings(self):
        proc = run_cli(["bench", "--points", "12", "--resolution", "6",
                        "--max-edge-length", "0.8"])
        assert proc.returncode == 0, proc.stderr
        assert "simplices" in proc.stdout
        assert "thread" in proc.stdout

import json

from idswarm import load_catalog, save_catalog
from idswarm.cli import main

from helpers import oracle_front_ids, single_impl_catalog


def write_catalog(tmp_path, catalog=None, name="catalog.csv"):
    path = tmp_path / name
    save_catalog(catalog or single_impl_catalog(), path)
    return path


def write_scenario(tmp_path, *, n_drones=2, duration_s=30.0, name="scenario.json", **overrides):
    catalog_path = write_catalog(tmp_path)
    document = {
        "schema_version": 1,
        "name": "cli-test",
        "catalog": {"path": catalog_path.name},
        "drones": [
            {
                "drone_id": f"d{i + 1}",
                "platform": "rpi4b",
                "storage_budget_mb": 100.0,
                "battery_capacity_j": 50000.0,
                "cpu_reserved_frac": 0.0,
            }
            for i in range(n_drones)
        ],
        "zones": [
            {
                "zone_id": "z1",
                "enter_time_s": 0.0,
                "security": "low",
                "attack_prob": 0.2,
                "flow_rate_fps": 2.0,
                "mean_flow_bytes": 500,
            }
        ],
        "duration_s": duration_s,
    }
    document.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


class TestSynthCatalog:
    def test_defaults_write_36_rows(self, tmp_path, capsys):
        out = tmp_path / "cat.csv"
        assert main(["synth-catalog", "--out", str(out)]) == 0
        catalog = load_catalog(out)
        assert len(catalog) == 36
        assert {p.platform.label for p in catalog} == {"rpi4b", "jetson-xavier", "pynq-z2"}
        assert "36 entries" in capsys.readouterr().out

    def test_one_per_platform(self, tmp_path):
        out = tmp_path / "cat.csv"
        assert main(["synth-catalog", "--n-per-platform", "1", "--out", str(out)]) == 0
        assert len(load_catalog(out)) == 3

    def test_same_seed_gives_identical_files(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["synth-catalog", "--seed", "5", "--out", str(a), "--quiet"]) == 0
        assert main(["synth-catalog", "--seed", "5", "--out", str(b), "--quiet"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_count_exits_1(self, tmp_path):
        assert main(["synth-catalog", "--n-per-platform", "0", "--out", str(tmp_path / "x")]) == 1

    def test_generation_failure_exits_2(self, tmp_path, monkeypatch):
        from idswarm import cli
        from idswarm.errors import GenerationError

        def explode(seed, n_per_platform):
            raise GenerationError("front condition unreachable")

        monkeypatch.setattr(cli.catalog_mod, "synth_catalog", explode)
        assert main(["synth-catalog", "--out", str(tmp_path / "x.csv")]) == 2


class TestValidate:
    def test_valid_catalog(self, tmp_path, capsys):
        path = write_catalog(tmp_path)
        assert main(["validate", str(path)]) == 0
        assert "ok: 3 entries" in capsys.readouterr().out

    def test_invalid_catalog_names_field(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text(
            "id,model_family,platform,accuracy,latency_ms,energy_mj,memory_mb,storage_mb\n"
            "x,dnn,rpi4b,1.2,10,50,100,20\n",
            encoding="utf-8",
        )
        assert main(["validate", str(path)]) == 1
        assert "accuracy" in capsys.readouterr().err


class TestSelect:
    def test_unbounded_choice_lies_on_front(self, tmp_path, capsys):
        out = tmp_path / "cat.csv"
        main(["synth-catalog", "--seed", "3", "--out", str(out), "--quiet"])
        assert (
            main(
                [
                    "select",
                    "--catalog",
                    str(out),
                    "--platform",
                    "rpi4b",
                    "--storage-budget-mb",
                    "1000",
                    "--quiet",
                ]
            )
            == 0
        )
        decision = json.loads(capsys.readouterr().out)
        catalog = load_catalog(out)
        front = oracle_front_ids(
            [p for p in catalog if p.platform.label == "rpi4b" and p.storage_mb <= 1000]
        )
        assert decision["chosen"] in front

    def test_impossible_accuracy_exits_1(self, tmp_path, capsys):
        path = write_catalog(tmp_path)
        code = main(
            [
                "select",
                "--catalog",
                str(path),
                "--platform",
                "rpi4b",
                "--storage-budget-mb",
                "100",
                "--constraints",
                '{"min_accuracy": 1.01}',
            ]
        )
        assert code == 1
        assert "min_accuracy" in capsys.readouterr().err

    def test_single_entry_catalog_single_feasible(self, tmp_path, capsys):
        path = write_catalog(tmp_path)
        assert (
            main(
                [
                    "select",
                    "--catalog",
                    str(path),
                    "--platform",
                    "pynq-z2",
                    "--storage-budget-mb",
                    "100",
                ]
            )
            == 0
        )
        decision = json.loads(capsys.readouterr().out)
        assert decision["rationale"] == "single_feasible"
        assert decision["chosen"] == "pynq-z2-only"

    def test_constraints_from_file(self, tmp_path, capsys):
        path = write_catalog(tmp_path)
        constraints = tmp_path / "c.json"
        constraints.write_text('{"min_accuracy": 0.5}', encoding="utf-8")
        code = main(
            [
                "select",
                "--catalog",
                str(path),
                "--platform",
                "rpi4b",
                "--storage-budget-mb",
                "100",
                "--constraints",
                str(constraints),
            ]
        )
        assert code == 0

    def test_empty_shortlist_exits_3(self, tmp_path):
        path = write_catalog(tmp_path)
        code = main(
            [
                "select",
                "--catalog",
                str(path),
                "--platform",
                "rpi4b",
                "--storage-budget-mb",
                "1",
            ]
        )
        assert code == 3


class TestDistribute:
    def write_inputs(self, tmp_path, capacities=(40.0, 40.0)):
        catalog = write_catalog(tmp_path)
        reports = tmp_path / "reports.jsonl"
        lines = []
        for i, capacity in enumerate(capacities):
            battery = 1.0 if capacity > 0 else 0.0
            lines.append(
                json.dumps(
                    {
                        "drone_id": f"d{i}",
                        "epoch": 3,
                        "capacity_fps": capacity,
                        "backlog_flows": 0,
                        "battery_frac": battery,
                        "active_impl": "rpi4b-only" if battery else None,
                    }
                )
            )
        reports.write_text("\n".join(lines) + "\n", encoding="utf-8")
        flows = tmp_path / "flows.jsonl"
        flows.write_text(
            "\n".join(
                json.dumps(
                    {"flow_id": f"f{j}", "origin_drone": "d0", "size_bytes": 900, "flow_count": 3}
                )
                for j in range(4)
            )
            + "\n",
            encoding="utf-8",
        )
        return catalog, reports, flows

    def test_plan_round_trip(self, tmp_path, capsys):
        catalog, reports, flows = self.write_inputs(tmp_path)
        out = tmp_path / "plan.json"
        code = main(
            [
                "distribute",
                "--catalog",
                str(catalog),
                "--reports",
                str(reports),
                "--flows",
                str(flows),
                "--out",
                str(out),
                "--quiet",
            ]
        )
        assert code == 0
        plan = json.loads(capsys.readouterr().out)
        assert sorted(plan["assignments"]) == ["f0", "f1", "f2", "f3"]
        assert json.loads(out.read_text())["assignments"] == plan["assignments"]
        assert plan["epoch"] == 3

    def test_all_dead_exits_4(self, tmp_path):
        catalog, reports, flows = self.write_inputs(tmp_path, capacities=(0.0, 0.0))
        code = main(
            [
                "distribute",
                "--catalog",
                str(catalog),
                "--reports",
                str(reports),
                "--flows",
                str(flows),
            ]
        )
        assert code == 4


class TestSimulate:
    def test_writes_all_artifacts(self, tmp_path, capsys):
        scenario = write_scenario(tmp_path, n_drones=2)
        out = tmp_path / "run"
        assert main(["simulate", str(scenario), "--seed", "1", "--out", str(out)]) == 0
        assert (out / "metrics.json").exists()
        assert (out / "events.jsonl").exists()
        for name in ("battery.csv", "queue_length.csv", "detections.csv"):
            assert (out / "plotdata" / name).exists()
        for name in ("battery.png", "queue_length.png", "detections.png"):
            assert (out / "figures" / name).exists()
        summary_lines = (out / "summary.csv").read_text().strip().splitlines()
        assert len(summary_lines) == 1 + 2 + 1  # header + drones + swarm

    def test_bundled_scenario_writes_six_summary_rows(self, tmp_path):
        out = tmp_path / "bundled"
        assert main(["simulate", "--bundled", "--seed", "42", "--out", str(out), "--quiet"]) == 0
        for name in ("metrics.json", "summary.csv", "events.jsonl"):
            assert (out / name).exists(), name
        assert (out / "plotdata" / "battery.csv").exists()
        summary_lines = (out / "summary.csv").read_text().strip().splitlines()
        assert len(summary_lines) == 1 + 5 + 1  # header + 5 drones + swarm
        assert summary_lines[-1].startswith("swarm,")

    def test_no_figures_flag(self, tmp_path):
        scenario = write_scenario(tmp_path)
        out = tmp_path / "run"
        code = main(
            ["simulate", str(scenario), "--out", str(out), "--no-figures", "--quiet"]
        )
        assert code == 0
        assert not (out / "figures").exists()
        assert (out / "plotdata" / "battery.csv").exists()

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        scenario = write_scenario(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert (
                main(
                    [
                        "simulate",
                        str(scenario),
                        "--seed",
                        "7",
                        "--out",
                        str(out),
                        "--no-figures",
                        "--quiet",
                    ]
                )
                == 0
            )
        for name in ("metrics.json", "events.jsonl", "summary.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_zero_duration_is_empty_run(self, tmp_path):
        scenario = write_scenario(tmp_path, duration_s=0.0)
        out = tmp_path / "zero"
        assert main(["simulate", str(scenario), "--out", str(out), "--quiet"]) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["swarm"]["flows_generated"] == 0
        assert metrics["swarm"]["energy_j"] == 0.0

    def test_seed_batch_writes_subdirs(self, tmp_path):
        scenario = write_scenario(tmp_path)
        out = tmp_path / "batch"
        code = main(
            ["simulate", str(scenario), "--seeds", "1,2", "--out", str(out), "--quiet", "--no-figures"]
        )
        assert code == 0
        assert (out / "seed-1" / "metrics.json").exists()
        assert (out / "seed-2" / "metrics.json").exists()

    def test_bundled_and_path_are_exclusive(self, tmp_path):
        scenario = write_scenario(tmp_path)
        assert main(["simulate", str(scenario), "--bundled", "--quiet"]) == 1
        assert main(["simulate", "--quiet"]) == 1

    def test_unknown_scenario_key_exits_1(self, tmp_path, capsys):
        scenario = write_scenario(tmp_path, warp_drive=True)
        assert main(["simulate", str(scenario), "--quiet"]) == 1
        assert "unknown keys" in capsys.readouterr().err

    def test_invalid_json_exits_1(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["simulate", str(path), "--quiet"]) == 1

    def test_missing_platform_in_catalog_exits_1(self, tmp_path, capsys):
        scenario = write_scenario(tmp_path)
        (tmp_path / "catalog.csv").write_text(
            "id,model_family,platform,accuracy,latency_ms,energy_mj,memory_mb,storage_mb\n"
            "only,dnn,pynq-z2,0.9,10,50,100,20\n",
            encoding="utf-8",
        )
        assert main(["simulate", str(scenario), "--quiet"]) == 1
        assert "no catalog entries" in capsys.readouterr().err


class TestReport:
    def make_runs(self, tmp_path):
        scenario = write_scenario(tmp_path)
        paths = []
        for seed in (1, 2):
            out = tmp_path / f"run-{seed}"
            main(
                [
                    "simulate",
                    str(scenario),
                    "--seed",
                    str(seed),
                    "--out",
                    str(out),
                    "--no-figures",
                    "--quiet",
                ]
            )
            paths.append(out / "metrics.json")
        return paths

    def test_comparison_csv_and_figure(self, tmp_path):
        runs = self.make_runs(tmp_path)
        out = tmp_path / "comparison.csv"
        code = main(["report", *map(str, runs), "--out", str(out), "--quiet"])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("run,scenario,seed,")
        assert out.with_suffix(".png").exists()

    def test_no_figures(self, tmp_path):
        runs = self.make_runs(tmp_path)
        out = tmp_path / "cmp.csv"
        assert main(["report", *map(str, runs), "--out", str(out), "--no-figures", "--quiet"]) == 0
        assert not out.with_suffix(".png").exists()

    def test_missing_metrics_file_exits_1(self, tmp_path):
        assert main(["report", str(tmp_path / "nope.json"), "--quiet"]) == 1

import json

import pytest

from reeskit.main import EXIT_BUDGET, EXIT_INPUT_ERROR, EXIT_NEGATIVE, EXIT_OK, run


def write_job(tmp_path, payload, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def report_lines(text):
    return [json.loads(line) for line in text.splitlines()]


def by_check(lines, check):
    return [line for line in lines if line["check"] == check]


PLANE_GB_JOB = {"ring": {"vars": ["x", "y"]}, "generators": ["x^2", "x*y + y^2"]}


class TestGroebnerCommands:
    def test_gb_report(self, tmp_path, capsys):
        code = run(["gb", "--job", write_job(tmp_path, PLANE_GB_JOB)])
        assert code == EXIT_OK
        header, line = report_lines(capsys.readouterr().out)
        assert header["check"] == "job"
        assert header["data"]["spec"]["generators"] == ["x^2", "x*y + y^2"]
        assert line["data"]["basis"] == ["y^3", "x^2", "x*y + y^2"]
        assert line["data"]["criterion"] is True

    def test_gb_step_budget(self, tmp_path, capsys):
        path = write_job(tmp_path, PLANE_GB_JOB)
        assert run(["gb", "--job", path, "--budget-gb-steps", "1"]) == EXIT_BUDGET
        assert capsys.readouterr().out == ""

    def test_initial_ideal(self, tmp_path, capsys):
        job = {
            "ring": {"vars": ["x", "y", "z"]},
            "generators": ["x^2 + y*z", "y^2"],
            "weight": [1, 0, 0],
        }
        assert run(["initial", "--job", write_job(tmp_path, job)]) == EXIT_OK
        (line,) = by_check(report_lines(capsys.readouterr().out), "initial")
        assert line["params"]["weight"] == ["1", "0", "0"]
        assert line["data"]["initial_ideal"].startswith("(")

    def test_output_is_deterministic(self, tmp_path, capsys):
        path = write_job(tmp_path, PLANE_GB_JOB)
        run(["gb", "--job", path])
        first = capsys.readouterr().out
        run(["gb", "--job", path])
        assert capsys.readouterr().out == first

    def test_report_file(self, tmp_path, capsys):
        out = tmp_path / "report.jsonl"
        assert run(["gb", "--job", write_job(tmp_path, PLANE_GB_JOB), "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert len(report_lines(out.read_text(encoding="utf-8"))) == 2


class TestInputErrors:
    def test_missing_job(self):
        assert run(["gb"]) == EXIT_INPUT_ERROR

    def test_missing_file(self, tmp_path):
        assert run(["gb", "--job", str(tmp_path / "absent.json")]) == EXIT_INPUT_ERROR

    @pytest.mark.parametrize(
        "payload",
        [
            [1, 2],
            {"ring": {"vars": ["x"]}, "generators": ["2x"]},
            {"ring": {"vars": ["x", "y"], "grading": [[1, 0], [0, 1]]}, "generators": ["x"]},
            {"generators": ["x"]},
            {"ring": {"vars": ["x"]}, "generators": ["x"], "weight": [0.5]},
        ],
    )
    def test_bad_jobs(self, tmp_path, payload):
        path = write_job(tmp_path, payload)
        command = "initial" if isinstance(payload, dict) and "weight" in payload else "gb"
        assert run([command, "--job", path]) == EXIT_INPUT_ERROR

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert run(["gb", "--job", str(path)]) == EXIT_INPUT_ERROR

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            run(["bogus"])


class TestFlatnessCommand:
    def test_three_lines_table(self, tmp_path, capsys):
        job = {
            "subspace_table": {
                "ambient_dim": 2,
                "r": 3,
                "degree_bound": 0,
                "cells": [
                    {"n": 0, "m": [0, 0, 0], "rows": [[1, 0], [0, 1]]},
                    {"n": 0, "m": [1, 0, 0], "rows": [[1, 0]]},
                    {"n": 0, "m": [0, 1, 0], "rows": [[0, 1]]},
                    {"n": 0, "m": [0, 0, 1], "rows": [[1, 1]]},
                ],
            }
        }
        assert run(["flatness", "--job", write_job(tmp_path, job)]) == EXIT_NEGATIVE
        (line,) = by_check(report_lines(capsys.readouterr().out), "flatness")
        assert line["verdict"] == "violation"
        assert line["params"]["source"] == "table"
        assert line["witness"] == {"subset": [1, 2, 3], "m": [0, 0, 0], "n": 0, "p": 1, "dim": 1}

    def test_regular_sequence(self, tmp_path, capsys):
        job = {
            "ring": {"vars": ["x", "y", "z"]},
            "cutters": ["x", "y"],
            "window": {"N": 3, "W": [0, 2]},
        }
        assert run(["flatness", "--job", write_job(tmp_path, job), "--threads", "2"]) == 0
        (line,) = by_check(report_lines(capsys.readouterr().out), "flatness")
        assert line["verdict"] == "certified-on-window"
        assert line["data"]["nonzero_cells"] == []


class TestFiberCommand:
    def test_weighted_surface_fails_the_domain_test(self, tmp_path, capsys):
        job = {
            "ring": {"vars": ["x", "y", "z"], "grading": [3, 3, 2]},
            "relations": ["x*y + z^3"],
            "cutters": ["x", "y"],
            "window": {"N": 8, "W": [0, 2]},
            "domain_degree": 4,
            "multiplicativity_pairs": 0,
        }
        assert run(["fiber", "--job", write_job(tmp_path, job)]) == EXIT_NEGATIVE
        lines = report_lines(capsys.readouterr().out)
        (domain,) = by_check(lines, "domain")
        assert domain["verdict"] == "witness"
        assert [w["lift"] for w in domain["witness"]] == ["z", "z^2"]
        assert by_check(lines, "multiplicativity") == []

    def test_polynomial_ring_passes(self, tmp_path, capsys):
        job = {
            "ring": {"vars": ["x", "y", "z"]},
            "cutters": ["x", "y"],
            "alphas": [[1, 1], [1, 2]],
            "window": {"N": 3, "W": [0, 3]},
            "domain_degree": 1,
            "multiplicativity_pairs": 5,
            "multiplicativity_degree": 2,
        }
        assert run(["fiber", "--job", write_job(tmp_path, job)]) == EXIT_OK
        lines = report_lines(capsys.readouterr().out)
        (fiber,) = by_check(lines, "central_fiber")
        assert fiber["data"]["totals"] == [1, 3, 6, 10]
        (cone,) = by_check(lines, "weight_cone")
        assert cone["data"]["rays"] == [[1, 0, 0], [1, 0, 1], [1, 1, 0]]
        assert len(by_check(lines, "bookkeeping")) == 2
        (independence,) = by_check(lines, "alpha_independence")
        assert independence["verdict"] == "pass"


class TestToricCommand:
    def test_quadric_cone(self, tmp_path, capsys):
        job = {
            "toric": {
                "rays": [[1, 0], [1, 2]],
                "divisors": [[1, 0], [2, 0]],
                "alphas": [[1, 1]],
                "lambdas": [0, 1, "3/2"],
                "box": 3,
            }
        }
        assert run(["toric", "--job", write_job(tmp_path, job)]) == EXIT_OK
        lines = report_lines(capsys.readouterr().out)
        (model,) = by_check(lines, "toric_model")
        assert model["data"]["lattice_index"] == 2
        ruling, doubled = by_check(lines, "cartier")
        assert ruling["data"] == {"cartier": False, "index": 2, "solution": ["1", "-1/2"]}
        assert "witness" not in ruling
        assert doubled["witness"] == [2, -1]
        (split,) = by_check(lines, "noncartier_sum")
        assert split["verdict"] == "pass"
        valuative = by_check(lines, "valuative_ideal")
        assert len(valuative) == 6
        assert {line["params"]["lambda"] for line in valuative} == {"0", "1", "3/2"}
        assert all(line["verdict"] == "pass" for line in valuative)

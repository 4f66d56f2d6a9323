import json

import pytest

import app
import kripke
from app import main
from finitetop import DeltaDocument, SpaceDocument, indiscrete, sierpinski, space_to_delta
from formula import m_plus, parse, to_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


SIERPINSKI = json.dumps(SpaceDocument.from_space(sierpinski()).model_dump())


class TestDecide:
    def test_valid(self, capsys):
        code, out, _ = run(capsys, "decide", "[0]p -> [1]p")
        assert code == 0
        assert out == "valid (bounded search)\n"

    def test_countermodel_is_success(self, capsys):
        code, out, err = run(capsys, "decide", "--logic", "j", "[0]p -> [1]p")
        assert code == 0
        assert out == "countermodel\n"

    def test_bounded_warning(self, capsys):
        _, _, err = run(capsys, "decide", "--logic", "gl", "[0]([0]p -> p) -> [0]p")
        assert "No countermodel up to 3 worlds" in err

    def test_syntax_error(self, capsys):
        code, out, err = run(capsys, "decide", "p &")
        assert code == 2
        assert out == ""
        assert "offset 3" in err

    def test_modality_out_of_range(self, capsys):
        code, _, _ = run(capsys, "decide", "--logic", "gl", "[1]p")
        assert code == 2

    def test_exhaustive_finds_a_countermodel(self, capsys):
        code, out, _ = run(capsys, "decide", "--exhaustive", "[1]p -> [0]p")
        assert code == 0
        assert out == "countermodel\n"

    def test_exhaustive_refutes_under_the_cap(self, capsys, monkeypatch):
        monkeypatch.setattr(kripke, "BOUND_CAP", 5)
        code, out, _ = run(capsys, "decide", "--logic", "j", "--exhaustive", "[0]p -> p")
        assert code == 0
        assert out == "countermodel\n"

    def test_exhaustive_theorem_over_cap(self, capsys, monkeypatch):
        monkeypatch.setattr(kripke, "BOUND_CAP", 5)
        code, out, err = run(capsys, "decide", "--logic", "gl", "--exhaustive", "[0]p -> [0][0]p")
        assert code == 3
        assert out == "valid (bounded search)\n"
        assert "Inconclusive" in err

    def test_json_is_deterministic(self, capsys):
        first = run(capsys, "countermodel", "--json", "[1]p -> [0]p")[1]
        second = run(capsys, "countermodel", "--json", "[1]p -> [0]p")[1]
        assert first == second
        document = json.loads(first)
        assert document["formula"] == "[1]p -> [0]p"
        assert document["world"] in document["frame"]["worlds"]

    def test_formula_as_json(self, capsys):
        formula = json.dumps({"op": "box", "n": 0, "arg": {"op": "bot"}})
        code, out, _ = run(capsys, "decide", formula)
        assert code == 0
        assert out == "countermodel\n"


class TestInputs:
    def test_at_path(self, capsys, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("[1]p -> [0]p\n", encoding="utf-8")
        code, out, _ = run(capsys, "reduce", f"@{path}")
        assert code == 0
        assert out.strip() == to_text(m_plus(parse("[1]p -> [0]p")))

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "reduce", f"@{tmp_path / 'absent.txt'}")
        assert code == 2
        assert "cannot read" in err

    def test_unknown_verb(self):
        with pytest.raises(SystemExit) as info:
            main(["bogus"])
        assert info.value.code == 2


class TestOrd:
    @pytest.mark.parametrize("argv,expected", [
        (["r", "w^w*3 + w^2"], "2"),
        (["div", "w^2 + 3", "w"], "w 3"),
        (["add", "1", "w"], "w"),
        (["mul", "w", "2"], "w*2"),
        (["pow", "w"], "w^w"),
        (["cmp", "w", "w^2"], "-1"),
    ])
    def test_ops(self, capsys, argv, expected):
        code, out, _ = run(capsys, "ord", *argv)
        assert code == 0
        assert out.strip() == expected

    def test_arity(self, capsys):
        code, _, err = run(capsys, "ord", "r", "w", "w")
        assert code == 2
        assert "takes 1 operand" in err

    def test_json(self, capsys):
        _, out, _ = run(capsys, "ord", "--json", "add", "w", "1")
        assert json.loads(out) == {"op": "add", "operands": ["w", "1"], "result": "w + 1"}


class TestModels:
    def test_ordinal_model(self, capsys):
        frame = json.dumps({"n": 0, "worlds": ["a", "b"], "rel": {"0": [["a", "b"]]}})
        code, out, _ = run(capsys, "ordinal-model", "--samples", "20", frame)
        assert code == 0
        assert out.splitlines()[0] == "lambda = w"

    def test_invalid_frame(self, capsys):
        frame = json.dumps({"n": 0, "worlds": ["a", "b"], "rel": {"0": [["a", "b"], ["b", "a"]]}})
        code, _, _ = run(capsys, "ordinal-model", frame)
        assert code == 2

    def test_refute_theorem(self, capsys):
        code, out, _ = run(capsys, "refute", "[0]p -> [1]p")
        assert code == 0
        assert out == "valid (bounded search)\n"

    def test_refute_searches_once(self, capsys, monkeypatch):
        calls = []

        def counting(*args, **kwargs):
            calls.append(args)
            return kripke.decide_glp(*args, **kwargs)

        monkeypatch.setattr(app, "decide_glp", counting)
        assert run(capsys, "refute", "[0]p -> [1]p")[0] == 0
        assert len(calls) == 1

    def test_refute_non_theorem(self, capsys):
        code, out, _ = run(capsys, "refute", "--samples", "20", "[0]false")
        assert code == 0
        assert "lambda = w" in out.splitlines()


class TestTopo:
    def test_enumerate(self, capsys):
        code, out, _ = run(capsys, "topo", "enumerate", "2")
        assert code == 0
        assert out.splitlines()[0] == "4 topologies"

    def test_dproduct(self, capsys):
        code, out, _ = run(capsys, "topo", "--json", "dproduct", SIERPINSKI, SIERPINSKI)
        assert code == 0
        record = json.loads(out)
        assert record["space"]["size"] == 3
        assert record["pi1"] == [0, 0, 1]

    def test_check_glp_failure(self, capsys):
        poly = json.dumps({"size": 2, "topologies": [[[], [0], [1], [0, 1]], [[], [0], [0, 1]]]})
        code, out, _ = run(capsys, "topo", "check-glp", poly)
        assert code == 1
        assert out.splitlines()[0] == "not a glp-space"

    def test_eval(self, capsys):
        poly = json.dumps({"size": 2, "topologies": [[[], [0], [0, 1]]]})
        code, out, _ = run(capsys, "topo", "eval", poly, "<0>p", '{"p": [0]}')
        assert code == 0
        assert out.strip() == "[1]"

    def test_magari(self, capsys):
        good = json.dumps(DeltaDocument.from_delta(space_to_delta(sierpinski())).model_dump())
        bad = json.dumps(DeltaDocument.from_delta(space_to_delta(indiscrete(2))).model_dump())
        assert run(capsys, "topo", "magari", good)[1].splitlines()[0] == "magari"
        assert run(capsys, "topo", "magari", bad)[1].splitlines()[0] == "not magari"

    def test_wrong_arguments(self, capsys):
        code, _, err = run(capsys, "topo", "dproduct", SIERPINSKI)
        assert code == 2
        assert "usage: topo dproduct" in err


class TestSelftest:
    def test_single_suite(self, capsys):
        code, out, _ = run(capsys, "selftest", "--suite", "magari", "--max-size", "2")
        assert code == 0
        assert out.startswith("✅ magari")

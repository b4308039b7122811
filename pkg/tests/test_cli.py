"""
命令行测试
"""
import csv
import io
import json

import pytest

from cli import main
from cli.common import ExitCode, exit_code_for
from cli.output import FIELD_NAMES
from config import settings
from models.schemas import OutputRecord
from services.exceptions import DegenerateRatioError, PrecisionExhaustedError, RefinementIntegrityError
from utils.ledger import dumps_json_line, read_ledger


def _json_rows(text: str):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_refine_json_rows(capsys):
    """测试 refine 的 JSON 行输出"""
    code = main(["refine", "--depth", "4", "--format", "json"])
    rows = _json_rows(capsys.readouterr().out)
    assert code == ExitCode.OK
    assert [row["n"] for row in rows] == [0, 1, 2, 3]
    assert [row["r"] for row in rows] == ["10/3", "68/21", "1748/553", "216791924/68976559"]
    assert [row["q"] for row in rows] == [1, 2, 3, 1]
    assert rows[2]["u_n"] == "1/7"
    assert rows[0]["r_decimal"].startswith("3.333")
    assert list(rows[0]) == FIELD_NAMES


def test_refine_depth_one(capsys):
    """测试 depth=1 只输出第 0 行"""
    code = main(["refine", "--depth", "1", "--format", "json"])
    rows = _json_rows(capsys.readouterr().out)
    assert code == ExitCode.OK
    assert len(rows) == 1
    assert (rows[0]["q"], rows[0]["a_next"]) == (1, 2)


def test_refine_is_deterministic(capsys):
    """测试相同输入得到相同输出"""
    main(["refine", "--depth", "5", "--format", "json"])
    first = capsys.readouterr().out
    main(["refine", "--depth", "5", "--format", "json", "--strategy", "linear"])
    second = capsys.readouterr().out
    assert first == second


def test_refine_argument_order_error(capsys):
    """测试 u0 < u1 时退出码为 2"""
    code = main(["refine", "--u0", "1/3", "--u1", "1/2"])
    assert code == ExitCode.INVALID_INPUT
    assert "错误" in capsys.readouterr().err


def test_refine_invalid_seed(capsys):
    """测试 arctan(1/2) + arctan(1/4) ≠ π/4 的种子被拒绝"""
    code = main(["refine", "--u0", "1/2", "--u1", "1/4"])
    assert code == ExitCode.INVALID_INPUT
    assert capsys.readouterr().out == ""


def test_refine_invalid_depth():
    """测试 depth 必须 ≥ 1"""
    assert main(["refine", "--depth", "0"]) == ExitCode.INVALID_INPUT


def test_refine_degenerate_exit_code(monkeypatch, capsys):
    """测试比值为有理数时退出码为 3"""
    def degenerate(u, v, strategy=None, probe_log=None):
        raise DegenerateRatioError(f"arctan {u} / arctan {v} 为有理数")

    monkeypatch.setattr("services.cf_engine.step", degenerate)
    assert main(["refine", "--depth", "2"]) == ExitCode.DEGENERATE
    assert "有理数" in capsys.readouterr().err


def test_exit_code_mapping():
    """测试异常到退出码的映射"""
    assert exit_code_for(DegenerateRatioError("x")) == ExitCode.DEGENERATE
    assert exit_code_for(PrecisionExhaustedError("x")) == ExitCode.INCONCLUSIVE
    assert exit_code_for(ValueError("x")) == ExitCode.INVALID_INPUT
    with pytest.raises(RuntimeError):
        exit_code_for(RuntimeError("x"))


def test_integrity_error_is_not_swallowed(monkeypatch):
    """测试完整性错误直接抛出"""
    def broken(record, seed=None):
        raise RefinementIntegrityError("细化恒等式验证失败")

    monkeypatch.setattr("cli.refine.refined_identity", broken)
    with pytest.raises(RefinementIntegrityError):
        main(["refine", "--depth", "2"])


def test_refine_precision_exhausted(monkeypatch, capsys):
    """测试精度上限内无法确认种子时退出码为 4，而不是判定种子无效"""
    monkeypatch.setattr(settings.precision, "max_precision_bits", 4)
    assert main(["refine", "--depth", "2"]) == ExitCode.INCONCLUSIVE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "精度上限" in captured.err


def test_resume_precision_exhausted(tmp_path, monkeypatch):
    """测试续算时链式证书无法确定，退出码为 4"""
    ledger = tmp_path / "ledger.jsonl"
    assert main(["refine", "--depth", "3", "--format", "json", "--out", str(ledger)]) == ExitCode.OK
    monkeypatch.setattr(settings.precision, "max_precision_bits", 4)
    assert main(["refine", "--resume", str(ledger), "--depth", "1"]) == ExitCode.INCONCLUSIVE


def test_internal_value_error_is_not_invalid_input(monkeypatch):
    """测试计算过程中的 ValueError 不会被当作输入错误"""
    def broken(seed, depth, strategy=None):
        raise ValueError("内部错误")

    monkeypatch.setattr("cli.refine.refine_stream", broken)
    with pytest.raises(ValueError):
        main(["refine", "--depth", "2"])


def test_refine_past_long_integer_rows(capsys):
    """测试第 13 行起超长的分子分母仍能完整输出"""
    assert main(["refine", "--depth", "14", "--format", "json"]) == ExitCode.OK
    rows = _json_rows(capsys.readouterr().out)
    assert [row["n"] for row in rows] == list(range(14))
    _, denominator = rows[13]["u_n"].split("/")
    assert len(denominator) > 4300
    assert rows[13]["u_n"] == rows[12]["u_next"]


def test_refine_csv(capsys):
    """测试 CSV 输出的表头与行数"""
    code = main(["refine", "--depth", "3", "--format", "csv"])
    reader = csv.DictReader(io.StringIO(capsys.readouterr().out))
    rows = list(reader)
    assert code == ExitCode.OK
    assert reader.fieldnames == FIELD_NAMES
    assert [row["D"] for row in rows] == ["1", "2", "7"]


def test_refine_table(capsys):
    """测试默认表格输出"""
    assert main(["refine", "--depth", "3"]) == ExitCode.OK
    out = capsys.readouterr().out
    assert out.splitlines()[0].split()[:3] == ["n", "q", "u_n"]
    assert "3.333333333333" in out


def test_refine_named_seed(capsys):
    """测试 --seed 选择语料种子"""
    code = main(["refine", "--seed", "hutton", "--depth", "2", "--format", "json"])
    rows = _json_rows(capsys.readouterr().out)
    assert code == ExitCode.OK
    assert (rows[0]["u_n"], rows[0]["u_next"], rows[0]["a_n"], rows[0]["a_prev"]) == ("1/3", "1/7", 2, 1)


def test_config_file_precedence(tmp_path, capsys):
    """测试命令行参数优先于配置文件"""
    config_path = tmp_path / "run.env"
    config_path.write_text("depth=2\nformat=json\nstrategy=linear\n", encoding="utf-8")

    assert main(["refine", "--config", str(config_path)]) == ExitCode.OK
    assert len(_json_rows(capsys.readouterr().out)) == 2

    assert main(["refine", "--config", str(config_path), "--depth", "4"]) == ExitCode.OK
    assert len(_json_rows(capsys.readouterr().out)) == 4


def test_config_file_unknown_key(tmp_path, capsys):
    """测试配置文件未知键"""
    config_path = tmp_path / "run.env"
    config_path.write_text("depht=2\n", encoding="utf-8")
    assert main(["refine", "--config", str(config_path)]) == ExitCode.INVALID_INPUT
    assert "depht" in capsys.readouterr().err


def test_settings_defaults(monkeypatch, capsys):
    """测试内置默认值来自 settings"""
    monkeypatch.setattr(settings.defaults, "depth", 3)
    monkeypatch.setattr(settings.defaults, "output_format", "json")
    assert main(["refine"]) == ExitCode.OK
    assert len(_json_rows(capsys.readouterr().out)) == 3


def test_ledger_resume_matches_fresh_run(tmp_path, capsys):
    """测试写出账本后续算，与一次算完结果相同"""
    ledger = tmp_path / "ledger.jsonl"
    fresh = tmp_path / "fresh.jsonl"

    assert main(["refine", "--depth", "3", "--format", "json", "--out", str(ledger)]) == ExitCode.OK
    assert main(["refine", "--resume", str(ledger), "--depth", "2", "--format", "json"]) == ExitCode.OK
    resumed_out = _json_rows(capsys.readouterr().out)
    assert [row["n"] for row in resumed_out][-2:] == [3, 4]

    assert main(["refine", "--depth", "5", "--format", "json", "--out", str(fresh)]) == ExitCode.OK
    assert ledger.read_text(encoding="utf-8") == fresh.read_text(encoding="utf-8")
    assert len(read_ledger(str(ledger))) == 5


def test_ledger_resume_to_new_file(tmp_path):
    """测试续算结果写入 --out 指定的新文件，原账本不变"""
    ledger = tmp_path / "ledger.jsonl"
    extended = tmp_path / "extended.jsonl"
    main(["refine", "--depth", "2", "--format", "json", "--out", str(ledger)])
    original = ledger.read_text(encoding="utf-8")

    code = main(["refine", "--resume", str(ledger), "--depth", "3", "--format", "json", "--out", str(extended)])
    assert code == ExitCode.OK
    assert ledger.read_text(encoding="utf-8") == original
    assert [row.n for row in read_ledger(str(extended))] == [0, 1, 2, 3, 4]


def test_ledger_tampered(tmp_path, capsys):
    """测试篡改过的账本无法续算"""
    ledger = tmp_path / "ledger.jsonl"
    main(["refine", "--depth", "4", "--format", "json", "--out", str(ledger)])
    capsys.readouterr()

    lines = ledger.read_text(encoding="utf-8").splitlines()
    row = json.loads(lines[2])
    row["a_n"] += 1
    lines[2] = json.dumps(row)
    ledger.write_text("\n".join(lines) + "\n", encoding="utf-8")

    assert main(["refine", "--resume", str(ledger), "--depth", "1"]) == ExitCode.INVALID_INPUT
    assert "第 2 行" in capsys.readouterr().err


def test_ledger_missing(tmp_path):
    """测试账本文件不存在"""
    assert main(["refine", "--resume", str(tmp_path / "missing.jsonl")]) == ExitCode.INVALID_INPUT


def test_big_integer_json_line():
    """测试超过 64 位的整数仍能精确写出"""
    big = 2 ** 80 + 1
    row = OutputRecord(
        n=0, q=1, u_n="1/2", u_next="1/3", a_n=big, a_prev=1, a_next=big + 1,
        N=1, D=1, fib=1, r="10/3", r_decimal="3.333", err_lo="0.19", err_hi="0.20",
    )
    line = dumps_json_line(row)
    assert " " not in line
    assert json.loads(line)["a_n"] == big


def test_verify_corpus_identities(capsys):
    """测试 verify 子命令的退出码"""
    assert main(["verify", "4*atan(1/5) - 1*atan(1/239) = pi/4"]) == ExitCode.OK
    out = capsys.readouterr().out
    assert "verdict: true" in out
    assert "im = re" in out
    assert "precision_bits: " in out

    assert main(["verify", "--corpus", "simson"]) == ExitCode.OK
    assert main(["verify", "--corpus", "all"]) == ExitCode.OK


def test_verify_false_identity(capsys):
    """测试不成立的恒等式退出码为 1"""
    assert main(["verify", "1*atan(1/2) + 1*atan(1/4) = pi/4"]) == ExitCode.FALSE
    assert "verdict: false" in capsys.readouterr().out


def test_verify_parse_error(capsys):
    """测试解析错误退出码为 5 并指出位置"""
    assert main(["verify", "4*atan(1/5"]) == ExitCode.PARSE_ERROR
    err = capsys.readouterr().err
    assert "解析错误" in err
    assert err.rstrip().endswith("^")


def test_verify_without_input(capsys):
    """测试未给出恒等式"""
    assert main(["verify"]) == ExitCode.INVALID_INPUT


def test_digits(capsys):
    """测试 digits 子命令"""
    assert main(["digits", "--n", "2", "--digits", "10"]) == ExitCode.OK
    assert capsys.readouterr().out.strip() == "3.1415926535"

    assert main(["digits", "--n", "1", "--digits", "1"]) == ExitCode.OK
    assert capsys.readouterr().out.strip() == "3.1"


def test_digits_stats(capsys):
    """测试 --stats 输出"""
    assert main(["digits", "--n", "3", "--digits", "20", "--stats"]) == ExitCode.OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "3.14159265358979323846"
    assert lines[1] == "identity: 17*atan(3/79) + 5*atan(24478/873121) = pi/4"
    assert any(line.startswith("total_terms: ") for line in lines)
    assert any(line.startswith("elapsed_ms: ") for line in lines)


def test_digits_invalid_row(capsys):
    """测试 n=0 退出码为 2"""
    assert main(["digits", "--n", "0", "--digits", "5"]) == ExitCode.INVALID_INPUT
    assert "n 必须" in capsys.readouterr().err

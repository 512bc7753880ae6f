"""End-to-end tests of the tinyfl command line tool."""

import json
import os
import subprocess

import pytest

CLI = os.environ.get("TINYFL_CLI")
if CLI is None:
    pytest.skip("TINYFL_CLI not set", allow_module_level=True)

UUID = "00000000-0000-0000-0000-000000000000"


def run(*args, **kwargs):
    return subprocess.run([CLI, *args], capture_output=True, text=True, **kwargs)


def test_encode_dataset_best_case():
    result = run("encode", "--kind", "dataset", "--codec", "cbor", "--profile", "compact",
                 "--size", "1", "--train-loss", "1.0", "--val-loss", "1.0")
    assert result.returncode == 0
    assert result.stdout.strip() == "8 1"


def test_encode_global_json(tmp_path):
    params = tmp_path / "four_ones.txt"
    params.write_text("1.0\n1.0\n1.0\n1.0\n")
    result = run("encode", "--kind", "global", "--codec", "json", "--params", str(params),
                 "--round", "1", "--uuid", UUID, "--continue")
    assert result.returncode == 0
    assert result.stdout.strip() == "65 1"


def test_encode_requires_uuid(tmp_path):
    params = tmp_path / "p.txt"
    params.write_text("1.0\n")
    result = run("encode", "--kind", "global", "--codec", "cbor", "--params", str(params))
    assert result.returncode == 2


def test_encode_profile_is_cbor_only():
    result = run("encode", "--kind", "dataset", "--codec", "json", "--profile", "compact", "--size", "1")
    assert result.returncode == 2


def test_encode_missing_params_file():
    result = run("encode", "--kind", "global", "--codec", "cbor", "--uuid", UUID,
                 "--params", "/nonexistent/params.txt")
    assert result.returncode == 3


def test_raw_params_file(tmp_path):
    import struct
    raw = tmp_path / "params.f32"
    raw.write_bytes(struct.pack("<4f", 1.0, 1.0, 1.0, 1.0))
    result = run("encode", "--kind", "global", "--codec", "cbor", "--profile", "compact",
                 "--params", str(raw), "--round", "1", "--uuid", UUID)
    assert result.returncode == 0
    assert result.stdout.strip() == "33 1"


def test_decode_round_trip(tmp_path):
    out = tmp_path / "msg.bin"
    encode = run("encode", "--kind", "dataset", "--codec", "cbor", "--size", "7",
                 "--train-loss", "0.5", "--val-loss", "0.25", "--out", str(out))
    assert encode.returncode == 0
    decode = run("decode", "--codec", "cbor", str(out))
    assert decode.returncode == 0
    assert decode.stdout == (
        "fl-local-dataset-size: 7\n"
        "fl-local-model-train-loss: 0.5\n"
        "fl-local-model-val-loss: 0.25\n"
    )


def test_decode_infers_kind(tmp_path):
    out = tmp_path / "msg.json"
    params = tmp_path / "p.txt"
    params.write_text("0.5\n")
    run("encode", "--kind", "local", "--codec", "json", "--params", str(params), "--round", "3",
        "--uuid", UUID, "--train-loss", "1.5", "--val-loss", "0.75", "--out", str(out))
    decode = run("decode", "--codec", "json", str(out))
    assert decode.returncode == 0
    assert "fl-model-round: 3" in decode.stdout


def test_pb_encode_decode_with_kind_inference(tmp_path):
    out = tmp_path / "msg.pb"
    params = tmp_path / "p.txt"
    params.write_text("1.0\n1.0\n1.0\n1.0\n")
    encode = run("encode", "--kind", "global", "--codec", "pb", "--params", str(params),
                 "--round", "1", "--uuid", UUID, "--continue", "--out", str(out))
    assert encode.returncode == 0
    assert encode.stdout.strip() == "40 1"
    decode = run("decode", "--codec", "pb", str(out))
    assert decode.returncode == 0
    assert "fl-model-round: 1" in decode.stdout
    assert "fl-continue-training: true" in decode.stdout


def test_decode_truncated_exits_4(tmp_path):
    bad = tmp_path / "truncated.bin"
    bad.write_bytes(bytes([0x83, 0x01]))
    result = run("decode", "--codec", "cbor", str(bad))
    assert result.returncode == 4
    assert "truncated-input" in result.stderr


def test_decode_schema_mismatch_names_field(tmp_path):
    # Global update whose params carry a wrong tag (37 instead of 84/85/86).
    blob = bytes.fromhex("84" + "d82550" + "00" * 16 + "01" + "d825" + "43010203" + "f5")
    bad = tmp_path / "badtag.bin"
    bad.write_bytes(blob)
    result = run("decode", "--codec", "cbor", "--kind", "global", str(bad))
    assert result.returncode == 4
    assert "fl-model-params" in result.stderr


def test_decode_missing_file_exits_3():
    assert run("decode", "--codec", "cbor", "/nonexistent/blob.bin").returncode == 3


def test_bench_table1_csv():
    result = run("bench", "--table", "1", "--format", "csv")
    assert result.returncode == 0
    lines = [l for l in result.stdout.splitlines() if l]
    assert lines[0] == "message,model_size,codec,profile,bytes,frames"
    assert len(lines) == 29
    assert "FL_Local_DataSet_Update,,cbor,compact,8,1" in lines


def test_bench_table2():
    result = run("bench", "--table", "2", "--seed", "7")
    assert result.returncode == 0
    assert "177733" in result.stdout
    assert "177748" in result.stdout


def test_bench_rejects_table3():
    assert run("bench", "--table", "3").returncode == 2


def test_simulate_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["simulate", "--clients", "4", "--rounds", "2", "--min-fraction", "0.5",
            "--params", "4", "--seed", "42"]
    first = run(*args, "--out", str(a))
    second = run(*args, "--out", str(b))
    assert first.returncode == 0
    assert second.returncode == 0
    assert a.read_bytes() == b.read_bytes()
    assert first.stdout.startswith("round 1: down ")

    report = json.loads(a.read_text())
    assert report["config"]["num_clients"] == 4
    assert len(report["rounds"]) == 2


def test_simulate_config_replay(tmp_path):
    out1 = tmp_path / "r1.json"
    run("simulate", "--clients", "3", "--rounds", "1", "--seed", "9", "--out", str(out1))
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps(json.loads(out1.read_text())["config"]))
    out2 = tmp_path / "r2.json"
    result = run("simulate", "--config", str(config), "--out", str(out2))
    assert result.returncode == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_downlink_matches_table_cell(tmp_path):
    # With 1000 zero parameters the compact global update is the published
    # 2027 octets; round 1 downlink is one copy per client plus one
    # halt-mode copy per client halted during the round.
    out = tmp_path / "r.json"
    result = run("simulate", "--clients", "4", "--rounds", "1", "--min-fraction", "0.5",
                 "--params", "1000", "--seed", "11", "--out", str(out))
    assert result.returncode == 0
    round1 = json.loads(out.read_text())["rounds"][0]
    assert round1["global_update_octets"] == 2027
    newly_halted = sum(1 for c in round1["clients"] if c["halted"])
    assert round1["bytes_down"] == (4 + newly_halted) * 2027


def test_simulate_trace(tmp_path):
    out = tmp_path / "r.json"
    trace = tmp_path / "trace.txt"
    result = run("simulate", "--clients", "2", "--rounds", "1", "--seed", "3",
                 "--out", str(out), "--trace", str(trace))
    assert result.returncode == 0
    lines = trace.read_text().splitlines()
    assert lines
    for line in lines:
        direction, payload = line.split(" ")
        assert direction in ("down", "up")
        bytes.fromhex(payload)


def test_simulate_insufficient_clients(tmp_path):
    result = run("simulate", "--clients", "2", "--min-fraction", "1.0",
                 "--min-dataset-size", "1000000000", "--out", str(tmp_path / "r.json"))
    assert result.returncode == 6


def test_simulate_invalid_config(tmp_path):
    result = run("simulate", "--clients", "0", "--out", str(tmp_path / "r.json"))
    assert result.returncode == 2

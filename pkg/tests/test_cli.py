"""Command-line behavior: pipelines, exit codes, manifests, determinism."""

from pathlib import Path

import pytest

from subseg.cli import argv_from_manifest, run

CORPUS = "abc abc abc\nabd abd\n"


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


@pytest.fixture
def trained(tmp_path):
    corpus = write(tmp_path / "c.txt", CORPUS)
    merges = tmp_path / "m.bpe"
    assert run(["train-bpe", "--input", str(corpus), "--op", "2", "--output", str(merges)]) == 0
    return corpus, merges


def test_train_bpe_golden_file(trained):
    _, merges = trained
    assert read(merges) == "#subseg merges v1\na b\nab c\n"


def test_train_bpe_writes_manifest(trained):
    corpus, merges = trained
    manifest = read(Path(str(merges) + ".manifest"))
    assert "command=train-bpe" in manifest
    assert "op=2" in manifest


def test_train_bpe_early_stop_note_on_stderr(tmp_path, capsys):
    corpus = write(tmp_path / "c.txt", "ab ab\n")
    out = tmp_path / "m.bpe"
    assert run(["train-bpe", "--input", str(corpus), "--op", "5", "--output", str(out)]) == 0
    assert "stopped early" in capsys.readouterr().err


def test_apply_then_desegment_round_trips(trained, tmp_path):
    corpus, merges = trained
    seg = tmp_path / "seg.txt"
    plain = tmp_path / "plain.txt"
    assert run(["apply-bpe", "--merges", str(merges), "--input", str(corpus), "--output", str(seg)]) == 0
    assert read(seg) == "abc abc abc\nab@@ d ab@@ d\n"
    assert run(["desegment", "--input", str(seg), "--output", str(plain)]) == 0
    assert read(plain) == CORPUS


def test_apply_k_zero_is_character_level(trained, tmp_path):
    corpus, merges = trained
    seg = tmp_path / "seg0.txt"
    assert run(
        ["apply-bpe", "--merges", str(merges), "--k", "0", "--input", str(corpus), "--output", str(seg)]
    ) == 0
    assert read(seg).splitlines()[1] == "a@@ b@@ d a@@ b@@ d"


def test_apply_k_too_deep_is_a_data_error(trained, tmp_path, capsys):
    corpus, merges = trained
    code = run(["apply-bpe", "--merges", str(merges), "--k", "9", "--input", str(corpus)])
    assert code == 2
    assert "deeper" in capsys.readouterr().err


def test_apply_constrained_mode(trained, tmp_path, capsys):
    corpus, merges = trained
    vocab = write(tmp_path / "v.txt", "abc\n")
    test = write(tmp_path / "t.txt", "abc abd xyz\n")
    seg = tmp_path / "seg.txt"
    assert run(
        [
            "apply-bpe",
            "--merges", str(merges),
            "--vocab", str(vocab),
            "--input", str(test),
            "--output", str(seg),
        ]
    ) == 0
    assert read(seg) == "abc <unk> <unk>\n"
    assert "unk_count=2" in capsys.readouterr().err


def test_apply_rejects_reserved_tokens(trained, tmp_path, capsys):
    corpus, merges = trained
    bad = write(tmp_path / "bad.txt", "abc x@@y\n")
    assert run(["apply-bpe", "--merges", str(merges), "--input", str(bad)]) == 2
    err = capsys.readouterr().err
    assert str(bad) in err and "line 1" in err and "x@@y" in err


def test_segment_chars_and_back(tmp_path):
    corpus = write(tmp_path / "c.txt", "ab cd\nx\n")
    seg = tmp_path / "chars.txt"
    plain = tmp_path / "plain.txt"
    assert run(["segment-chars", "--input", str(corpus), "--output", str(seg)]) == 0
    assert read(seg) == "a b ▁ c d\nx\n"
    assert run(["desegment", "--chars", "--input", str(seg), "--output", str(plain)]) == 0
    assert read(plain) == "ab cd\nx\n"


def test_segment_chars_warns_on_long_sentences(tmp_path, capsys):
    corpus = write(tmp_path / "c.txt", "abcdef\n")
    assert run(["segment-chars", "--input", str(corpus), "--max-units", "3", "--output", str(tmp_path / "o.txt")]) == 0
    assert "exceed" in capsys.readouterr().err


def test_desegment_rejects_unk(tmp_path, capsys):
    seg = write(tmp_path / "seg.txt", "ab <unk>\n")
    assert run(["desegment", "--input", str(seg)]) == 2
    assert "UNK" in capsys.readouterr().err


def test_desegment_rejects_dangling_marker(tmp_path, capsys):
    seg = write(tmp_path / "seg.txt", "ab@@\n")
    assert run(["desegment", "--input", str(seg)]) == 2
    assert "dangling" in capsys.readouterr().err


def test_normalize_default_rules(tmp_path):
    src = write(tmp_path / "in.txt", "أـب abc\n")
    out = tmp_path / "out.txt"
    assert run(["normalize", "--input", str(src), "--output", str(out)]) == 0
    assert read(out) == "اب abc\n"


def test_normalize_no_normalize_with_punct(tmp_path):
    src = write(tmp_path / "in.txt", "أb, c\n")
    out = tmp_path / "out.txt"
    assert run(["normalize", "--no-normalize", "--separate-punct", "--input", str(src), "--output", str(out)]) == 0
    assert read(out) == "أb , c\n"


def test_normalize_rules_and_no_normalize_conflict(tmp_path, capsys):
    rules = write(tmp_path / "r.tsv", "U+0061\tU+0062\n")
    assert run(["normalize", "--rules", str(rules), "--no-normalize"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_normalize_custom_rules_file(tmp_path):
    rules = write(tmp_path / "r.tsv", "U+0061\tU+0078\nU+0062\t\n")
    src = write(tmp_path / "in.txt", "aabb\n")
    out = tmp_path / "out.txt"
    assert run(["normalize", "--rules", str(rules), "--input", str(src), "--output", str(out)]) == 0
    assert read(out) == "xx\n"


def test_stats_output(tmp_path):
    corpus = write(tmp_path / "c.txt", CORPUS)
    out = tmp_path / "stats.txt"
    assert run(["stats", "--input", str(corpus), "--output", str(out)]) == 0
    assert read(out) == "tokens=5\ntypes=2\nsentences=2\nmean_word_len_chars=3.0000\n"


def test_sweep_tsv(trained, tmp_path):
    corpus, merges = trained
    tgt = write(tmp_path / "t.txt", "t t t t t\n")
    out = tmp_path / "sweep.tsv"
    assert run(
        [
            "sweep",
            "--src", str(corpus),
            "--tgt", str(tgt),
            "--merges", str(merges),
            "--ops", "0,1,2,saturated",
            "--output", str(out),
        ]
    ) == 0
    lines = read(out).splitlines()
    assert lines[0] == "op\tsrc_tokens\ttgt_tokens\tratio"
    assert lines[1] == "0\t15\t5\t3.0000"
    assert lines[2] == "1\t10\t5\t2.0000"
    assert lines[3] == "2\t7\t5\t1.4000"
    assert lines[4] == "saturated\t7\t5\t1.4000"


def test_sweep_bad_ops_is_usage_error(trained, tmp_path, capsys):
    corpus, merges = trained
    tgt = write(tmp_path / "t.txt", "t\n")
    assert run(
        ["sweep", "--src", str(corpus), "--tgt", str(tgt), "--merges", str(merges), "--ops", "0,x"]
    ) == 1
    assert "usage error" in capsys.readouterr().err


def test_oov_report_output(tmp_path):
    vocab = write(tmp_path / "v.txt", "abc\nabd\n")
    test = write(tmp_path / "t.txt", "abc xyz xyz\n")
    out = tmp_path / "oov.txt"
    assert run(["oov", "--vocab", str(vocab), "--input", str(test), "--output", str(out)]) == 0
    assert read(out) == "oov_types=1\noov_tokens=2\nexample=xyz 2\n"


def test_consistency_report_output(tmp_path):
    lines = ["driven driven", "driving driving driving", "en en en en", "ng ng ng ng ng"]
    corpus = write(tmp_path / "c.txt", "\n".join(lines) + "\n")
    merges = tmp_path / "m.bpe"
    out = tmp_path / "cons.tsv"
    assert run(["train-bpe", "--input", str(corpus), "--op", "6", "--output", str(merges)]) == 0
    assert run(
        [
            "consistency",
            "--input", str(corpus),
            "--merges", str(merges),
            "--min-lcp", "4",
            "--output", str(out),
        ]
    ) == 0
    body = read(out).splitlines()
    assert body[1] == "driven\tdriving\t4\tdriv|en\tdrivi|ng\t5"


def test_pos_prep_outputs(trained, tmp_path, capsys):
    _, merges = trained
    tagged = write(tmp_path / "pos.txt", "abc|X abd|Y+Z\n")
    prefix = tmp_path / "out"
    assert run(
        [
            "pos-prep",
            "--input", str(tagged),
            "--scheme", "bpe",
            "--merges", str(merges),
            "--output-prefix", str(prefix),
        ]
    ) == 0
    assert "instances=2" in capsys.readouterr().err
    src = read(Path(str(prefix) + ".src"))
    tgt = read(Path(str(prefix) + ".tgt"))
    assert src == "<BOS> <BOS> abc\n<BOS> abc <T:X> ab@@ d\n"
    assert tgt == "X\nY Z\n"
    manifest = read(Path(str(prefix) + ".manifest"))
    assert "command=pos-prep" in manifest


def test_pos_prep_morph_scheme(tmp_path):
    tagged = write(tmp_path / "pos.txt", "wktAbnA|CONJ+NOUN+PRON\n")
    morph = write(tmp_path / "m.txt", "w@@ ktAb@@ nA\n")
    prefix = tmp_path / "out"
    assert run(
        [
            "pos-prep",
            "--input", str(tagged),
            "--scheme", "morph",
            "--morph-file", str(morph),
            "--output-prefix", str(prefix),
        ]
    ) == 0
    assert read(Path(str(prefix) + ".src")) == "<BOS> <BOS> w@@ ktAb@@ nA\n"
    assert read(Path(str(prefix) + ".tgt")) == "CONJ NOUN PRON\n"


def test_pos_prep_flag_combinations(tmp_path, capsys):
    tagged = write(tmp_path / "pos.txt", "a|X\n")
    prefix = tmp_path / "out"
    assert run(["pos-prep", "--input", str(tagged), "--scheme", "bpe", "--output-prefix", str(prefix)]) == 1
    assert run(["pos-prep", "--input", str(tagged), "--scheme", "morph", "--output-prefix", str(prefix)]) == 1
    assert run(
        ["pos-prep", "--input", str(tagged), "--scheme", "unseg", "--morph-file", "x", "--output-prefix", str(prefix)]
    ) == 1
    capsys.readouterr()


def test_unknown_flag_is_usage_error(capsys):
    assert run(["stats", "--bogus"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_missing_command_is_usage_error(capsys):
    assert run([]) == 1
    capsys.readouterr()


def test_missing_input_file_is_data_error(tmp_path, capsys):
    assert run(["stats", "--input", str(tmp_path / "nope.txt")]) == 2
    capsys.readouterr()


def test_malformed_merges_is_data_error(tmp_path, capsys):
    merges = write(tmp_path / "m.bpe", "not a header\n")
    corpus = write(tmp_path / "c.txt", "ab\n")
    assert run(["apply-bpe", "--merges", str(merges), "--input", str(corpus)]) == 2
    err = capsys.readouterr().err
    assert "header" in err
    assert str(merges) in err


def test_thread_cap_env_validation(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SUBSEG_THREADS", "many")
    assert run(["stats", "--input", "-"]) == 1
    assert "SUBSEG_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("SUBSEG_THREADS", "2")
    corpus = write(tmp_path / "c.txt", "a\n")
    assert run(["stats", "--input", str(corpus), "--output", str(tmp_path / "s.txt")]) == 0


def test_sweep_ratio_direction_flag(trained, tmp_path):
    corpus, merges = trained
    tgt = write(tmp_path / "t.txt", "t t t t t\n")
    out = tmp_path / "sweep.tsv"
    assert run(
        [
            "sweep",
            "--src", str(corpus),
            "--tgt", str(tgt),
            "--merges", str(merges),
            "--ops", "2",
            "--ratio-direction", "tgt/src",
            "--output", str(out),
        ]
    ) == 0
    assert read(out).splitlines()[1] == "2\t7\t5\t0.7143"


def test_pipeline_identity_on_neutral_text(trained, tmp_path):
    # Plain letters survive normalize -> apply-bpe -> desegment untouched.
    _, merges = trained
    text = "abc abd\nxyz\n"
    src = write(tmp_path / "plain.txt", text)
    normalized = tmp_path / "norm.txt"
    segmented = tmp_path / "seg.txt"
    restored = tmp_path / "back.txt"
    assert run(["normalize", "--input", str(src), "--output", str(normalized)]) == 0
    assert run(
        ["apply-bpe", "--merges", str(merges), "--input", str(normalized), "--output", str(segmented)]
    ) == 0
    assert run(["desegment", "--input", str(segmented), "--output", str(restored)]) == 0
    assert restored.read_bytes() == src.read_bytes()


def test_rerun_from_manifest_reproduces_bytes(trained, tmp_path):
    corpus, merges = trained
    seg = tmp_path / "seg.txt"
    argv = ["apply-bpe", "--merges", str(merges), "--input", str(corpus), "--output", str(seg)]
    assert run(argv) == 0
    first = seg.read_bytes()
    manifest_text = read(Path(str(seg) + ".manifest"))
    rebuilt = argv_from_manifest(manifest_text)
    assert rebuilt[0] == "apply-bpe"
    assert run(rebuilt) == 0
    assert seg.read_bytes() == first

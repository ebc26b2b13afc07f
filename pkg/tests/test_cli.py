import json
import math

import numpy as np
import pytest

from fftsvd import textio
from fftsvd.cli import main
from fftsvd.oracles import dft_naive
from fftsvd.pgm import Image, read_pgm, write_pgm
from fftsvd.sdf import bit_reverse_permute
from fftsvd.watermark import synthetic_host


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.fixture
def vec(tmp_path):
    def make(values, name="x.txt"):
        p = tmp_path / name
        textio.write_vector(p, values)
        return p

    return make


@pytest.fixture
def mat(tmp_path):
    def make(values, name="a.txt"):
        p = tmp_path / name
        textio.write_matrix(p, values)
        return p

    return make


# fft


def test_fft_impulse(capsys, vec):
    rc, out, _ = run(capsys, "fft", vec([1, 0, 0, 0, 0, 0, 0, 0]))
    assert rc == 0
    assert out == "8\n" + "1 0\n" * 8


def test_fft_bitrev_matches_natural(capsys, vec, tmp_path, rng):
    p = vec(rng.standard_normal(16) + 1j * rng.standard_normal(16))
    run(capsys, "fft", p, "-o", tmp_path / "nat.txt")
    run(capsys, "fft", p, "--order", "bitrev", "-o", tmp_path / "rev.txt")
    nat = textio.read_vector(tmp_path / "nat.txt")
    rev = textio.read_vector(tmp_path / "rev.txt")
    assert np.array_equal(bit_reverse_permute(rev), nat)


def test_fft_oracle_agrees(capsys, vec, tmp_path, rng):
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    p = vec(x)
    run(capsys, "fft", p, "-o", tmp_path / "a.txt")
    run(capsys, "fft", p, "--oracle", "-o", tmp_path / "b.txt")
    a, b = textio.read_vector(tmp_path / "a.txt"), textio.read_vector(tmp_path / "b.txt")
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(b))


def test_fft_oracle_any_length_and_inverse(capsys, vec, tmp_path):
    rc, out, _ = run(capsys, "fft", vec([1, 2, 3]), "--oracle")
    assert rc == 0 and np.allclose(textio.parse_vector(out), dft_naive([1, 2, 3]))
    rc, out, _ = run(capsys, "fft", vec([2, 0]), "--inverse")
    assert rc == 0 and out == "2\n1 0\n1 0\n"


def test_fft_fixed_prints_scale(capsys, vec):
    rc, out, err = run(capsys, "fft", vec([0.5] * 8), "--fixed", "2.14")
    assert rc == 0
    assert "scale 1/8" in err
    assert textio.parse_vector(out)[0] == 4.0


def test_fft_strict_overflow_exit_4(capsys, vec):
    frame = [1.9 + 1.9j] * 4 + [-1.9 - 1.9j] * 4
    rc, _, err = run(capsys, "fft", vec(frame), "--fixed", "2.14", "--strict")
    assert rc == 4 and "overflow" in err
    rc, _, _ = run(capsys, "fft", vec(frame), "--fixed", "2.14")
    assert rc == 0


def test_fft_exit_codes(capsys, vec, tmp_path):
    assert run(capsys, "fft", vec([1, 2, 3]))[0] == 3
    assert run(capsys, "fft", vec([1, 2, 3]), "--size-check")[0] == 3
    assert run(capsys, "fft", vec([1, 2, 3, 4]), "--size-check")[0] == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n1 0\n")
    assert run(capsys, "fft", bad)[0] == 2
    assert run(capsys, "fft", tmp_path / "missing.txt")[0] == 2
    assert run(capsys, "fft", vec([1, 2]), "--fixed", "2.14", "--inverse")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["fft", str(vec([1, 2])), "--fixed", "two"])
    assert exc.value.code == 2


def test_fft_reads_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("2\n1 0\n1 0\n"))
    rc, out, _ = run(capsys, "fft", "-")
    assert rc == 0 and out == "2\n2 0\n0 0\n"


# svd


def test_svd_diag(capsys, mat, tmp_path):
    rc, out, _ = run(capsys, "svd", mat(np.diag([3.0, 2.0])), "-o", tmp_path / "r")
    assert rc == 0
    assert (tmp_path / "r.S").read_text() == "2\n3\n2\n"
    assert "sweeps_used 0" in out and "residual" in out
    u = textio.read_matrix(tmp_path / "r.U")
    assert np.allclose(np.abs(u), np.eye(2))


def test_svd_known_value(capsys, mat, tmp_path):
    rc, _, _ = run(capsys, "svd", mat([[3.0, 0.0], [4.0, 5.0]]), "-o", tmp_path / "r")
    s = textio.parse_vector((tmp_path / "r.S").read_text()).real
    assert rc == 0 and np.allclose(s, [math.sqrt(45), math.sqrt(5)], atol=1e-9)


def test_svd_zero_and_default_prefix(capsys, mat, tmp_path):
    p = mat(np.zeros((2, 2)), "z.txt")
    rc, _, _ = run(capsys, "svd", p)
    assert rc == 0
    assert (tmp_path / "z.S").read_text() == "2\n0\n0\n"


def test_svd_fixed_mode(capsys, mat, tmp_path, rng):
    a = rng.standard_normal((6, 4))
    rc, _, _ = run(capsys, "svd", mat(a), "--fixed", "2.14", "-o", tmp_path / "f")
    assert rc == 0
    u = textio.read_matrix(tmp_path / "f.U")
    s = textio.parse_vector((tmp_path / "f.S").read_text()).real
    v = textio.read_matrix(tmp_path / "f.V")
    assert np.linalg.norm(a - (u[:, :4] * s) @ v.T) <= 1e-2 * np.linalg.norm(a)


def test_svd_non_convergence_exit_5(capsys, mat, tmp_path, rng):
    rc, out, err = run(capsys, "svd", mat(rng.standard_normal((5, 5))), "--max-sweeps", "0", "-o", tmp_path / "p")
    assert rc == 5 and "error" in err
    for name in "USV":
        assert (tmp_path / f"p.{name}.partial").exists()
        assert not (tmp_path / f"p.{name}").exists()


def test_svd_parse_error(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2 2\n1 2 3\n")
    assert run(capsys, "svd", p)[0] == 2


# watermark


@pytest.fixture
def host_file(tmp_path):
    p = tmp_path / "host.pgm"
    write_pgm(p, synthetic_host(128, seed=4).quantized())
    return p


def test_embed_extract_round_trip(capsys, host_file, tmp_path):
    bits = "1011001110001011"
    marked = tmp_path / "m.pgm"
    (tmp_path / "bits.txt").write_text(bits + "\n")
    rc, _, _ = run(capsys, "embed", host_file, "-o", marked, "--bits", tmp_path / "bits.txt", "--seed", "0xABC")
    assert rc == 0
    rc, out, err = run(capsys, "extract", marked, host_file, "--compare", tmp_path / "bits.txt", "--seed", "0xABC")
    assert rc == 0 and out.strip() == bits
    assert "similarity 1.000000" in err
    rc, out, _ = run(capsys, "extract", marked, host_file, "--nbits", "16", "--seed", "0xABC", "-o", tmp_path / "o.txt")
    assert rc == 0 and out == "" and (tmp_path / "o.txt").read_text().strip() == bits


def test_round_trip_at_low_strength(capsys, host_file, tmp_path):
    bits = "1" * 15 + "0" * 16
    marked = tmp_path / "m.pgm"
    rc, _, err = run(capsys, "embed", host_file, "-o", marked, "--bits-string", bits, "--seed", "5", "--alpha", "0.02")
    assert rc == 0 and "warning" not in err
    rc, out, _ = run(capsys, "extract", marked, host_file, "--nbits", "31", "--seed", "5", "--alpha", "0.02")
    assert out.strip() == bits


def test_embed_plain_pgm(capsys, host_file, tmp_path):
    rc, _, _ = run(capsys, "embed", host_file, "-o", tmp_path / "m.pgm", "--bits-string", "101", "--seed", "7", "--plain")
    assert rc == 0 and (tmp_path / "m.pgm").read_bytes()[:2] == b"P2"


def test_zero_alpha_is_byte_identical(capsys, host_file, tmp_path):
    out = tmp_path / "same.pgm"
    rc, _, _ = run(capsys, "embed", host_file, "-o", out, "--bits-string", "1100", "--seed", "1", "--alpha", "0")
    assert rc == 0 and out.read_bytes() == host_file.read_bytes()


def test_wrong_seed_similarity(capsys, host_file, tmp_path):
    bits = "".join(str(b) for b in np.random.default_rng(2).integers(0, 2, 31))
    (tmp_path / "b.txt").write_text(bits)
    marked = tmp_path / "m.pgm"
    run(capsys, "embed", host_file, "-o", marked, "--bits-string", bits, "--seed", "1111")
    rc, _, err = run(capsys, "extract", marked, host_file, "--compare", tmp_path / "b.txt", "--seed", "2222")
    sim = float(err.split("similarity ")[1].split()[0])
    assert rc == 0 and abs(sim) < 0.5


def test_watermark_exit_codes(capsys, host_file, tmp_path):
    rc, _, _ = run(capsys, "embed", host_file, "-o", tmp_path / "m.pgm", "--bits-string", "1" * 32, "--seed", "1")
    assert rc == 6
    rc, _, _ = run(capsys, "extract", host_file, host_file, "--nbits", "40", "--seed", "1")
    assert rc == 6
    odd = tmp_path / "odd.pgm"
    write_pgm(odd, Image(np.full((96, 128), 0.5)))
    assert run(capsys, "embed", odd, "-o", tmp_path / "x.pgm", "--bits-string", "1", "--seed", "1")[0] == 3
    small = tmp_path / "small.pgm"
    write_pgm(small, Image(np.full((32, 32), 0.5)))
    assert run(capsys, "embed", small, "-o", tmp_path / "x.pgm", "--bits-string", "1", "--seed", "1")[0] == 3
    garbage = tmp_path / "g.pgm"
    garbage.write_bytes(b"P7\n")
    assert run(capsys, "embed", garbage, "-o", tmp_path / "x.pgm", "--bits-string", "1", "--seed", "1")[0] == 2
    assert run(capsys, "embed", host_file, "-o", tmp_path / "x.pgm", "--bits-string", "12", "--seed", "1")[0] == 2
    assert run(capsys, "extract", host_file, host_file, "--seed", "1")[0] == 2


# bench


def test_bench_csv(capsys, tmp_path):
    out = tmp_path / "r.csv"
    rc, stdout, err = run(capsys, "bench", "--sizes", "64", "--reps", "3", "--out", out)
    assert rc == 0 and stdout == ""
    lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "metric,accelerated,naive,ratio" and len(lines) == 9
    assert (tmp_path / "r.png").exists() and "speedup" in err


def test_bench_json_to_stdout(capsys):
    rc, stdout, _ = run(capsys, "bench", "--sizes", "32", "--dims", "3", "--reps", "3", "--format", "json")
    doc = json.loads(stdout)
    assert rc == 0 and [s["op"] for s in doc["sections"]] == ["fft", "svd"]


def test_bench_no_plot(capsys, tmp_path):
    out = tmp_path / "r.json"
    rc, _, _ = run(capsys, "bench", "--sizes", "32", "--reps", "3", "--format", "json", "--out", out, "--no-plot")
    assert rc == 0 and not (tmp_path / "r.png").exists()


def test_bench_bad_flags(capsys):
    assert run(capsys, "bench", "--reps", "2")[0] == 2
    assert run(capsys, "bench", "--sizes", "100")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--sizes", "a,b"])
    assert exc.value.code == 2


# selftest


def test_selftest_clean(capsys):
    rc, out, _ = run(capsys, "selftest")
    lines = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]
    assert rc == 0 and len(lines) >= 10 and all(ln.startswith("PASS") for ln in lines)


def test_selftest_fault_injection(capsys):
    rc, out, _ = run(capsys, "selftest", "--inject-fault", "corrupt-twiddle")
    assert rc == 1
    assert "FAIL fft.parseval" in out and "FAIL fft.oracle_equivalence" in out

"""End-to-end CLI: config handling, artifacts, determinism, exit codes."""

import numpy as np
import pytest

from symplap.cli import main


def write_config(path, body):
    path.write_text(body)
    return str(path)


SOLVE_BODY = """
[solve]
model = A2
p = {p}
mu = 1.0
n = 16
dt = 0.002
t_final = {t_final}
ic = {ic}
"""


def run(args):
    return main([str(a) for a in args])


class TestSolve:
    def test_solve_writes_trajectory_and_diagnostics(self, tmp_path):
        cfg = write_config(tmp_path / "a.ini", SOLVE_BODY.format(p=3, t_final=0.02, ic="random_smooth"))
        out = tmp_path / "out"
        assert run(["solve", "--config", cfg, "--out", out, "--seed", 7]) == 0
        assert (out / "trajectory.bin").exists()
        assert (out / "trajectory.bin.meta").exists()
        lines = (out / "diagnostics.csv").read_text().strip().splitlines()
        assert lines[0] == "step,newton_iterations,residual,energy"
        assert len(lines) == 11
        energies = [float(line.split(",")[3]) for line in lines[1:]]
        assert all(a >= b for a, b in zip(energies, energies[1:]))

    def test_solve_outputs_deterministic(self, tmp_path):
        cfg = write_config(tmp_path / "d.ini", SOLVE_BODY.format(p=3, t_final=0.01, ic="random_smooth"))
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run(["solve", "--config", cfg, "--out", out1, "--seed", 9]) == 0
        assert run(["solve", "--config", cfg, "--out", out2, "--seed", 9]) == 0
        for name in ("trajectory.bin", "trajectory.bin.meta", "diagnostics.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_zero_amplitude_gives_zero_energy_column(self, tmp_path):
        body = SOLVE_BODY.format(p=3, t_final=0.01, ic="random_smooth") + "amplitude = 0.0\n"
        cfg = write_config(tmp_path / "z.ini", body)
        out = tmp_path / "out"
        assert run(["solve", "--config", cfg, "--out", out]) == 0
        lines = (out / "diagnostics.csv").read_text().strip().splitlines()[1:]
        assert all(float(line.split(",")[3]) == 0.0 for line in lines)

    def test_eigenfield_energy_strictly_decreasing(self, tmp_path):
        cfg = write_config(tmp_path / "e.ini", SOLVE_BODY.format(p=2, t_final=0.02, ic="eigenfield"))
        out = tmp_path / "out"
        assert run(["solve", "--config", cfg, "--out", out]) == 0
        lines = (out / "diagnostics.csv").read_text().strip().splitlines()[1:]
        energies = [float(line.split(",")[3]) for line in lines]
        assert all(a > b for a, b in zip(energies, energies[1:]))

    def test_invalid_growth_exponent_writes_nothing(self, tmp_path):
        cfg = write_config(tmp_path / "bad.ini", SOLVE_BODY.format(p=1.5, t_final=0.02, ic="eigenfield"))
        out = tmp_path / "out_bad"
        assert run(["solve", "--config", cfg, "--out", out]) == 1
        assert not out.exists()

    def test_misaligned_t_final_rejected(self, tmp_path):
        cfg = write_config(tmp_path / "bad2.ini", SOLVE_BODY.format(p=2, t_final=0.0213, ic="eigenfield"))
        assert run(["solve", "--config", cfg, "--out", tmp_path / "o"]) == 1

    def test_missing_config_file(self, tmp_path):
        assert run(["solve", "--config", tmp_path / "nope.ini", "--out", tmp_path / "o"]) == 1

    def test_inline_comments_in_config(self, tmp_path):
        cfg = write_config(tmp_path / "c.ini", """
[solve]
model = A2          ; A1 or A2
p = 2.0             # growth exponent
mu = 1.0
n = 16
dt = 0.005
t_final = 0.01
ic = eigenfield
""")
        assert run(["solve", "--config", cfg, "--out", tmp_path / "out"]) == 0

    def test_solver_failure_keeps_partial_trajectory(self, tmp_path, monkeypatch):
        import symplap.cli as cli
        import symplap.pde_solver as ps
        from symplap.errors import SolverFailureError

        def failing_solve(u0, t_final, dt, model, meta=None):
            exc = SolverFailureError("forced failure", residual_history=[1.0],
                                     step_index=2)
            exc.partial = ps.Trajectory(np.zeros((3, 16, 16, 2)), dt, model,
                                        ps.TorusGrid(16), [],
                                        dict(meta or {}, failed_at_step=2))
            raise exc

        monkeypatch.setattr(cli.ps, "solve", failing_solve)
        cfg = write_config(tmp_path / "f.ini", SOLVE_BODY.format(p=3, t_final=0.02, ic="eigenfield"))
        out = tmp_path / "out"
        assert run(["solve", "--config", cfg, "--out", out]) == 2
        assert (out / "trajectory.bin").exists()
        assert "failed_at_step = 2" in (out / "trajectory.bin.meta").read_text()


class TestExponents:
    def test_sweep_matches_engine(self, tmp_path):
        import symplap.exponent_engine as ee
        cfg = write_config(tmp_path / "e.ini", """
[exponents]
p_values = 2, 2.5, 3, 4
d_values = 2, 3
targets = 0.4
""")
        out = tmp_path / "out"
        assert run(["exponents", "--config", cfg, "--out", out]) == 0
        lines = (out / "exponents.csv").read_text().strip().splitlines()
        assert lines[0] == "p,d,regime,gamma0,gamma1,steps_to_0.4"
        assert len(lines) == 9
        for line in lines[1:]:
            p, d, regime, *_ = line.split(",")
            assert regime == ee.classify(float(p), int(d)).value

    def test_invalid_p_rejected(self, tmp_path):
        cfg = write_config(tmp_path / "e.ini", "[exponents]\np_values = 1.0\n")
        assert run(["exponents", "--config", cfg, "--out", tmp_path / "o"]) == 1


class TestVerify:
    def test_empty_corpus_empty_csv(self, tmp_path):
        cfg = write_config(tmp_path / "v.ini", "[verify]\ncorpus_size = 0\nsamples = 257\n")
        out = tmp_path / "out"
        assert run(["verify-inequalities", "--config", cfg, "--out", out]) == 0
        lines = (out / "inequalities.csv").read_text().strip().splitlines()
        assert len(lines) == 1  # header only

    def test_small_corpus_clean_and_deterministic(self, tmp_path):
        cfg = write_config(tmp_path / "v.ini", "[verify]\ncorpus_size = 6\nsamples = 257\n")
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run(["verify-inequalities", "--config", cfg, "--out", out1, "--seed", 5]) == 0
        assert run(["verify-inequalities", "--config", cfg, "--out", out2, "--seed", 5]) == 0
        assert (out1 / "inequalities.csv").read_bytes() == (out2 / "inequalities.csv").read_bytes()

    def test_corrupted_constant_detected(self, tmp_path):
        cfg = write_config(tmp_path / "v.ini", """
[verify]
corpus_size = 8
samples = 257
corrupt_constants = true
""")
        out = tmp_path / "out"
        assert run(["verify-inequalities", "--config", cfg, "--out", out]) == 3
        text = (out / "inequalities.csv").read_text()
        assert ",0," in text.replace(",0\n", ",0,")  # at least one failed row flagged


class TestAnalyze:
    @pytest.fixture()
    def solved(self, tmp_path):
        cfg = write_config(tmp_path / "s.ini", SOLVE_BODY.format(p=2, t_final=1.0, ic="eigenfield"))
        out = tmp_path / "solved"
        assert run(["solve", "--config", cfg, "--out", out]) == 0
        return out / "trajectory.bin"

    def test_analyze_outputs(self, tmp_path, solved):
        cfg = write_config(tmp_path / "a.ini", f"""
[analyze]
trajectory = {solved}
alphas = 0.5, 0.9
delta = 0.15
r = 0.85
big_r = 1.7
t_center = 0.5
time_halfwidth = 0.35
""")
        out = tmp_path / "an"
        assert run(["analyze", "--config", cfg, "--out", out]) == 0
        body = (out / "regularity.csv").read_text().strip().splitlines()
        assert body[0].startswith("target,space,time_p,r,alpha,seminorm,alpha_hat")
        assert len(body) > 5
        assert (out / "ball_estimate.txt").exists()
        plots = list(out.glob("plotdata_*.txt"))
        assert plots
        for pl in plots:
            for line in pl.read_text().strip().splitlines():
                a, b = line.split()
                float(a), float(b)

    def test_missing_trajectory_is_validation_error(self, tmp_path):
        cfg = write_config(tmp_path / "a.ini", "[analyze]\ntrajectory = /nonexistent.bin\n")
        assert run(["analyze", "--config", cfg, "--out", tmp_path / "o"]) == 1

    def test_determinism_byte_identical(self, tmp_path, solved):
        cfg = write_config(tmp_path / "a.ini", f"""
[analyze]
trajectory = {solved}
alphas = 0.5
delta = 0.15
r = 0.85
big_r = 1.7
t_center = 0.5
time_halfwidth = 0.35
""")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert run(["analyze", "--config", cfg, "--out", out1]) == 0
        assert run(["analyze", "--config", cfg, "--out", out2]) == 0
        assert (out1 / "regularity.csv").read_bytes() == (out2 / "regularity.csv").read_bytes()
        assert (out1 / "ball_estimate.txt").read_bytes() == (out2 / "ball_estimate.txt").read_bytes()

import numpy as np
import pytest

from simtkit.corpus import EOS_ID
from simtkit.program import READ, WRITE, format_program, parse_program, validity
from simtkit.simulate import (
    EchoInterpreter,
    PolicyError,
    ScriptedWaitKProgrammer,
    SimConfig,
    TeacherInterpreter,
    playback,
    render_trace,
    run_episode,
    scoring_lag,
)

V = 10  # token ids 0..9, EOS_ID = 1


class AlwaysRead:
    def action_dist(self, view):
        return np.array([1.0, 0.0])


class NeverEos:
    # uniform over non-reserved tokens, never EOS
    def token_dist(self, view):
        dist = np.ones(V)
        dist[EOS_ID] = 0.0
        return dist / dist.sum()


class BrokenProgrammer:
    def action_dist(self, view):
        return np.array([np.nan, 1.0])


def test_wait1_echo_episode():
    source = (4, 7)
    transcript = run_episode(ScriptedWaitKProgrammer(1), EchoInterpreter(V), source)
    assert format_program(transcript.program) == "RWRWW"  # final W emitted EOS
    assert transcript.hypothesis == source
    assert transcript.terminated == "eos"
    assert transcript.revealed_source == source


def test_always_read_gets_masked_into_writes():
    transcript = run_episode(AlwaysRead(), EchoInterpreter(V), (4, 5, 6))
    assert transcript.terminated == "eos"
    assert transcript.hypothesis == (4, 5, 6)
    assert format_program(transcript.program) == "RRRWWWW"


def test_never_eos_hits_write_cap():
    cfg = SimConfig(max_target_factor=2.0, max_target_slack=3)
    transcript = run_episode(
        ScriptedWaitKProgrammer(1), NeverEos(), (4, 5), cfg, rng=np.random.default_rng(0)
    )
    assert transcript.terminated == "step_cap"
    assert len(transcript.hypothesis) == 2 * 2 + 3


def test_first_action_is_always_read():
    class AlwaysWrite:
        def action_dist(self, view):
            return np.array([0.0, 1.0])

    transcript = run_episode(AlwaysWrite(), EchoInterpreter(V), (4, 5, 6))
    assert transcript.program[0] is READ


def test_invalid_distribution_raises():
    with pytest.raises(PolicyError, match="programmer"):
        run_episode(BrokenProgrammer(), EchoInterpreter(V), (4, 5))


def test_episode_program_boundary_valid_with_adversarial_policies():
    rng = np.random.default_rng(0)

    class RandomProgrammer:
        def action_dist(self, view):
            p = rng.uniform(0.05, 0.95)
            return np.array([p, 1.0 - p])

    class RandomInterpreter:
        def token_dist(self, view):
            d = rng.uniform(0.01, 1.0, size=V)
            return d / d.sum()

    cfg = SimConfig()
    for trial in range(200):
        src_len = int(rng.integers(1, 12))
        source = tuple(int(x) for x in rng.integers(2, V, size=src_len))
        transcript = run_episode(
            RandomProgrammer(), RandomInterpreter(), source, cfg, rng=rng
        )
        reads = sum(1 for a in transcript.program if a is READ)
        writes = len(transcript.program) - reads
        assert validity(transcript.program, reads, writes).boundary_valid
        assert reads == len(transcript.revealed_source)
        expected = len(transcript.hypothesis) + (1 if transcript.terminated == "eos" else 0)
        assert writes == expected


def test_greedy_episode_deterministic():
    a = run_episode(ScriptedWaitKProgrammer(2), EchoInterpreter(V), (3, 4, 5))
    b = run_episode(ScriptedWaitKProgrammer(2), EchoInterpreter(V), (3, 4, 5))
    assert a == b


def test_playback_teacher_reproduces_reference():
    source = (3, 4, 5)
    reference = (6, 7, 8)
    program = parse_program("RWRWRW")
    transcript = playback(program, TeacherInterpreter(reference, V), source)
    assert transcript.hypothesis == reference
    assert transcript.program == program
    assert transcript.terminated == "program_end"


def test_playback_rejects_mismatched_source():
    with pytest.raises(ValueError, match="reads 4"):
        playback(parse_program("RWRWRRWW"), EchoInterpreter(V), (3, 4, 5))


def test_playback_truncates_on_early_eos():
    source = (3, 4)
    transcript = playback(
        parse_program("RWRWW"), TeacherInterpreter((6,), V), source
    )
    assert transcript.hypothesis == (6,)
    assert transcript.terminated == "eos"
    assert format_program(transcript.program) == "RWRW"  # EOS write kept, tail dropped


def test_scoring_lag_clamps_unfinished_read():
    source = (3, 4, 5)
    transcript = playback(
        parse_program("RWRWRW"), TeacherInterpreter((6, 7, 8), V), source
    )
    assert scoring_lag(transcript, 3) == [1, 2, 3]
    early = playback(parse_program("RWRWRW"), TeacherInterpreter((6,), V), source)
    # one real token written after a single read, then EOS: the final write
    # commits to the full source
    assert scoring_lag(early, 3) == [3]


def test_render_trace_one_to_one():
    out = render_trace(parse_program("RWRW"), ["a", "b"], ["u", "v"])
    assert out == "src: a | b\nout: u | v"


def test_render_trace_block():
    out = render_trace(parse_program("RRWW"), ["a", "b"], ["u", "v"])
    assert out == "src: a b\nout: u v"


def test_render_trace_chunked_golden():
    program = parse_program("RWRRWWRW")
    out = render_trace(
        program, ["x1", "x2", "x3", "x4"], ["y1", "y2", "y3"], ["y1", "y2", "zz"]
    )
    assert out.splitlines() == [
        "src: x1 | x2 x3 | x4",
        "out: y1 | y2 y3 | </s>",
        "ref: y1 y2 zz",
    ]


def test_sim_config_write_cap():
    assert SimConfig().write_cap(4) == 18
    with pytest.raises(ValueError):
        SimConfig(max_target_factor=0.0, max_target_slack=0).write_cap(3)

import numpy as np
import pytest

from simtkit.corpus import (
    EOS_ID,
    SentencePair,
    SyntheticTaskConfig,
    Vocabulary,
    gen_synthetic,
    mean_length_ratio,
)
from simtkit.imitation import (
    Example,
    LinearSoftmax,
    PolicyPair,
    TrainConfig,
    clone_step,
    evaluate,
    interpreter_samples,
    load_bundle,
    new_policy_pair,
    perplexities,
    programmer_samples,
    save_bundle,
    train,
    warm_start_wait_k,
)
from simtkit.metrics import corpus_bleu
from simtkit.oracle import oracle_corpus
from simtkit.program import READ, WRITE, format_program, validity, wait_k_program
from simtkit.seeding import stream
from simtkit.simulate import TeacherInterpreter, playback


def make_task(rule="final_to_second", n_train=80, n_dev=30, seed=3, lo=3, hi=7):
    vocab = Vocabulary()
    train_pairs = gen_synthetic(SyntheticTaskConfig(8, lo, hi, rule, seed), n_train, vocab)
    dev_pairs = gen_synthetic(SyntheticTaskConfig(8, lo, hi, rule, seed + 1), n_dev, vocab)
    train_programs, _ = oracle_corpus(train_pairs)
    dev_programs, _ = oracle_corpus(dev_pairs)
    train_ex = [Example(p, a) for p, a in zip(train_pairs, train_programs)]
    dev_ex = [Example(p, a) for p, a in zip(dev_pairs, dev_programs)]
    return train_ex, dev_ex, vocab


def test_clone_step_rejects_invalid_program():
    train_ex, _, vocab = make_task()
    pair = new_policy_pair(vocab, 1.0)
    bad = Example(train_ex[0].pair, (READ, WRITE))
    with pytest.raises(ValueError, match="boundary-valid"):
        clone_step(pair, bad, TrainConfig(), stream(0, "t"))


def test_clone_step_beta_zero_loss_decreases():
    train_ex, _, vocab = make_task()
    pair = new_policy_pair(vocab, mean_length_ratio([e.pair for e in train_ex]))
    cfg = TrainConfig(beta1=0.0, beta2=0.0, beta3=0.0, alpha1=0.05, alpha2=0.05)
    rng = stream(0, "smoke")
    first = sum(
        clone_step(pair, ex, cfg, rng).interpreter for ex in train_ex
    )
    last = first
    for _ in range(3):
        last = sum(clone_step(pair, ex, cfg, rng).interpreter for ex in train_ex)
    assert np.isfinite(first) and np.isfinite(last)
    assert last < first


def test_scheduled_sampling_keeps_loss_targets_unperturbed():
    # with maximal perturbation the conditioning inputs change, but the
    # labels fed to both losses stay the gold program and gold target
    train_ex, _, vocab = make_task()
    ex = train_ex[0]
    pair = new_policy_pair(vocab, 1.0)
    x, y, a = ex.pair.source, ex.pair.target, ex.program
    intp = interpreter_samples(pair, x, y, a, y, include_terminal=True)
    labels = [label for _, _, label in intp]
    assert labels[:-1] == list(y)
    assert labels[-1] == EOS_ID
    prog = programmer_samples(pair, a, x, y, a)
    assert [label for _, _, label in prog] == [int(act) for act in a]


def test_interpreter_write_positions_match_target_length():
    train_ex, _, vocab = make_task()
    pair = new_policy_pair(vocab, 1.0)
    for ex in train_ex[:10]:
        samples = interpreter_samples(
            pair, ex.pair.source, ex.pair.target, ex.program, ex.pair.target,
            include_terminal=False,
        )
        assert len(samples) == len(ex.pair.target)


def loss_of(model, samples):
    loss = 0.0
    for idx, val, label in samples:
        loss -= np.log(model.dist(idx, val)[label])
    return loss


def test_gradients_match_finite_differences():
    train_ex, _, vocab = make_task(n_train=6, n_dev=2)
    rng = np.random.default_rng(0)
    h = 1e-6
    for probe in range(6):
        ex = train_ex[probe]
        pair = new_policy_pair(vocab, 1.3)
        pair.programmer.weights[:] = rng.normal(scale=0.5, size=pair.programmer.weights.shape)
        pair.interpreter.weights[:] = rng.normal(scale=0.5, size=pair.interpreter.weights.shape)
        x, y, a = ex.pair.source, ex.pair.target, ex.program
        for model, samples in (
            (pair.programmer, programmer_samples(pair, a, x, y, a)),
            (pair.interpreter, interpreter_samples(pair, x, y, a, y, include_terminal=True)),
        ):
            _, grad = model.loss_and_grad(samples)
            flat = model.weights.ravel()
            coords = rng.choice(flat.size, size=25, replace=False)
            fd = np.zeros(len(coords))
            for n, c in enumerate(coords):
                orig = flat[c]
                flat[c] = orig + h
                up = loss_of(model, samples)
                flat[c] = orig - h
                down = loss_of(model, samples)
                flat[c] = orig
                fd[n] = (up - down) / (2 * h)
            an = grad.ravel()[coords]
            rel = np.linalg.norm(an - fd) / max(np.linalg.norm(an), np.linalg.norm(fd), 1e-12)
            assert rel < 1e-4


def test_train_deterministic_given_seed():
    train_ex, dev_ex, vocab = make_task()
    cfg = TrainConfig(alpha1=0.05, alpha2=0.05, epochs=2, seed=9)
    a = train(train_ex, dev_ex, vocab, cfg)
    b = train(train_ex, dev_ex, vocab, cfg)
    assert np.array_equal(a.final_pair.programmer.weights, b.final_pair.programmer.weights)
    assert np.array_equal(a.final_pair.interpreter.weights, b.final_pair.interpreter.weights)
    c = train(train_ex, dev_ex, vocab, TrainConfig(alpha1=0.05, alpha2=0.05, epochs=2, seed=10))
    assert not np.array_equal(a.final_pair.interpreter.weights, c.final_pair.interpreter.weights)


def test_train_monotone_reaches_high_programmer_accuracy():
    train_ex, dev_ex, vocab = make_task(rule="monotone", n_train=150)
    cfg = TrainConfig(alpha1=0.1, alpha2=0.1, epochs=6, seed=0)
    result = train(train_ex, dev_ex, vocab, cfg)
    report = evaluate(result.pair, dev_ex)
    assert report.programmer_accuracy >= 0.95
    assert report.bleu > 50.0
    assert np.isfinite(report.al) and np.isfinite(report.dal)


def test_train_history_and_best_checkpoint():
    train_ex, dev_ex, vocab = make_task()
    cfg = TrainConfig(alpha1=0.05, alpha2=0.05, epochs=3, seed=1)
    result = train(train_ex, dev_ex, vocab, cfg)
    assert len(result.history) <= 3
    assert result.best_epoch >= 0
    ppls = perplexities(result.pair, dev_ex)
    assert all(np.isfinite(p) for p in ppls)


def test_teacher_playback_scores_100():
    _, dev_ex, vocab = make_task()
    hyps, refs = [], []
    for ex in dev_ex:
        transcript = playback(
            ex.program,
            TeacherInterpreter(ex.pair.target, len(vocab)),
            ex.pair.source,
        )
        hyps.append(list(transcript.hypothesis))
        refs.append(list(ex.pair.target))
    assert corpus_bleu(hyps, refs).score == pytest.approx(100.0)


def test_warm_start_rejects_k_zero():
    train_ex, dev_ex, vocab = make_task()
    with pytest.raises(ValueError, match="k >= 1"):
        warm_start_wait_k(train_ex, dev_ex, vocab, 0, TrainConfig(epochs=1))


def test_warm_start_runs_both_phases():
    train_ex, dev_ex, vocab = make_task(rule="monotone", n_train=60, n_dev=20)
    cfg = TrainConfig(alpha1=0.1, alpha2=0.1, epochs=2, seed=0)
    result = warm_start_wait_k(train_ex, dev_ex, vocab, 2, cfg)
    assert result.phase1.history and result.final.history
    report = evaluate(result.pair, dev_ex)
    assert np.isfinite(report.bleu)


def test_evaluate_fields_finite():
    train_ex, dev_ex, vocab = make_task()
    pair = new_policy_pair(vocab, 1.0)
    report = evaluate(pair, dev_ex[:5])
    for field in (
        "bleu", "ap", "al", "dal",
        "programmer_accuracy", "interpreter_accuracy",
        "programmer_ppl", "interpreter_ppl",
    ):
        assert np.isfinite(getattr(report, field))
    assert report.n_sentences == 5


def test_bundle_roundtrip(tmp_path):
    train_ex, dev_ex, vocab = make_task()
    cfg = TrainConfig(alpha1=0.05, alpha2=0.05, epochs=1, seed=0)
    result = train(train_ex, dev_ex, vocab, cfg, features="bag")
    path = tmp_path / "policy.json"
    save_bundle(result.pair, path)
    loaded = load_bundle(path)
    assert loaded.features == "bag"
    assert loaded.r_bar == result.pair.r_bar
    assert np.array_equal(loaded.programmer.weights, result.pair.programmer.weights)
    assert np.array_equal(loaded.interpreter.weights, result.pair.interpreter.weights)
    assert loaded.vocab.tokens == vocab.tokens
    before = evaluate(result.pair, dev_ex[:5])
    after = evaluate(loaded, dev_ex[:5])
    assert before.bleu == pytest.approx(after.bleu)


def test_bundle_rejects_unknown_format(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError, match="not a policy bundle"):
        load_bundle(path)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(beta1=1.5)
    with pytest.raises(ValueError):
        TrainConfig(alpha1=0.0)


def test_linear_softmax_update_moves_toward_label():
    model = LinearSoftmax(3, 4)
    idx = np.array([0, 2])
    val = np.array([1.0, 0.5])
    before = model.dist(idx, val)[1]
    for _ in range(50):
        model.sgd_step([(idx, val, 1)], lr=0.5)
    assert model.dist(idx, val)[1] > before
    assert model.dist(idx, val)[1] > 0.9

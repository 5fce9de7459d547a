"""Training loop: logging, determinism, best-epoch selection, divergence."""

import math

import pytest

from reranker_service.data import (
    build_pair_groups,
    read_answers,
    read_qrels,
    read_questions,
    read_splits,
)
from reranker_service.errors import InputDataError, TrainingDivergedError
from reranker_service.model import (
    EncoderConfig,
    base_metadata,
    fresh_model,
    load_checkpoint,
    save_checkpoint,
    score_encoded,
)
from reranker_service.training import (
    TrainConfig,
    average_precision_at,
    train,
    validation_map,
)
from reranker_service.vocab import base_vocabulary


@pytest.fixture(scope="module")
def toy20(toy_corpus_factory):
    return toy_corpus_factory("toy20", 20)


@pytest.fixture(scope="module")
def tiny_base(tmp_path_factory):
    out = tmp_path_factory.mktemp("trainbase") / "base"
    vocab = base_vocabulary()
    config = EncoderConfig(hidden_size=32, num_layers=1, num_heads=2,
                           intermediate_size=64, max_position=128)
    metadata = base_metadata("fs", len(vocab), config, seed=3)
    model = fresh_model(metadata["vocab_size"], config, seed=3)
    return save_checkpoint(out, model, vocab, metadata)


def load_groups(corpus, split):
    questions = read_questions(corpus.questions)
    answers = read_answers(corpus.answers)
    relevant = read_qrels(corpus.qrels)
    splits = read_splits(corpus.splits)
    return build_pair_groups(questions, answers, relevant, splits[split],
                             "fs", 4, seed=21)


def make_config(tiny_base, **overrides):
    settings = dict(base_encoder=str(tiny_base), learning_rate=3e-3,
                    batch_size=8, max_sequence_length=128, epochs=3, seed=21)
    settings.update(overrides)
    return TrainConfig(**settings)


@pytest.fixture(scope="module")
def trained(tiny_base, toy20, tmp_path_factory):
    out = tmp_path_factory.mktemp("trained") / "run"
    return train(make_config(tiny_base), load_groups(toy20, "train"),
                 load_groups(toy20, "validation"), out)


class TestConfigValidation:
    def test_learning_rate_positive(self):
        with pytest.raises(InputDataError, match="learning_rate"):
            TrainConfig(base_encoder="x", learning_rate=0.0)

    def test_batch_size_floor(self):
        with pytest.raises(InputDataError, match="batch_size"):
            TrainConfig(base_encoder="x", batch_size=1)

    def test_max_sequence_length_floor(self):
        with pytest.raises(InputDataError, match="max_sequence_length"):
            TrainConfig(base_encoder="x", max_sequence_length=4)

    def test_negatives_per_positive_positive(self):
        with pytest.raises(InputDataError, match="negatives_per_positive"):
            TrainConfig(base_encoder="x", negatives_per_positive=0)

    def test_epochs_positive(self):
        with pytest.raises(InputDataError, match="epochs"):
            TrainConfig(base_encoder="x", epochs=0)

    def test_defaults(self):
        config = TrainConfig(base_encoder="x")
        assert (config.learning_rate, config.batch_size,
                config.max_sequence_length, config.negatives_per_positive,
                config.epochs, config.seed) == (7e-6, 32, 512, 4, 2, 13)


class TestAveragePrecision:
    def test_best_first(self):
        assert average_precision_at([1.0, 0.0, 0.0]) == 1.0

    def test_best_second(self):
        assert average_precision_at([0.0, 1.0]) == 0.5

    def test_no_relevant(self):
        assert average_precision_at([0.0, 0.0]) == 0.0

    def test_cutoff_hides_late_hit(self):
        assert average_precision_at([0.0] * 10 + [1.0], k=10) == 0.0

    def test_two_relevant_on_top(self):
        assert average_precision_at([1.0, 1.0, 0.0]) == 1.0

    def test_empty_groups_rejected(self, tiny_base):
        model = load_checkpoint(tiny_base).model
        with pytest.raises(InputDataError, match="at least one"):
            validation_map(model, [])


class TestTraining:
    def test_losses_finite_and_trending_down(self, trained):
        losses = [entry["loss"] for entry in trained.training_log["steps"]]
        assert all(math.isfinite(loss) for loss in losses)
        quarter = len(losses) // 4
        early = sum(losses[:quarter]) / quarter
        late = sum(losses[-quarter:]) / quarter
        assert late < early

    def test_step_log_covers_every_batch(self, trained, toy20):
        n_pairs = sum(len(g.pairs) for g in load_groups(toy20, "train"))
        steps_per_epoch = math.ceil(n_pairs / 8)
        steps = trained.training_log["steps"]
        assert len(steps) == steps_per_epoch * 3
        assert [entry["step"] for entry in steps] == list(
            range(1, len(steps) + 1))

    def test_epoch_log_and_best_epoch(self, trained):
        epochs = trained.training_log["epochs"]
        assert [entry["epoch"] for entry in epochs] == [1, 2, 3]
        maps = [entry["validation_map"] for entry in epochs]
        best = max(range(len(maps)), key=lambda i: (maps[i], -i)) + 1
        assert trained.training_log["best_epoch"] == best
        assert trained.metadata["best_epoch"] == best
        assert trained.metadata["validation_map"] == max(maps)

    def test_metadata_records_run(self, trained, tiny_base):
        metadata = trained.metadata
        assert metadata["trained"] is True
        assert metadata["base_encoder"] == str(tiny_base)
        assert metadata["learning_rate"] == 3e-3
        assert metadata["batch_size"] == 8
        assert metadata["max_sequence_length"] == 128
        assert metadata["negatives_per_positive"] == 4
        assert metadata["epochs"] == 3
        assert metadata["seed"] == 21
        assert "non-relevant answers" in metadata["negative_sampling"]
        assert "cross-entropy" in metadata["loss"]

    def test_trained_checkpoint_reloads_and_scores(self, trained):
        from reranker_service.encoding import encode_pair, render_fs_segments

        loaded = load_checkpoint(trained.directory)
        encoded = encode_pair(
            loaded.tokenizer,
            render_fs_segments("any subject", "any description", ("probate",)),
            "probate is what applies here.",
            "fs",
            128,
        )
        assert math.isfinite(score_encoded(loaded.model, [encoded])[0])

    def test_same_seed_reproduces_step_losses(self, tiny_base, toy20,
                                              trained, tmp_path):
        repeat = train(make_config(tiny_base), load_groups(toy20, "train"),
                       load_groups(toy20, "validation"), tmp_path / "again")
        assert repeat.training_log["steps"] == trained.training_log["steps"]
        assert repeat.training_log["epochs"] == trained.training_log["epochs"]

    def test_huge_learning_rate_aborts(self, tiny_base, toy20, tmp_path):
        config = make_config(tiny_base, learning_rate=1e30, epochs=1)
        with pytest.raises(TrainingDivergedError):
            train(config, load_groups(toy20, "train"),
                  load_groups(toy20, "validation"), tmp_path / "diverged")
        assert not (tmp_path / "diverged").exists()

    def test_max_len_beyond_encoder_limit(self, tiny_base, toy20, tmp_path):
        config = make_config(tiny_base, max_sequence_length=256)
        with pytest.raises(InputDataError, match="positional limit"):
            train(config, load_groups(toy20, "train"),
                  load_groups(toy20, "validation"), tmp_path / "out")

    def test_empty_train_split_rejected(self, tiny_base, toy20, tmp_path):
        with pytest.raises(InputDataError, match="training split"):
            train(make_config(tiny_base), [],
                  load_groups(toy20, "validation"), tmp_path / "out")

    def test_empty_validation_split_rejected(self, tiny_base, toy20, tmp_path):
        with pytest.raises(InputDataError, match="validation split"):
            train(make_config(tiny_base), load_groups(toy20, "train"),
                  [], tmp_path / "out")

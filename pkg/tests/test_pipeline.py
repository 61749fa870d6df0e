"""
End-to-end tests: synthesize, preprocess, train, evaluate and generate.
"""

import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from conftest import TINY_SLOTS, tiny_experiment_config, tiny_model_config
from graphscribe.cli.commands.evaluate import evaluate_checkpoint
from graphscribe.cli.main import app
from graphscribe.cli.utils import EXIT_OK
from graphscribe.data.graph import linearize
from graphscribe.evaluation.decoding import ModelSession, beam_search, generate, greedy_decode
from graphscribe.evaluation.harness import EvaluationHarness
from graphscribe.experiments.synthetic import synthetic_corpus
from graphscribe.models.config import AblationFlags, OrderMode
from graphscribe.supervision.sidecar import build_supervision, write_sidecar
from graphscribe.supervision.tagging import COARSE
from graphscribe.training.batching import build_record_vocab
from graphscribe.training.checkpoint import load_checkpoint
from graphscribe.training.config import dump_config
from graphscribe.training.trainer import CHECKPOINT_FILE, METRICS_LOG, Trainer, read_log

runner = CliRunner()


def invoke(*args):
    result = runner.invoke(app, [str(a) for a in args])
    assert result.exit_code == EXIT_OK, result.output
    return result


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.setenv("GRAPHSCRIBE_RUN_ROOT", str(tmp_path / "runs"))
    invoke("synthesize", tmp_path / "data", "-n", "40", "--max-triplets", "3", "--seed", "5")
    invoke(
        "preprocess",
        tmp_path / "data" / "train.jsonl",
        tmp_path / "data" / "validation.jsonl",
        tmp_path / "data" / "test.jsonl",
        "-o", tmp_path / "sup",
        "--n-slots", "4",
    )
    return tmp_path


class TestPipeline:

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_train_evaluate_generate(self, workspace):
        config_path = workspace / "tiny.yaml"
        dump_config(tiny_experiment_config(epochs=6), config_path)
        sup = workspace / "sup"

        invoke(
            "train", "-c", config_path,
            "--train", sup / "train.sup.jsonl",
            "--validation", sup / "validation.sup.jsonl",
            "--run-dir", workspace / "train",
        )
        history = read_log(workspace / "train" / METRICS_LOG)
        assert len(history) == 6
        assert history[-1]["l_total"] < history[0]["l_total"]
        assert history[-1]["val_bleu4"] is not None
        checkpoint = workspace / "train" / CHECKPOINT_FILE

        invoke(
            "evaluate", checkpoint, sup / "test.sup.jsonl",
            "--run-dir", workspace / "eval", "--beam", "2", "--max-len", "12",
        )
        metrics = json.loads((workspace / "eval" / "metrics.json").read_text())
        assert metrics["count"] == 4
        assert 0.0 <= metrics["bleu4"] <= 100.0
        assert -1.0 <= metrics["order_kendall_tau"] <= 1.0

        invoke(
            "generate", checkpoint, workspace / "data" / "test.jsonl",
            "--run-dir", workspace / "gen", "--order-mode", "random", "--beam", "1", "--max-len", "8",
        )
        rows = (workspace / "gen" / "hypotheses.jsonl").read_text().splitlines()
        assert len(rows) == 4

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_synthetic_order_ablation(self, workspace):
        config_path = workspace / "tiny.yaml"
        dump_config(tiny_experiment_config(epochs=1), config_path)
        out = workspace / "ablate"
        invoke(
            "ablate", "order", "-c", config_path, "--synthetic", "20", "--seeds", "1",
            "--variant", "gold", "--variant", "random", "--beam", "1", "-o", out,
        )
        summary = (out / "ablation_order_summary.csv").read_text().splitlines()
        assert summary[0].startswith("variant,")
        assert [line.split(",")[0] for line in summary[1:]] == ["random", "gold"]
        assert (out / "manifest.json").exists()


def overfit_config():
    config = tiny_experiment_config(epochs=200, learning_rate=2e-3)
    model = tiny_model_config(d_model=64, n_heads=4, d_ff=128, max_target_len=48)
    train = config.train.model_copy(update={"ablation": AblationFlags(order_mode=OrderMode.GOLD)})
    return config.model_copy(update={"model": model, "train": train})


@pytest.fixture(scope="module")
def overfit(tmp_path_factory):
    """A model trained to memorise 30 gold-ordered examples."""
    root = tmp_path_factory.mktemp("overfit")
    records = [
        build_supervision(e, TINY_SLOTS, "lexicon", COARSE)
        for e in synthetic_corpus(30, seed=11, max_triplets=3, entity_pool_size=80)
    ]
    vocab = build_record_vocab(records)
    result = Trainer(overfit_config(), vocab, COARSE, root / "train").fit(records, show_progress=False)
    split = root / "fixture.sup.jsonl"
    write_sidecar(records, split, TINY_SLOTS)
    return result, load_checkpoint(result.checkpoint), records, split, root


class TestOverfitFixture:

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_token_loss_falls_by_ninety_percent(self, overfit):
        result = overfit[0]
        assert len(result.history) == 200
        first, last = result.history[0].l_token, result.history[-1].l_token
        assert last <= 0.1 * first

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_gold_order_reproduces_the_references(self, overfit):
        _, loaded, records, _, _ = overfit
        gold = EvaluationHarness(loaded.model, loaded.vocab, order_mode="gold", beam=1, max_len=48).evaluate(records)
        assert gold.bleu4 > 95.0
        assert gold.order_exact_match == pytest.approx(100.0)

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_random_order_is_no_better_than_gold(self, overfit):
        _, loaded, records, _, _ = overfit
        scores = {
            mode: EvaluationHarness(loaded.model, loaded.vocab, order_mode=mode, beam=1, max_len=48)
            .evaluate(records).bleu4
            for mode in ("gold", "random")
        }
        assert scores["random"] <= scores["gold"]

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_beam_of_one_is_greedy_on_every_example(self, overfit):
        _, loaded, records, _, _ = overfit
        loaded.model.eval()
        for record in records:
            lin = linearize(record.graph, record.order_label.resized(TINY_SLOTS), loaded.vocab)
            greedy = greedy_decode(ModelSession(loaded.model, lin, loaded.vocab, max_len=48), 48)
            beam = beam_search(ModelSession(loaded.model, lin, loaded.vocab, max_len=48), 1, 48).best
            assert beam.tokens == greedy.tokens
            assert beam.score == pytest.approx(greedy.score, abs=1e-5)

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_wider_beam_scores_at_least_greedy(self, overfit):
        _, loaded, records, _, _ = overfit
        for record in records[:5]:
            greedy, wide = [
                generate(loaded.model, record.graph, loaded.vocab, "gold", beam=beam, max_len=48,
                         gold=record.order_label.resized(TINY_SLOTS))
                for beam in (1, 5)
            ]
            # one trace entry per decoded token, <eos> included
            assert wide.score / len(wide.trace) >= greedy.score / len(greedy.trace) - 1e-5

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_evaluate_report_is_reproducible(self, overfit):
        result, loaded, records, split, root = overfit
        reports = [
            evaluate_checkpoint(result.checkpoint, split, run_dir=root / name, order_mode="gold", beam=2, max_len=48)
            for name in ("eval-0", "eval-1")
        ]
        first = (root / "eval-0" / "metrics.json").read_bytes()
        assert first == (root / "eval-1" / "metrics.json").read_bytes()

        golden = EvaluationHarness(loaded.model, loaded.vocab, order_mode="gold", beam=2, max_len=48).evaluate(records)
        assert json.loads(first) == golden.to_dict()
        assert reports[0] == golden


class TestAblationDirections:

    @pytest.fixture
    def config_path(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GRAPHSCRIBE_RUN_ROOT", str(tmp_path / "runs"))
        config = overfit_config()
        config = config.model_copy(update={"train": config.train.model_copy(update={"epochs": 40, "batch_size": 16})})
        path = tmp_path / "ablation.yaml"
        dump_config(config, path)
        return path

    def mean_bleu(self, config_path, suite, variants, output):
        args = ["ablate", suite, "-c", config_path, "--synthetic", "300", "--seeds", "1,2,3", "--beam", "1", "-o", output]
        for variant in variants:
            args += ["--variant", variant]
        invoke(*args)
        summary = pd.read_csv(output / f"ablation_{suite}_summary.csv").set_index("variant")
        return summary["bleu4_mean"]

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_copying_beats_pure_generation(self, config_path, tmp_path):
        bleu = self.mean_bleu(config_path, "copy", ["full", "no_cp"], tmp_path / "copy")
        assert bleu["full"] > bleu["no_cp"]

    @pytest.mark.e2e
    @pytest.mark.slow
    def test_gold_order_beats_random_order(self, config_path, tmp_path):
        bleu = self.mean_bleu(config_path, "order", ["gold", "random"], tmp_path / "order")
        assert bleu["gold"] > bleu["random"]

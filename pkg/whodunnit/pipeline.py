"""
Pipeline stages behind the CLI subcommands.

Stages talk to each other only through files: the interchange corpus, the
feature cache, checkpoints and prediction traces.
"""
import csv
import hashlib
import json
import logging
import platform
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy

from whodunnit import __version__
from whodunnit.align import allocate_timestamps, dtw_align, utterance_tokens, write_alignment_report
from whodunnit.baselines import DEFAULT_LEXICON, CrfTagger, MlpTagger, load_lexicon, pro_predict
from whodunnit.config import RunConfig
from whodunnit.corpus import (
    SentenceUnit,
    build_cases,
    corpus_stats,
    parse_screenplay,
    parse_srt,
    read_case_index,
    read_interchange,
    tokenize,
    write_interchange,
)
from whodunnit.corpus.stats import stats_rows_for_csv
from whodunnit.errors import (
    AlignmentError,
    ConfigError,
    CorpusError,
    EvaluationError,
    FeatureCacheError,
    FeatureError,
)
from whodunnit.evaluation import (
    PredictionTrace,
    SplitPlan,
    build_trace,
    make_splits,
    read_traces,
    write_report,
    write_traces,
)
from whodunnit.nn import LstmTagger, ModelConfig, Tagger, load_checkpoint, save_checkpoint, train, write_epoch_log
from whodunnit.nn.model import CaseBundles, gold_labels
from whodunnit.signal import (
    MfccConfig,
    build_vocab,
    featurize_episode,
    group_by_case,
    load_visual_store,
    load_wav,
    read_feature_cache,
    write_feature_cache,
)
from whodunnit.signal.constants import ACOUSTIC_DIM
from whodunnit.synthgen import bayes_rate, generate, write_dataset


logger = logging.getLogger(__name__)

CORPUS_FILE = "corpus.jsonl"
SPLITS_FILE = "splits.json"
VOCAB_FILE = "vocab.txt"
EMBEDDINGS_FILE = "embeddings.wdnn"
STATS_FILE = "corpus_stats.csv"
CACHE_SUFFIX = ".wdf"


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def input_digests(paths: Iterable[Path]) -> Dict[str, str]:
    """sha256 of every input file; directories contribute each file below them."""
    digests = {}
    for path in paths:
        path = Path(path)
        files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
        for file in files:
            digests[str(file)] = _sha256(file)
    return digests


def write_manifest(
    directory: Path,
    command: str,
    config: RunConfig,
    inputs: Iterable[Path] = (),
    extra: Optional[Mapping[str, Any]] = None,
    digests: Optional[Mapping[str, str]] = None,
) -> Path:
    """
    Write ``manifest-<command>.json`` with the config echo, versions and input digests.

    Pass digests taken before the command ran when it overwrites one of its inputs.
    """
    manifest = {
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.to_dict(),
        "versions": {
            "whodunnit": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "inputs": dict(digests) if digests is not None else input_digests(inputs),
    }
    if extra:
        manifest.update(extra)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"manifest-{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Wrote manifest %s", path)
    return path


def _by_episode(units: Sequence[SentenceUnit]) -> Dict[str, List[SentenceUnit]]:
    episodes: Dict[str, List[SentenceUnit]] = defaultdict(list)
    for unit in units:
        episodes[unit.episode_id].append(unit)
    for episode_units in episodes.values():
        episode_units.sort(key=lambda unit: unit.seq_index)
    return dict(sorted(episodes.items()))


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc


# parse / align / featurize

def parse_stage(config: RunConfig) -> List[Path]:
    """Parse every ``<episode>.txt`` screenplay into one interchange corpus."""
    screenplay_dir = config.path("screenplay_dir")
    files = sorted(screenplay_dir.glob("*.txt"))
    if not files:
        logger.error("No screenplays (*.txt) in %s", screenplay_dir)
        raise CorpusError(f"no screenplay files in {screenplay_dir}")

    units: List[SentenceUnit] = []
    for path in files:
        episode_units = parse_screenplay(_read_text(path), path.stem)
        logger.debug("Parsed %s: %d sentences", path.name, len(episode_units))
        units.extend(episode_units)

    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    corpus = output_dir / CORPUS_FILE
    write_interchange(corpus, units)
    write_manifest(output_dir, "parse", config, [screenplay_dir])
    logger.info("Parsed %d screenplays into %d sentences: %s", len(files), len(units), corpus)
    return [corpus]


def _episode_end_ms(config: RunConfig, episode_id: str, cue_end_ms: int) -> int:
    if config.audio_dir:
        wav = Path(config.audio_dir) / f"{episode_id}.wav"
        if wav.exists():
            return max(cue_end_ms, int(load_wav(wav).duration_ms))
    return cue_end_ms


def align_stage(config: RunConfig) -> List[Path]:
    """
    Time-stamp every sentence of the corpus from ``<episode>.srt`` captions.

    The episode timeline ends at the audio track's end when its wav is
    available and at the last cue otherwise.
    """
    corpus = config.path("corpus")
    captions_dir = config.path("captions_dir")
    output_dir = Path(config.output_dir)
    digests = input_digests([corpus, captions_dir])

    timed: List[SentenceUnit] = []
    written = []
    for episode_id, units in _by_episode(read_interchange(corpus)).items():
        srt = captions_dir / f"{episode_id}.srt"
        if not srt.exists():
            logger.error("Missing captions for episode %s: %s", episode_id, srt)
            raise AlignmentError(f"no captions for episode {episode_id} ({srt})")
        cues = parse_srt(_read_text(srt))
        if not cues:
            raise AlignmentError(f"{srt} holds no caption cues")
        alignment = dtw_align(utterance_tokens(units), [tokenize(cue.text) for cue in cues],
                              skip_penalty=config.skip_penalty)
        report = output_dir / "alignment" / f"{episode_id}.csv"
        write_alignment_report(report, alignment)
        written.append(report)
        end_ms = _episode_end_ms(config, episode_id, cues[-1].end_ms)
        timed.extend(allocate_timestamps(units, alignment, cues, 0, end_ms).units)

    output_dir.mkdir(parents=True, exist_ok=True)
    timed_corpus = output_dir / CORPUS_FILE
    write_interchange(timed_corpus, timed)
    write_manifest(output_dir, "align", config, digests=digests)
    logger.info("Aligned %d sentences: %s", len(timed), timed_corpus)
    return [timed_corpus] + written


def _crime_types(config: RunConfig):
    return read_case_index(config.path("cases")) if config.cases else {}


def featurize_stage(config: RunConfig) -> List[Path]:
    """
    Build the vocabulary, the initial embedding table and one feature cache
    per episode that holds case sentences.
    """
    corpus = config.path("corpus")
    embeddings = config.path("embeddings")
    audio_dir = config.path("audio_dir")
    visual_dir = config.path("visual_dir")
    cache_dir = Path(config.cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)

    units = read_interchange(corpus)
    vocab, table = build_vocab((unit.tokens for unit in units), embeddings,
                               seed=config.seed, dim=config.embedding_dim)
    vocab.write(cache_dir / VOCAB_FILE)
    save_checkpoint(cache_dir / EMBEDDINGS_FILE, {"embedding": table},
                    {"kind": "embeddings", "vocab_size": len(vocab), "embedding_dim": config.embedding_dim})
    written = [cache_dir / VOCAB_FILE, cache_dir / EMBEDDINGS_FILE]

    mfcc_config = MfccConfig()
    for episode_id, episode_units in _by_episode(units).items():
        if all(unit.case_id is None for unit in episode_units):
            continue
        track = load_wav(audio_dir / f"{episode_id}.wav")
        store = load_visual_store(visual_dir / f"{episode_id}.visual", config.visual_dim)
        bundles = featurize_episode(episode_units, vocab, track, store, config.max_tokens, mfcc_config)
        path = cache_dir / f"{episode_id}{CACHE_SUFFIX}"
        write_feature_cache(path, episode_id, bundles)
        written.append(path)

    cases = build_cases(units, _crime_types(config))
    if cases:
        table_rows = stats_rows_for_csv(corpus_stats(cases))
        stats = cache_dir / STATS_FILE
        with stats.open("w", newline="", encoding="utf-8") as handle:
            csv.writer(handle, lineterminator="\n").writerows(table_rows)
        written.append(stats)
    inputs = [corpus, embeddings, audio_dir, visual_dir] + ([Path(config.cases)] if config.cases else [])
    write_manifest(cache_dir, "featurize", config, inputs)
    logger.info("Featurized %d cases into %s", len(cases), cache_dir)
    return written


# synth

def synth_stage(config: RunConfig) -> List[Path]:
    """Generate a synthetic dataset into output_dir and log its Bayes rates."""
    dataset = generate(config.synth_spec())
    output_dir = Path(config.output_dir)
    write_dataset(dataset, output_dir)
    rates = {
        "memoryless": bayes_rate(dataset, memoryless=True),
        "full_history": bayes_rate(dataset, memoryless=False),
    }
    logger.info("Bayes rate: memoryless %.4f, full history %.4f",
                rates["memoryless"], rates["full_history"])
    write_manifest(output_dir, "synth", config, extra={"bayes_rate": rates})
    return [output_dir]


# train / eval

def load_cases(cache_dir: Path, max_tokens: Optional[int] = None) -> Dict[str, CaseBundles]:
    """
    Every case in a feature cache directory, keyed by case key.

    Raises:
        FeatureCacheError: The directory holds no cache files
    """
    paths = sorted(Path(cache_dir).glob(f"*{CACHE_SUFFIX}"))
    if not paths:
        logger.error("No feature caches in %s", cache_dir)
        raise FeatureCacheError(f"no {CACHE_SUFFIX} files in {cache_dir}; run featurize first")
    bundles = [bundle for path in paths for bundle in read_feature_cache(path, max_tokens)]
    return {case[0].case_key: case for case in group_by_case(bundles)}


def load_embedding_table(cache_dir: Path) -> np.ndarray:
    params, _ = load_checkpoint(Path(cache_dir) / EMBEDDINGS_FILE)
    if "embedding" not in params:
        raise FeatureError(f"{cache_dir}: embeddings file holds no embedding table")
    return params["embedding"]


def split_plan(config: RunConfig, case_keys: Iterable[str]) -> SplitPlan:
    return make_splits(sorted(case_keys), config.seed, held_out=config.held_out,
                       n_folds=config.n_folds, test_per_fold=config.test_per_fold)


def build_tagger(config: RunConfig, embeddings: np.ndarray, visual_dim: int,
                 acoustic_dim: int = ACOUSTIC_DIM) -> Tagger:
    """The trainable tagger a config selects, initialized from the embedding table."""
    if config.model == "crf":
        return CrfTagger(embeddings, n_tokens=config.crf_tokens, l2=config.crf_l2,
                         modalities=config.crf_modality_set, visual_dim=visual_dim,
                         acoustic_dim=acoustic_dim)
    if config.model not in ("lstm", "mlp"):
        raise ConfigError(f"model {config.model!r} has no trainable parameters")
    model_config = ModelConfig(
        vocab_size=embeddings.shape[0],
        embedding_dim=embeddings.shape[1],
        conv_widths=config.conv_width_tuple,
        conv_channels=config.conv_channels,
        visual_dim=visual_dim,
        acoustic_dim=acoustic_dim,
        fusion_dim=config.fusion_dim,
        hidden_dim=config.hidden_dim,
        modalities=config.modality_set,
    )
    tagger_class = LstmTagger if config.model == "lstm" else MlpTagger
    return tagger_class(model_config, embeddings=embeddings, dropout=config.dropout)


def _checkpoint_path(config: RunConfig, fold: int, run: int) -> Path:
    return Path(config.checkpoint_dir) / f"{config.tag}-fold{fold}-run{run}.wdnn"


def _prepare(config: RunConfig) -> Tuple[Dict[str, CaseBundles], SplitPlan, Tagger]:
    cache_dir = config.path("cache_dir")
    cases = load_cases(cache_dir, config.max_tokens)
    first = next(iter(cases.values()))[0]
    tagger = build_tagger(config, load_embedding_table(cache_dir), visual_dim=len(first.x_v),
                          acoustic_dim=len(first.x_a))
    return cases, split_plan(config, cases), tagger


def train_stage(config: RunConfig) -> List[Path]:
    """
    Train config.runs models per cross-validation fold.

    Writes one checkpoint per (fold, run) holding the run's best epoch,
    an epoch log per fold and the split plan.
    """
    if config.model == "pro":
        raise ConfigError("the pro baseline has no parameters to train; run eval --model pro")
    cases, plan, tagger = _prepare(config)
    train_config = config.train_config()
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    splits = output_dir / SPLITS_FILE
    splits.write_text(json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written = [splits]

    for fold_index, fold in enumerate(plan.folds):
        logger.info("Training %s on fold %d (%d train / %d test cases)",
                    config.tag, fold_index, len(fold.train), len(fold.test))
        result = train(tagger, [cases[key] for key in fold.train], [cases[key] for key in fold.test],
                       train_config)
        for run in result.runs:
            echo = dict(tagger.config_echo(), fold=fold_index, run=run.run,
                        best_epoch=run.best_epoch, best_f1=run.best_f1)
            path = _checkpoint_path(config, fold_index, run.run)
            save_checkpoint(path, run.params, echo)
            written.append(path)
        log = output_dir / f"epochs-{config.tag}-fold{fold_index}.csv"
        write_epoch_log(log, result.epoch_records)
        written.append(log)

    write_manifest(output_dir, "train", config, [config.path("cache_dir")])
    return written


def _model_traces(config: RunConfig) -> List[PredictionTrace]:
    cases, plan, tagger = _prepare(config)
    labels = {"model": config.model, "modalities": config.crf_modality_set.label
              if config.model == "crf" else config.modality_set.label}
    traces = []
    for fold_index, fold in enumerate(plan.folds):
        for run in range(config.runs):
            params, _ = load_checkpoint(_checkpoint_path(config, fold_index, run))
            tagger.check_params(params)
            for partition, keys in (("cv", fold.test), ("heldout", plan.held_out)):
                for key in keys:
                    probabilities, predicted = tagger.predict_case(params, cases[key])
                    traces.append(build_trace(key, probabilities, predicted, gold_labels(cases[key]),
                                              partition=partition, fold=fold_index, run=run, **labels))
    return traces


def _pro_traces(config: RunConfig) -> List[PredictionTrace]:
    lexicon = load_lexicon(config.path("lexicon")) if config.lexicon else DEFAULT_LEXICON
    cases = {case.key: case for case in build_cases(read_interchange(config.path("corpus")))}
    if not cases:
        raise EvaluationError("the corpus holds no annotated cases")
    plan = split_plan(config, cases)
    traces = []
    for fold_index, fold in enumerate(plan.folds):
        for partition, keys in (("cv", fold.test), ("heldout", plan.held_out)):
            for key in keys:
                units = cases[key].sentences
                predicted = pro_predict(units, lexicon)
                traces.append(build_trace(key, [float(y) for y in predicted], predicted,
                                          [unit.gold_label for unit in units],
                                          model="pro", modalities="T", partition=partition,
                                          fold=fold_index, run=0))
    return traces


def _trace_files(output_dir: Path) -> List[Path]:
    return sorted(Path(output_dir).glob("traces-*.jsonl"))


def _all_traces(output_dir: Path) -> List[PredictionTrace]:
    return [trace for path in _trace_files(output_dir) for trace in read_traces(path)]


def eval_stage(config: RunConfig) -> List[Path]:
    """
    Predict every cross-validation test fold and the held-out cases, then
    regenerate the report over every trace file in output_dir.

    PRO reads the interchange corpus and needs no checkpoint.
    """
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    if config.model == "pro":
        traces = _pro_traces(config)
        inputs = [config.path("corpus")]
    else:
        traces = _model_traces(config)
        inputs = [config.path("cache_dir"), Path(config.checkpoint_dir)]
    path = output_dir / f"traces-{config.tag}.jsonl"
    write_traces(path, traces)
    logger.info("Wrote %d traces to %s", len(traces), path)
    write_report(output_dir, _all_traces(output_dir), config.n_intervals)
    write_manifest(output_dir, "eval", config, inputs)
    return [path]


def report_stage(config: RunConfig) -> List[Path]:
    """Regenerate the report CSVs from the persisted traces."""
    output_dir = config.path("output_dir")
    files = _trace_files(output_dir)
    if not files:
        logger.error("No traces-*.jsonl files in %s", output_dir)
        raise EvaluationError(f"no prediction traces in {output_dir}; run eval first")
    write_report(output_dir, _all_traces(output_dir), config.n_intervals)
    write_manifest(output_dir, "report", config, files)
    return [output_dir / "summary.csv"]


STAGES = {
    "parse": parse_stage,
    "align": align_stage,
    "featurize": featurize_stage,
    "synth": synth_stage,
    "train": train_stage,
    "eval": eval_stage,
    "report": report_stage,
}

"""Command-line pipeline driver.

Subcommands: count, pmi, mask, derive-rates, approx-mask, compare,
stats.  Settings come from defaults, then an optional JSON config file,
then flags (flags win).  Every artifact gets a ``<path>.meta.json``
sidecar recording tool version, effective config hash, and seed; binary
formats themselves stay byte-canonical so identical inputs reproduce
identical files at any worker count.

Exit codes: 1 usage, 2 I/O (missing/unreadable artifacts), 3 malformed
data (bad magic/version, contract violations).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .baselines import (
    KIND_ORDER,
    ComparisonReport,
    build_span_vocabulary,
    compare_strategies,
    make_strategy,
    write_comparison_tsv,
)
from .cooccur import (
    COUNTS_MAGIC,
    CooccurrenceTable,
    count_token_arrays,
    read_counts,
    write_counts,
)
from .corpus import Document, Vocabulary, count_documents, load_vocabulary, stream_corpus
from .errors import PipelineError
from .masker import (
    apply_corruption,
    choose_masking,
    decision_to_json,
    eligible_positions,
    read_decisions,
)
from .parallel import chunked, get_context, map_chunks
from .pmi import PMI_MAGIC, build_pmi, read_pmi, write_pmi
from .rates import (
    RATES_MAGIC,
    RateTable,
    approximate_mask,
    convergence_delta,
    read_rates_binary,
    write_rates_binary,
    write_rates_tsv,
)
from .seeds import derive_seed

_CHUNK_DOCS = 1024


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad args by default; this pipeline reserves 2
    # for I/O problems, so route usage errors through exit code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class PipelineConfig:
    corpus: list[str] = field(default_factory=list)
    vocab: str | None = None
    window: int = 11
    pmi_vocab_size: int = 100_000
    min_count: int = 5
    s: int = 30
    rate: float = 0.15
    p_mask: float = 0.8
    p_random: float = 0.1
    p_keep: float = 0.1
    p_geo: float = 0.2
    max_span: int = 10
    span_top_m: int = 100_000
    span_min_count: int = 5
    seed: int = 0
    workers: int = 1
    epoch: int = 0
    rate_fraction: float = 0.01
    convergence_threshold: float = 0.008
    checkpoint_interval: int = 1000
    delta_mode: str = "absolute"
    rescale: bool = False

    def validate(self) -> None:
        if self.window < 2:
            raise UsageError("window must be >= 2")
        if not 0.0 < self.rate < 1.0:
            raise UsageError("rate must be in (0, 1)")
        if self.s < 1:
            raise UsageError("s must be >= 1")
        if self.min_count < 1 or self.span_min_count < 1:
            raise UsageError("min counts must be >= 1")
        if self.pmi_vocab_size < 1 or self.span_top_m < 1:
            raise UsageError("vocabulary sizes must be >= 1")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        if not 0.0 < self.rate_fraction <= 1.0:
            raise UsageError("rate-fraction must be in (0, 1]")
        if self.convergence_threshold < 0:
            raise UsageError("convergence-threshold must be >= 0")
        if self.checkpoint_interval < 1:
            raise UsageError("checkpoint-interval must be >= 1")
        if self.delta_mode not in ("absolute", "relative"):
            raise UsageError("delta-mode must be absolute or relative")
        if min(self.p_mask, self.p_random, self.p_keep) < 0 or abs(
            self.p_mask + self.p_random + self.p_keep - 1.0
        ) > 1e-9:
            raise UsageError("corruption policy must be non-negative and sum to 1")

    def config_hash(self) -> str:
        # workers only parallelizes; it never changes results, so two
        # runs differing only in worker count hash identically
        fields = dataclasses.asdict(self)
        del fields["workers"]
        blob = json.dumps(fields, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def policy(self) -> tuple[float, float, float]:
        return (self.p_mask, self.p_random, self.p_keep)

    def stage_seed(self) -> int:
        # fold the epoch into the seed so every epoch re-draws; epoch 0
        # keeps the raw seed so single-shot runs are easy to reproduce
        return self.seed if self.epoch == 0 else derive_seed(self.seed, 999, self.epoch)


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(PipelineConfig)}


def build_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {args.config}: {exc}") from exc
        unknown = set(data) - _CONFIG_FIELDS
        if unknown:
            raise UsageError(f"config file {args.config}: unknown keys {sorted(unknown)}")
        for key, value in data.items():
            setattr(cfg, key, value)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None and value != []:
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


def write_meta(path, cfg: PipelineConfig, command: str, **extra) -> None:
    meta = {
        "tool": "pmimask",
        "version": __version__,
        "command": command,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
    } | extra
    with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")


def _require_corpus(cfg: PipelineConfig) -> None:
    if not cfg.corpus:
        raise UsageError("no corpus path given (--corpus or config)")
    if not cfg.vocab:
        raise UsageError("no vocabulary path given (--vocab or config)")


def _load_inputs(cfg: PipelineConfig) -> Vocabulary:
    _require_corpus(cfg)
    return load_vocabulary(cfg.vocab)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- count

def _count_chunk(token_arrays: list[np.ndarray]):
    window, vocab_size = get_context()
    t = count_token_arrays(token_arrays, window, vocab_size)
    keys = np.fromiter(t.pair_counts.keys(), dtype=np.int64, count=t.n_pairs)
    keys.sort()
    counts = np.fromiter((t.pair_counts[int(k)] for k in keys), dtype=np.int64, count=len(keys))
    return t.unigram, keys, counts, t.total_pairs


def cmd_count(args) -> int:
    cfg = build_config(args)
    vocab = _load_inputs(cfg)
    started = time.monotonic()
    table = CooccurrenceTable.empty(vocab.size, cfg.window)
    n_docs = 0
    n_tokens = 0

    def doc_arrays():
        nonlocal n_docs, n_tokens
        for doc in stream_corpus(cfg.corpus, vocab):
            n_docs += 1
            n_tokens += len(doc.tokens)
            yield doc.tokens

    chunks = chunked(doc_arrays(), _CHUNK_DOCS)
    for unigram, keys, counts, total in map_chunks(
        _count_chunk, chunks, cfg.workers, ctx=(cfg.window, vocab.size)
    ):
        table.unigram += unigram
        pairs = table.pair_counts
        for key, c in zip(keys.tolist(), counts.tolist()):
            pairs[key] = pairs.get(key, 0) + c
        table.total_pairs += total
    write_counts(table, args.out)
    write_meta(args.out, cfg, "count", window=cfg.window, n_pairs=table.n_pairs)
    elapsed = max(time.monotonic() - started, 1e-9)
    _progress(
        f"count: {n_docs} docs, {n_tokens} tokens in {elapsed:.1f}s "
        f"({n_tokens / elapsed:.0f} tokens/s)"
    )
    print(f"n_pairs\t{table.n_pairs}")
    print(f"total_pairs\t{table.total_pairs}")
    return 0


# ------------------------------------------------------------------ pmi

def cmd_pmi(args) -> int:
    cfg = build_config(args)
    counts = read_counts(args.counts)
    table = build_pmi(counts, cfg.pmi_vocab_size, cfg.min_count)
    write_pmi(table, args.out)
    write_meta(args.out, cfg, "pmi", n_values=table.n_values)
    in_vocab = sorted(table.pmi_vocab)
    cutoff = int(counts.unigram[in_vocab].min()) if in_vocab else 0
    print(f"cutoff_frequency\t{cutoff}")
    print(f"n_values\t{table.n_values}")
    return 0


# ----------------------------------------------------------------- mask

def _mask_chunk(docs: list[Document]):
    ctx = get_context()
    out = []
    for doc in docs:
        decision = choose_masking(
            doc, ctx["s"], ctx["rate"], ctx["pmi"], ctx["seed"], ctx["special_ids"]
        )
        if decision is None:
            out.append((doc.doc_id, None, doc.tokens, [], 0))
            continue
        corrupted, labels = apply_corruption(
            doc, decision.chosen.positions, ctx["vocab"], ctx["policy"], ctx["seed"]
        )
        n_elig = eligible_positions(doc.tokens, ctx["special_ids"]).size
        out.append((doc.doc_id, decision_to_json(decision), corrupted, labels, n_elig))
    return out


def cmd_mask(args) -> int:
    cfg = build_config(args)
    vocab = _load_inputs(cfg)
    pmi = read_pmi(args.pmi)
    vocab.require_mask()
    seed = cfg.stage_seed()
    ctx = {
        "s": cfg.s,
        "rate": cfg.rate,
        "pmi": pmi,
        "seed": seed,
        "special_ids": vocab.special_ids,
        "vocab": vocab,
        "policy": cfg.policy,
    }
    total_masked = 0
    total_elig = 0
    n_docs = 0
    started = time.monotonic()
    with open(args.out_decisions, "w", encoding="utf-8") as dec_fh, open(
        args.out_corpus, "w", encoding="utf-8"
    ) as cor_fh, open(args.out_labels, "w", encoding="utf-8") as lab_fh:
        lab_fh.write("doc_id\tposition\toriginal_id\n")
        chunks = chunked(stream_corpus(cfg.corpus, vocab), _CHUNK_DOCS)
        for block in map_chunks(_mask_chunk, chunks, cfg.workers, ctx=ctx):
            for doc_id, dec_line, corrupted, labels, n_elig in block:
                n_docs += 1
                if dec_line is not None:
                    dec_fh.write(dec_line)
                    dec_fh.write("\n")
                    total_masked += len(labels)
                    total_elig += n_elig
                cor_fh.write(vocab.to_line(corrupted.tolist()))
                cor_fh.write("\n")
                for pos, orig in labels:
                    lab_fh.write(f"{doc_id}\t{pos}\t{orig}\n")
    for path in (args.out_decisions, args.out_corpus, args.out_labels):
        write_meta(path, cfg, "mask", epoch=cfg.epoch)
    realized = total_masked / total_elig if total_elig else 0.0
    _progress(f"mask: {n_docs} docs in {time.monotonic() - started:.1f}s")
    print(f"realized_rate\t{realized:.6f}")
    return 0


# ---------------------------------------------------------- derive-rates

def _rates_chunk(docs: list[Document]):
    ctx = get_context()
    vocab_size = ctx["vocab_size"]
    occ = np.zeros(vocab_size, dtype=np.int64)
    masked = np.zeros(vocab_size, dtype=np.int64)
    special = np.array(sorted(ctx["special_ids"]), dtype=np.int64)
    n_done = 0
    for doc in docs:
        decision = choose_masking(
            doc, ctx["s"], ctx["rate"], ctx["pmi"], ctx["seed"], ctx["special_ids"]
        )
        if decision is None:
            continue
        elig = doc.tokens if special.size == 0 else doc.tokens[~np.isin(doc.tokens, special)]
        np.add.at(occ, elig, 1)
        np.add.at(masked, doc.tokens[decision.chosen.positions], 1)
        n_done += 1
    return occ, masked, n_done


def cmd_derive_rates(args) -> int:
    cfg = build_config(args)
    vocab = _load_inputs(cfg)
    pmi = read_pmi(args.pmi)
    total_docs = sum(count_documents(p) for p in cfg.corpus)
    budget = max(1, math.ceil(cfg.rate_fraction * total_docs)) if total_docs else 0
    seed = cfg.stage_seed()
    ctx = {
        "s": cfg.s,
        "rate": cfg.rate,
        "pmi": pmi,
        "seed": seed,
        "special_ids": vocab.special_ids,
        "vocab_size": vocab.size,
    }
    table = RateTable.empty(vocab.size, cfg.rate)
    log: list[tuple[int, float]] = []
    prev = table.copy()
    docs = stream_corpus(cfg.corpus, vocab)
    processed = 0
    stopped_early = False
    started = time.monotonic()
    while processed < budget:
        batch_n = min(cfg.checkpoint_interval, budget - processed)
        batch = []
        for doc in docs:
            batch.append(doc)
            if len(batch) == batch_n:
                break
        if not batch:
            break
        chunks = chunked(batch, max(1, min(_CHUNK_DOCS, math.ceil(len(batch) / max(cfg.workers, 1)))))
        for occ, masked, n_done in map_chunks(_rates_chunk, chunks, cfg.workers, ctx=ctx):
            table.occurrences += occ
            table.masked_count += masked
            table.docs_processed += n_done
        processed += len(batch)
        try:
            delta = convergence_delta(prev, table, cfg.delta_mode)
        except PipelineError:
            delta = float("nan")
        log.append((processed, delta))
        prev = table.copy()
        if not math.isnan(delta) and delta < cfg.convergence_threshold:
            stopped_early = processed < budget
            break
    write_rates_tsv(table, vocab, args.out_rates_tsv)
    write_rates_binary(table, args.out_rates_bin)
    with open(args.out_convergence, "w", encoding="utf-8") as fh:
        fh.write(f"# tool\tpmimask {__version__}\n")
        fh.write(f"# config_hash\t{cfg.config_hash()}\n")
        fh.write(f"# seed\t{cfg.seed}\n")
        fh.write(f"# total_docs\t{total_docs}\n")
        fh.write("docs_processed\tdelta\n")
        for docs_done, delta in log:
            fh.write(f"{docs_done}\t{delta!r}\n")
    for path in (args.out_rates_tsv, args.out_rates_bin, args.out_convergence):
        write_meta(path, cfg, "derive-rates", docs_processed=table.docs_processed)
    _progress(
        f"derive-rates: {processed}/{total_docs} docs in {time.monotonic() - started:.1f}s"
        + (" (stopped at threshold)" if stopped_early else "")
    )
    print(f"docs_processed\t{processed}")
    print(f"overall_rate\t{table.overall_rate():.6f}")
    return 0


# ------------------------------------------------------------ approx-mask

def _approx_chunk(docs: list[Document]):
    ctx = get_context()
    out = []
    for doc in docs:
        positions = approximate_mask(
            doc, ctx["rates"], ctx["seed"], ctx["special_ids"], ctx["epoch"], ctx["rescale"]
        )
        if positions is None:
            out.append((doc.doc_id, None, doc.tokens, [], 0))
            continue
        corrupted, labels = apply_corruption(doc, positions, ctx["vocab"], ctx["policy"], ctx["seed"])
        n_elig = eligible_positions(doc.tokens, ctx["special_ids"]).size
        line = json.dumps(
            {
                "doc_id": doc.doc_id,
                "masked_positions": [int(p) for p in positions],
                "score": None,
                "candidate_scores": [],
                "seed_used": derive_seed(ctx["seed"], 2, ctx["epoch"], doc.doc_id),
            }
        )
        out.append((doc.doc_id, line, corrupted, labels, n_elig))
    return out


def cmd_approx_mask(args) -> int:
    cfg = build_config(args)
    vocab = _load_inputs(cfg)
    rates = read_rates_binary(args.rates)
    vocab.require_mask()
    ctx = {
        "rates": rates,
        "seed": cfg.seed,
        "special_ids": vocab.special_ids,
        "vocab": vocab,
        "policy": cfg.policy,
        "epoch": cfg.epoch,
        "rescale": cfg.rescale,
    }
    total_masked = 0
    total_elig = 0
    with open(args.out_positions, "w", encoding="utf-8") as pos_fh, open(
        args.out_corpus, "w", encoding="utf-8"
    ) as cor_fh, open(args.out_labels, "w", encoding="utf-8") as lab_fh:
        lab_fh.write("doc_id\tposition\toriginal_id\n")
        chunks = chunked(stream_corpus(cfg.corpus, vocab), _CHUNK_DOCS)
        for block in map_chunks(_approx_chunk, chunks, cfg.workers, ctx=ctx):
            for doc_id, line, corrupted, labels, n_elig in block:
                if line is not None:
                    pos_fh.write(line)
                    pos_fh.write("\n")
                    total_masked += len(labels)
                    total_elig += n_elig
                cor_fh.write(vocab.to_line(corrupted.tolist()))
                cor_fh.write("\n")
                for pos, orig in labels:
                    lab_fh.write(f"{doc_id}\t{pos}\t{orig}\n")
    for path in (args.out_positions, args.out_corpus, args.out_labels):
        write_meta(path, cfg, "approx-mask", epoch=cfg.epoch)
    realized = total_masked / total_elig if total_elig else 0.0
    print(f"realized_rate\t{realized:.6f}")
    return 0


# --------------------------------------------------------------- compare

def _compare_chunk(docs: list[Document]):
    ctx = get_context()
    strategies = _build_strategies(ctx)
    report = compare_strategies(docs, strategies, ctx["vocab_size"], ctx["special_ids"])
    return report.occurrences, report.masked


def _build_strategies(ctx):
    return [
        make_strategy(
            kind,
            rate=ctx["rate"],
            seed=ctx["seed"],
            special_ids=ctx["special_ids"],
            pmi=ctx.get("pmi"),
            rate_table=ctx.get("rates"),
            span_vocab=ctx.get("span_vocab"),
            s=ctx["s"],
            p_geo=ctx["p_geo"],
            max_span=ctx["max_span"],
        )
        for kind in ctx["kinds"]
    ]


def cmd_compare(args) -> int:
    cfg = build_config(args)
    vocab = _load_inputs(cfg)
    kinds = [k.strip() for k in args.strategies.split(",") if k.strip()]
    if not kinds:
        raise UsageError("no strategies selected")
    bad = [k for k in kinds if k not in KIND_ORDER]
    if bad:
        raise UsageError(f"unknown strategy name(s): {', '.join(bad)}")
    kinds = [k for k in KIND_ORDER if k in kinds]
    ctx = {
        "kinds": kinds,
        "rate": cfg.rate,
        "seed": cfg.seed,
        "s": cfg.s,
        "p_geo": cfg.p_geo,
        "max_span": cfg.max_span,
        "special_ids": vocab.special_ids,
        "vocab_size": vocab.size,
    }
    if "informask" in kinds:
        if not args.pmi:
            raise OSError("missing artifact: informask needs --pmi")
        ctx["pmi"] = read_pmi(args.pmi)
    if "informask_approx" in kinds:
        if not args.rates:
            raise OSError("missing artifact: informask_approx needs --rates")
        ctx["rates"] = read_rates_binary(args.rates)
    if "pmi_span" in kinds:
        if not args.counts:
            raise OSError("missing artifact: pmi_span needs --counts")
        counts = read_counts(args.counts)
        ctx["span_vocab"] = build_span_vocabulary(
            counts,
            stream_corpus(cfg.corpus, vocab),
            top_m=cfg.span_top_m,
            min_count=cfg.span_min_count,
        )
    occ = np.zeros(vocab.size, dtype=np.int64)
    masked = {k: np.zeros(vocab.size, dtype=np.int64) for k in kinds}
    chunks = chunked(stream_corpus(cfg.corpus, vocab), _CHUNK_DOCS)
    for occ_part, masked_part in map_chunks(_compare_chunk, chunks, cfg.workers, ctx=ctx):
        occ += occ_part
        for k in kinds:
            masked[k] += masked_part[k]
    report = ComparisonReport(vocab.size, kinds, occ, masked)
    meta = {
        "tool": f"pmimask {__version__}",
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
    }
    write_comparison_tsv(report, vocab, args.out, meta=meta)
    write_meta(args.out, cfg, "compare", strategies=kinds)
    for k in kinds:
        print(f"overall_{k}\t{report.overall(k):.6f}")
    return 0


# ----------------------------------------------------------------- stats

def cmd_stats(args) -> int:
    path = args.path
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == COUNTS_MAGIC:
        t = read_counts(path)
        info = {
            "type": "counts",
            "vocab_size": t.vocab_size,
            "window": t.window,
            "n_pairs": t.n_pairs,
            "total_pairs": t.total_pairs,
            "total_tokens": int(t.unigram.sum()),
        }
    elif head == PMI_MAGIC:
        t = read_pmi(path)
        vals = np.array(list(t.values.values())) if t.values else np.zeros(1)
        info = {
            "type": "pmi",
            "pmi_vocab_size": len(t.pmi_vocab),
            "min_count": t.min_count,
            "n_values": t.n_values,
            "value_min": float(vals.min()),
            "value_max": float(vals.max()),
            "value_mean": float(vals.mean()),
        }
    elif head == RATES_MAGIC:
        t = read_rates_binary(path)
        observed = t.rate()[t.occurrences > 0]
        quantiles = (
            {q: float(np.quantile(observed, q)) for q in (0.1, 0.5, 0.9)} if observed.size else {}
        )
        info = {
            "type": "rates",
            "vocab_size": t.vocab_size,
            "docs_processed": t.docs_processed,
            "target_rate": t.target_rate,
            "overall_rate": t.overall_rate(),
            "observed_tokens": int((t.occurrences > 0).sum()),
            "rate_quantiles": quantiles,
        }
    else:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
        if first.lstrip().startswith("{"):
            n = 0
            total_masked = 0
            scores = []
            for dec in read_decisions(path):
                n += 1
                total_masked += len(dec.chosen.positions)
                if dec.chosen.score is not None:
                    scores.append(dec.chosen.score)
            info = {
                "type": "decisions",
                "n_decisions": n,
                "mean_masked_per_doc": total_masked / n if n else 0.0,
                "mean_score": float(np.mean(scores)) if scores else None,
            }
        else:
            docs = 0
            tokens = 0
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    docs += 1
                    tokens += len(line.split())
            info = {"type": "text", "documents": docs, "tokens": tokens}
    json.dump(info, sys.stdout, sort_keys=True)
    print()
    return 0


# ----------------------------------------------------------------- main

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--corpus", action="append", default=[], help="corpus file (repeatable)")
    p.add_argument("--vocab", help="vocabulary file")
    p.add_argument("--window", type=int)
    p.add_argument("--pmi-vocab-size", dest="pmi_vocab_size", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--s", type=int, help="candidates sampled per document")
    p.add_argument("--rate", type=float)
    p.add_argument("--p-mask", dest="p_mask", type=float)
    p.add_argument("--p-random", dest="p_random", type=float)
    p.add_argument("--p-keep", dest="p_keep", type=float)
    p.add_argument("--p-geo", dest="p_geo", type=float)
    p.add_argument("--max-span", dest="max_span", type=int)
    p.add_argument("--span-top-m", dest="span_top_m", type=int)
    p.add_argument("--span-min-count", dest="span_min_count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--epoch", type=int)
    p.add_argument("--rate-fraction", dest="rate_fraction", type=float)
    p.add_argument("--convergence-threshold", dest="convergence_threshold", type=float)
    p.add_argument("--checkpoint-interval", dest="checkpoint_interval", type=int)
    p.add_argument("--delta-mode", dest="delta_mode", choices=["absolute", "relative"])
    p.add_argument("--rescale", action="store_const", const=True)


def make_parser() -> _Parser:
    parser = _Parser(prog="pmimask", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pmimask {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("count", help="build windowed co-occurrence counts")
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("pmi", help="build the PMI table from counts")
    _add_config_flags(p)
    p.add_argument("--counts", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pmi)

    p = sub.add_parser("mask", help="sample-and-score masking over a corpus")
    _add_config_flags(p)
    p.add_argument("--pmi", required=True)
    p.add_argument("--out-decisions", dest="out_decisions", required=True)
    p.add_argument("--out-corpus", dest="out_corpus", required=True)
    p.add_argument("--out-labels", dest="out_labels", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("derive-rates", help="derive token-specific masking rates")
    _add_config_flags(p)
    p.add_argument("--pmi", required=True)
    p.add_argument("--out-rates-tsv", dest="out_rates_tsv", required=True)
    p.add_argument("--out-rates-bin", dest="out_rates_bin", required=True)
    p.add_argument("--out-convergence", dest="out_convergence", required=True)
    p.set_defaults(func=cmd_derive_rates)

    p = sub.add_parser("approx-mask", help="Bernoulli masking from a rate table")
    _add_config_flags(p)
    p.add_argument("--rates", required=True)
    p.add_argument("--out-positions", dest="out_positions", required=True)
    p.add_argument("--out-corpus", dest="out_corpus", required=True)
    p.add_argument("--out-labels", dest="out_labels", required=True)
    p.set_defaults(func=cmd_approx_mask)

    p = sub.add_parser("compare", help="per-token rate comparison across strategies")
    _add_config_flags(p)
    p.add_argument("--strategies", required=True, help="comma-separated strategy kinds")
    p.add_argument("--pmi")
    p.add_argument("--rates")
    p.add_argument("--counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="summarize any pipeline artifact")
    p.add_argument("path")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

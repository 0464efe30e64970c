"""Command-line interface: train / infer / eval / topics / bench / gen / stream.

Exit codes: 0 success, 1 validation error (bad flags or bad input files),
2 unexpected runtime error.  Failures print one machine-parsable JSON
record on stderr; stdout carries only the subcommand's report.  Set
COREF_LOG=error|info|debug to control diagnostics.
"""

import argparse
import json
import logging
import os
import sys

from .bench import pairwise_count, sequential_bound_check, streaming_cost
from .corpus import load_corpus
from .embeddings import load_embeddings
from .engine import (
    run_corpus,
    state_from_dict,
    state_to_dict,
    stream_add_document,
    topic_for,
)
from .errors import CorefError, DimMismatch, UniverseMismatch
from .files import (
    read_clusters,
    read_topics,
    write_predictions,
    write_topics,
)
from .metrics import score_report
from .params import Config, load_checkpoint, save_checkpoint
from .synth import SynthConfig, generate
from .topics import kmeans, load_stopwords, tfidf_features
from .trainer import train

log = logging.getLogger("seqcoref")


class _UsageError(CorefError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _configure_logging():
    level = os.environ.get("COREF_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_config(args, store_dim):
    """Config from defaults, then --config file, then explicit flags.

    d_tok follows the embedding file unless the file or a flag pinned it.
    """
    data = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    explicit_dtok = "d_tok" in data or getattr(args, "d_tok", None) is not None
    for flag in ("mode", "seed", "learning_rate", "max_epochs", "patience",
                 "k_topics", "d_tok"):
        v = getattr(args, flag, None)
        if v is not None:
            data["K_topics" if flag == "k_topics" else flag] = v
    data.setdefault("mode", "entity")
    try:
        config = Config.from_dict(data)
    except ValueError as e:
        raise _UsageError(str(e))
    if store_dim is not None and config.d_tok != store_dim:
        if explicit_dtok:
            raise DimMismatch(
                f"embeddings have dim {store_dim} but config d_tok={config.d_tok}"
            )
        data["d_tok"] = store_dim
        config = Config.from_dict(data)
    return config


def _cmd_train(args):
    mode = _load_config(args, None).mode
    corpus = load_corpus(args.corpus, mode)
    store = load_embeddings(args.embeddings, corpus)
    dev_corpus = load_corpus(args.dev_corpus, mode)
    dev_store = load_embeddings(args.dev_embeddings, dev_corpus)
    config = _load_config(args, store.dim)
    if dev_store.dim != store.dim:
        raise DimMismatch(
            f"train embeddings dim {store.dim} != dev embeddings dim {dev_store.dim}"
        )

    def log_epoch(record):
        print(json.dumps(record), file=sys.stderr)

    result = train(corpus, store, dev_corpus, dev_store, config, log_fn=log_epoch)
    save_checkpoint(result.params, config, args.out)
    print(
        json.dumps(
            {
                "best_dev_conll_f1": result.best_dev_f1,
                "epochs_run": result.epochs_run,
                "stopped_early": result.stopped_early,
                "checkpoint": args.out,
            }
        )
    )
    return 0


def _cmd_infer(args):
    params, config = load_checkpoint(args.model)
    corpus = load_corpus(args.corpus, config.mode)
    store = load_embeddings(args.embeddings, corpus, expected_dim=config.d_tok)
    topics = read_topics(args.topics) if args.topics else None
    entity_clustering = (
        read_clusters(args.entity_clusters) if args.entity_clusters else None
    )
    result = run_corpus(
        corpus,
        store,
        params,
        config.mode,
        topics=topics,
        entity_clustering=entity_clustering,
        seed=args.order_seed,
    )
    write_predictions(result.doc_steps, args.out)
    if args.save_state:
        with open(args.save_state, "w", encoding="utf-8") as fh:
            json.dump(state_to_dict(result.state), fh)
    print(
        json.dumps(
            {
                "mentions": len(result.clustering),
                "clusters": len(result.state.clusters),
                "scorer_invocations": result.trace.invocations,
                "predictions": args.out,
            }
        )
    )
    return 0


def _cmd_eval(args):
    pred = read_clusters(args.pred)
    gold_corpus = load_corpus(args.gold)
    kinds = set()
    for mid in pred.mentions():
        try:
            _, m = gold_corpus.find_mention(mid)
        except KeyError:
            raise UniverseMismatch(f"predicted mention '{mid}' not in gold corpus")
        kinds.add(m.kind)
    if len(kinds) != 1:
        raise UniverseMismatch(
            f"prediction file mixes mention kinds or matches none: {sorted(kinds)}"
        )
    gold = gold_corpus.gold_clustering(kinds.pop())
    report = score_report(pred, gold, exclude_singletons=args.exclude_singletons)
    print(json.dumps(report))
    return 0


def _cmd_topics(args):
    corpus = load_corpus(args.corpus)
    stop = load_stopwords(args.stopwords) if args.stopwords else None
    features = tfidf_features(corpus, stop)
    assignment = kmeans(features, args.k, seed=args.seed)
    write_topics(assignment, args.out)
    print(json.dumps({"documents": len(assignment), "k": args.k, "out": args.out}))
    return 0


def _cmd_bench(args):
    params, config = load_checkpoint(args.model)
    corpus = load_corpus(args.corpus, config.mode)
    store = load_embeddings(args.embeddings, corpus, expected_dim=config.d_tok)
    topics = read_topics(args.topics) if args.topics else None
    entity_clustering = (
        read_clusters(args.entity_clusters) if args.entity_clusters else None
    )
    result = run_corpus(
        corpus, store, params, config.mode, topics=topics,
        entity_clustering=entity_clustering,
    )
    m = len(result.clustering)
    c = len(result.state.clusters)
    pw = pairwise_count(corpus, topics, config.mode)
    report = sequential_bound_check(result.trace, c, m, pairwise=pw)
    payload = {
        "m": report.mentions,
        "c": report.clusters,
        "sequential_invocations": report.invocations,
        "bound": report.bound,
        "bound_no_singleton": report.bound_no_singleton,
        "pairwise_count": report.pairwise,
        "ratio": report.ratio,
        "wall_time": result.trace.wall_time,
    }
    docs = sorted(corpus.doc_ids())
    if len(docs) > 1:
        head = docs[:-1]
        partial = run_corpus(
            corpus, store, params, config.mode, topics=topics, order=head,
            entity_clustering=result.state.entity_clustering,
        )
        last_doc = corpus.document(docs[-1])
        payload["streaming"] = streaming_cost(
            partial.state, last_doc, store, params,
            topic_id=topic_for(last_doc, topics),
        )
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    print(json.dumps(payload))
    return 0


def _cmd_gen(args):
    cfg = SynthConfig(
        n_topics=args.n_topics,
        docs_per_topic=args.docs_per_topic,
        clusters_per_topic=args.clusters_per_topic,
        mentions_per_doc=args.mentions_per_doc,
        d_tok=args.d_tok,
        separation=args.separation,
        event_mode=args.event_mode,
        args_per_event=args.args_per_event,
        seed=args.seed,
        world_seed=args.world_seed,
    )
    result = generate(cfg)
    corpus_path, emb_path, topics_path = result.write_files(args.out_dir)
    print(
        json.dumps(
            {
                "corpus": corpus_path,
                "embeddings": emb_path,
                "topics": topics_path,
                "documents": len(result.corpus.documents),
            }
        )
    )
    return 0


def _cmd_stream(args):
    params, config = load_checkpoint(args.model)
    with open(args.state, "r", encoding="utf-8") as fh:
        state = state_from_dict(json.load(fh))
    doc_corpus = load_corpus(args.doc, state.mode)
    if len(doc_corpus.documents) != 1:
        raise _UsageError("--doc must contain exactly one document")
    doc = doc_corpus.documents[0]
    store = load_embeddings(args.embeddings, doc_corpus, expected_dim=config.d_tok)
    records = stream_add_document(
        state, doc, store, params, topic_id=args.topic
    )
    write_predictions([(doc.doc_id, records)], args.out)
    if args.save_state:
        with open(args.save_state, "w", encoding="utf-8") as fh:
            json.dump(state_to_dict(state), fh)
    print(
        json.dumps(
            {
                "doc_id": doc.doc_id,
                "new_mentions": len(records),
                "clusters": len(state.clusters),
                "scorer_invocations": state.trace.invocations,
            }
        )
    )
    return 0


def _build_parser():
    parser = _Parser(prog="seqcoref", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from scratch")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dev-corpus", required=True, dest="dev_corpus")
    p.add_argument("--dev-embeddings", required=True, dest="dev_embeddings")
    p.add_argument("--mode", choices=("entity", "event"))
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--max-epochs", type=int, dest="max_epochs")
    p.add_argument("--patience", type=int)
    p.add_argument("--k-topics", type=int, dest="k_topics")
    p.add_argument("--d-tok", type=int, dest="d_tok")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("infer", help="predict coreference clusters")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--topics", help="predicted topic file; defaults to gold topics")
    p.add_argument("--entity-clusters", dest="entity_clusters",
                   help="entity clustering file (required in event mode)")
    p.add_argument("--out", required=True)
    p.add_argument("--save-state", dest="save_state")
    p.add_argument("--order-seed", type=int, dest="order_seed")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--exclude-singletons", action="store_true",
                   dest="exclude_singletons")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("topics", help="predict document topic clusters")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stopwords", help="custom stop-word list file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_topics)

    p = sub.add_parser("bench", help="score-count benchmark report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--topics")
    p.add_argument("--entity-clusters", dest="entity_clusters")
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--n-topics", type=int, default=2, dest="n_topics")
    p.add_argument("--docs-per-topic", type=int, default=10, dest="docs_per_topic")
    p.add_argument("--clusters-per-topic", type=int, default=8,
                   dest="clusters_per_topic")
    p.add_argument("--mentions-per-doc", type=int, default=6, dest="mentions_per_doc")
    p.add_argument("--d-tok", type=int, default=16, dest="d_tok")
    p.add_argument("--separation", type=float, default=8.0)
    p.add_argument("--event-mode", action="store_true", dest="event_mode")
    p.add_argument("--args-per-event", type=int, default=1, dest="args_per_event")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--world-seed", type=int, dest="world_seed",
                   help="share entity/topic centroids across corpora")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("stream", help="add one document to a saved state")
    p.add_argument("--state", required=True)
    p.add_argument("--doc", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--topic", help="topic id for the new document")
    p.add_argument("--save-state", dest="save_state")
    p.set_defaults(func=_cmd_stream)

    return parser


def main(argv=None):
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CorefError as e:
        print(
            json.dumps({"error": type(e).__name__, "detail": str(e)}),
            file=sys.stderr,
        )
        return 1
    except SystemExit:
        raise
    except Exception as e:  # unexpected: report and exit 2
        log.debug("unexpected failure", exc_info=True)
        print(
            json.dumps({"error": type(e).__name__, "detail": str(e)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front door.

Subcommands: validate, diagnose, evaluate, synth, serve. Machine-parseable
JSON goes to stdout; human tables and diagnostics go to stderr unless
``--format table`` is chosen. Exit codes: 0 success, 1 domain error (bad
files, failed validation, infeasible parameters), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .codex import load_codex, parse_codex, serialize_codex, validate_codex
from .errors import AbductorError, UnembeddableMentionError
from .evaluation import (
    format_report_table,
    load_corpus,
    report_to_dict,
    run_evaluation,
    serialize_corpus,
    serialize_report,
    synth_corpus,
)
from .extraction import (
    ENV_EXTRACTOR_URL,
    ExtractorConfig,
    Polarity,
    extract_mentions,
    fetch_external_mentions,
)
from .normalization import (
    DEFAULT_MATCH_THRESHOLD,
    load_embeddings,
    load_mention_table,
    match_mention,
)
from .observation import FindingStatus, observation_from_findings
from .reasoning import (
    ScoringPolicy,
    matrix_for_policy,
    nb_rank,
    rank_differential,
    serialize_differential,
)
from .serialization import dumps_canonical


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--policy", choices=["uniform", "idf"], default="uniform",
                        help="support-weight derivation policy")
    parser.add_argument("--alpha", type=float, default=0.5,
                        help="missing-expected penalty factor in [0, 1]")
    parser.add_argument("--beta", type=float, default=0.25,
                        help="unexpected-present flat penalty >= 0")
    parser.add_argument("--absent-mode", choices=["tri_state", "binary"], default="tri_state",
                        help="treat unlisted features as unknown (tri_state) or absent (binary)")


def _policy_from_args(args: argparse.Namespace) -> ScoringPolicy:
    return ScoringPolicy(
        weighting=args.policy, alpha=args.alpha, beta=args.beta, absent_mode=args.absent_mode
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abductor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a codex file against every invariant")
    p_validate.add_argument("--codex", required=True, metavar="PATH")

    p_diagnose = sub.add_parser("diagnose", help="rank the hypothesis space for one case")
    p_diagnose.add_argument("--codex", required=True, metavar="PATH")
    p_diagnose.add_argument("--findings", metavar="PATH", help="finding list JSON")
    p_diagnose.add_argument("--text", metavar="STR", help="free text (requires --embeddings)")
    p_diagnose.add_argument("--embeddings", metavar="PATH", help="feature embeddings JSON")
    p_diagnose.add_argument("--mention-table", metavar="PATH", help="surface-vector lookup JSON")
    p_diagnose.add_argument("--match-threshold", type=float, default=DEFAULT_MATCH_THRESHOLD)
    p_diagnose.add_argument("--extractor", choices=["lexicon", "external"], default="lexicon")
    p_diagnose.add_argument("--top-k", type=int, default=None, help="truncate emitted entries")
    _add_policy_flags(p_diagnose)

    p_evaluate = sub.add_parser("evaluate", help="run Top-k evaluation over a corpus")
    p_evaluate.add_argument("--codex", required=True, metavar="PATH")
    p_evaluate.add_argument("--corpus", required=True, metavar="PATH")
    p_evaluate.add_argument("--k", default="1,3,5", metavar="CSV", help="comma-separated k values")
    p_evaluate.add_argument("--ci", type=float, default=0.95, help="confidence level in (0, 1)")
    p_evaluate.add_argument("--baseline", choices=["nb"], default=None,
                            help="also rank with the naive-Bayes baseline")
    p_evaluate.add_argument("--epsilon", type=float, default=0.01, help="baseline leak parameter")
    p_evaluate.add_argument("--format", choices=["json", "table"], default="json")
    _add_policy_flags(p_evaluate)

    p_synth = sub.add_parser("synth", help="generate a seeded synthetic codex and corpus")
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--hypotheses", type=int, default=10)
    p_synth.add_argument("--features", type=int, default=30)
    p_synth.add_argument("--features-per-hypothesis", type=int, default=5)
    p_synth.add_argument("--findings-per-case", type=int, default=4)
    p_synth.add_argument("--flip-noise", type=float, default=0.0)
    p_synth.add_argument("--cases", type=int, default=100)
    p_synth.add_argument("--out-codex", required=True, metavar="PATH")
    p_synth.add_argument("--out-corpus", required=True, metavar="PATH")

    p_serve = sub.add_parser("serve", help="serve the HTTP session API")
    p_serve.add_argument("--codex", required=True, metavar="PATH")
    p_serve.add_argument("--embeddings", metavar="PATH")
    p_serve.add_argument("--mention-table", metavar="PATH")
    p_serve.add_argument("--match-threshold", type=float, default=DEFAULT_MATCH_THRESHOLD)
    p_serve.add_argument("--extractor", choices=["lexicon", "external"], default="lexicon")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--snapshot", metavar="PATH", help="session snapshot file")
    _add_policy_flags(p_serve)

    return parser


def _extractor_config(args: argparse.Namespace) -> ExtractorConfig:
    if args.extractor == "external":
        endpoint = os.environ.get(ENV_EXTRACTOR_URL)
        if not endpoint:
            raise AbductorError(
                f"external extractor selected but {ENV_EXTRACTOR_URL} is not set"
            )
        return ExtractorConfig(mode="external", endpoint=endpoint)
    return ExtractorConfig()


def cmd_validate(args: argparse.Namespace) -> int:
    codex = parse_codex(_read_text(args.codex))
    violations = validate_codex(codex)
    report = {
        "status": "OK" if not violations else "INVALID",
        "violations": [
            {"rule": v.rule, "id": v.subject_id, "message": v.message} for v in violations
        ],
    }
    sys.stdout.write(dumps_canonical(report))
    return 0 if not violations else 1


def _findings_from_text(args: argparse.Namespace, codex) -> list[tuple[str, FindingStatus]]:
    config = _extractor_config(args)
    if config.mode == "external":
        mentions = fetch_external_mentions(args.text, config)
    else:
        mentions = extract_mentions(args.text, codex, config)
    store = load_embeddings(_read_text(args.embeddings), codex)
    embedder = load_mention_table(_read_text(args.mention_table)) if args.mention_table else None

    findings: list[tuple[str, FindingStatus]] = []
    for mention in mentions:
        try:
            outcome = match_mention(
                mention, store, codex, threshold=args.match_threshold, embedder=embedder
            )
        except UnembeddableMentionError as exc:
            sys.stderr.write(f"unmatched: {mention.surface!r} ({exc})\n")
            continue
        if not outcome.matched:
            sys.stderr.write(
                f"unmatched: {mention.surface!r} (best score {outcome.score:.3f})\n"
            )
            continue
        status = (
            FindingStatus.ABSENT if mention.polarity is Polarity.NEGATED else FindingStatus.PRESENT
        )
        findings.append((outcome.feature_id, status))
    return findings


def cmd_diagnose(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not args.findings and args.text is None:
        parser.error("diagnose requires --findings or --text")
    if args.findings and args.text is not None:
        parser.error("--findings and --text are mutually exclusive")
    if args.text is not None and not args.embeddings:
        parser.error("--text requires --embeddings")
    if args.top_k is not None and args.top_k < 1:
        parser.error("--top-k must be >= 1")

    codex = load_codex(_read_text(args.codex))
    policy = _policy_from_args(args)
    if args.text is not None:
        findings = _findings_from_text(args, codex)
    else:
        raw = json.loads(_read_text(args.findings))
        if not isinstance(raw, list):
            raise AbductorError("findings file must be a JSON array")
        findings = []
        for f in raw:
            if not isinstance(f, dict) or set(f) != {"feature", "status"}:
                raise AbductorError('finding entries must be {"feature", "status"} objects')
            findings.append((f["feature"], FindingStatus(f["status"])))

    obs = observation_from_findings(codex, findings)
    d = rank_differential(codex, obs, matrix_for_policy(codex, policy), policy)
    sys.stdout.write(serialize_differential(d, top_k=args.top_k))
    return 0


def cmd_evaluate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        ks = [int(part) for part in args.k.split(",") if part.strip()]
    except ValueError:
        parser.error(f"--k must be a comma-separated integer list, got {args.k!r}")
    if not ks or any(k < 1 for k in ks):
        parser.error("every k must be >= 1")
    if not (0.0 < args.ci < 1.0):
        parser.error("--ci must lie in (0, 1)")

    codex = load_codex(_read_text(args.codex))
    corpus = load_corpus(_read_text(args.corpus), codex)
    if not corpus:
        raise AbductorError("corpus is empty; nothing to evaluate")
    policy = _policy_from_args(args)
    matrix = matrix_for_policy(codex, policy)

    report = run_evaluation(codex, corpus, matrix, policy, ks=ks, level=args.ci)
    reports = {"engine": report}
    if args.baseline == "nb":
        reports["baseline_nb"] = run_evaluation(
            codex,
            corpus,
            matrix,
            policy,
            ks=ks,
            level=args.ci,
            ranker=lambda c, obs: nb_rank(c, obs, epsilon=args.epsilon),
            ranker_name="nb",
        )

    tables = "".join(format_report_table(r) for r in reports.values())
    if args.format == "table":
        sys.stdout.write(tables)
        return 0
    if args.baseline == "nb":
        sys.stdout.write(dumps_canonical({name: report_to_dict(r) for name, r in reports.items()}))
    else:
        sys.stdout.write(serialize_report(report))
    sys.stderr.write(tables)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    codex, corpus = synth_corpus(
        seed=args.seed,
        n=args.hypotheses,
        m=args.features,
        features_per_hypothesis=args.features_per_hypothesis,
        findings_per_case=args.findings_per_case,
        flip_noise=args.flip_noise,
        cases=args.cases,
    )
    Path(args.out_codex).write_text(serialize_codex(codex), encoding="utf-8")
    Path(args.out_corpus).write_text(serialize_corpus(corpus), encoding="utf-8")
    summary = {
        "codex": args.out_codex,
        "corpus": args.out_corpus,
        "codex_version": codex.version,
        "hypotheses": codex.n,
        "features": codex.m,
        "cases": len(corpus),
    }
    sys.stdout.write(dumps_canonical(summary))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import EngineContext, SessionStore, create_app

    codex = load_codex(_read_text(args.codex))
    policy = _policy_from_args(args)
    context = EngineContext(
        codex=codex,
        policy=policy,
        matrix=matrix_for_policy(codex, policy),
        match_threshold=args.match_threshold,
        embeddings=load_embeddings(_read_text(args.embeddings), codex) if args.embeddings else None,
        mention_embedder=(
            load_mention_table(_read_text(args.mention_table)) if args.mention_table else None
        ),
        extractor=_extractor_config(args),
    )
    store = SessionStore()
    if args.snapshot and Path(args.snapshot).exists():
        restored = store.load(args.snapshot, codex)
        sys.stderr.write(f"restored {restored} session(s) from {args.snapshot}\n")
    app = create_app(context, store=store)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        if args.snapshot:
            store.save(args.snapshot)
            sys.stderr.write(f"saved session snapshot to {args.snapshot}\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "diagnose":
            return cmd_diagnose(args, parser)
        if args.command == "evaluate":
            return cmd_evaluate(args, parser)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "serve":
            return cmd_serve(args)
        parser.error(f"unknown command {args.command!r}")
    except (AbductorError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

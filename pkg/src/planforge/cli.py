"""Command-line entry points.

    planforge serve    --config cfg.json
    planforge ingest   DIR [--config cfg.json]
    planforge generate --input input.json --out DIR [--config cfg.json]
    planforge evaluate --plan plan.md [--config cfg.json]

``generate`` runs the whole offline pipeline and writes prompts.json, plan.md,
report.json, structure.json, and graph.json to the output directory; with the
mock provider configured it produces exactly the artifacts the HTTP happy path
would.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from .config import build_gateway, load_config
from .errors import PlanForgeError
from .library import CaseLibrary
from .pipeline import LessonPlan, PlanPipeline
from .templates import CurriculumInput
from .workflow import run_offline

_TEXT_SUFFIXES = (".txt", ".md", ".markdown")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planforge")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", type=Path, default=None)

    ingest = sub.add_parser("ingest", help="ingest a directory of text documents")
    ingest.add_argument("directory", type=Path)
    ingest.add_argument("--config", type=Path, default=None)

    generate = sub.add_parser("generate", help="run the offline design pipeline")
    generate.add_argument("--input", type=Path, required=True)
    generate.add_argument("--out", type=Path, required=True)
    generate.add_argument("--config", type=Path, default=None)
    generate.add_argument("--seed", type=int, default=None)

    evaluate = sub.add_parser("evaluate", help="evaluate a plan text file")
    evaluate.add_argument("--plan", type=Path, required=True)
    evaluate.add_argument("--config", type=Path, default=None)
    evaluate.add_argument("--seed", type=int, default=None)

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host="0.0.0.0", port=config.listen_port)
    return 0


def _cmd_ingest(args) -> int:
    config = load_config(args.config)
    directory: Path = args.directory
    if not directory.is_dir():
        print(f"not a directory: {directory}", file=sys.stderr)
        return 1
    library_dir = config.data_dir / "library"
    library = CaseLibrary.load(library_dir)
    count = 0
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in _TEXT_SUFFIXES or not path.is_file():
            continue
        text = path.read_text(encoding="utf-8")
        if not text.strip():
            continue
        metadata = {}
        sidecar = path.with_suffix(path.suffix + ".meta.json")
        if sidecar.exists():
            metadata = json.loads(sidecar.read_text(encoding="utf-8"))
        library.ingest_document(
            source_uri=str(path), title=path.stem, metadata=metadata, raw_text=text
        )
        count += 1
    library.save(library_dir)
    print(f"ingested {count} documents into {library_dir}")
    return 0


def _cmd_generate(args) -> int:
    config = load_config(args.config)
    gateway = build_gateway(config)
    raw = json.loads(args.input.read_text(encoding="utf-8"))
    curriculum = CurriculumInput.from_dict(raw)
    seed = args.seed if args.seed is not None else config.fixed_seed

    artifacts = run_offline(curriculum, gateway, config.default_model_id, seed)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    prompts_doc = [
        {
            "template_id": p.template_id,
            "text": p.text,
            "upstream_id": p.upstream_id,
            "optimized": artifacts.optimized[p.template_id].to_dict(),
        }
        for p in artifacts.prompts
    ]
    (out / "prompts.json").write_text(
        json.dumps(prompts_doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    (out / "plan.md").write_text(artifacts.plan.text, encoding="utf-8")
    (out / "report.json").write_text(
        json.dumps(artifacts.report.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (out / "structure.json").write_text(
        json.dumps(artifacts.structure.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (out / "graph.json").write_bytes(artifacts.graph.to_json_bytes())
    print(f"wrote prompts, plan, report, structure, and graph to {out}")
    return 0


def _cmd_evaluate(args) -> int:
    config = load_config(args.config)
    gateway = build_gateway(config)
    pipeline = PlanPipeline(gateway)
    text = args.plan.read_text(encoding="utf-8")
    if not text.strip():
        print("plan file is empty", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else config.fixed_seed
    plan = LessonPlan(
        id="plan-cli",
        prompt_fingerprint="",
        text=text,
        created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
    )
    report = pipeline.evaluate_plan(plan, config.default_model_id, seed)
    print(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "ingest": _cmd_ingest,
        "generate": _cmd_generate,
        "evaluate": _cmd_evaluate,
    }
    try:
        return handlers[args.command](args)
    except PlanForgeError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

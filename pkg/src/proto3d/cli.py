"""Command-line entry point: ``proto3d generate|render|eval|dataset|edit``.

Exit codes::

    0   success
    2   designer stage failed (no program could be produced)
    3   refiner failsafe kept the input program unchanged
    64  usage error (bad flags, bad config file, empty query)
    65  malformed input data (parse errors, bad clouds or targets)
    66  missing input file or directory
    70  internal error
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_DESIGNER = 2
EXIT_FAILSAFE = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NOINPUT = 66
EXIT_SOFTWARE = 70

log = logging.getLogger("proto3d")

# keys accepted in a --config file, by the option they set
CONFIG_KEYS = {
    "backend", "fixtures", "model", "retries", "retry_pause", "seed", "jobs",
    "budget", "views", "max_parts", "top_p", "temperature", "agents", "pipeline",
    "proposal_mode", "match", "strict", "resolution", "rig", "modes", "samples", "out",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _csv(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {s!r}")


def _resolution(s) -> tuple[int, int]:
    if isinstance(s, (tuple, list)):
        return tuple(int(v) for v in s)
    w, _, h = str(s).lower().partition("x")
    try:
        return (int(w), int(h or w))
    except ValueError:
        raise UsageError(f"bad resolution {s!r}; use N or WxH") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file with default option values")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker threads for rendering")
    common.add_argument("-v", "--verbose", action="store_true")

    backend = _Parser(add_help=False)
    backend.add_argument("--backend", choices=("mock", "live"), default="mock")
    backend.add_argument("--fixtures", help="JSON fixture file for the mock backend")
    backend.add_argument("--model", default=None, help="model id for the live backend")
    backend.add_argument("--retries", type=int, default=2)
    backend.add_argument("--retry-pause", type=float, default=1.0)
    backend.add_argument("--temperature", type=float, default=0.2)

    parser = _Parser(prog="proto3d", description="Prototype 3D objects from language models, render and evaluate them.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common, backend], help="run the agent pipeline for one query")
    g.add_argument("query")
    g.add_argument("--pipeline", choices=("agentic", "naive"), default="agentic")
    g.add_argument("--out", help="run directory (default runs/<query>-<seed>)")
    g.add_argument("--budget", type=int, default=3)
    g.add_argument("--views", type=int, default=3)
    g.add_argument("--max-parts", type=int, default=8)
    g.add_argument("--top-p", type=int, default=3)
    g.add_argument("--agents", default="designer,coder,inspector")
    g.add_argument("--proposal-mode", choices=("deterministic", "mllm"), default="deterministic")
    g.add_argument("--match", choices=("any", "top1"), default="any")
    g.add_argument("--strict", default=False, type=_bool, nargs="?", const=True)
    g.add_argument("--resolution", default="384")

    r = sub.add_parser("render", parents=[common], help="render a program file")
    r.add_argument("program")
    r.add_argument("--rig", default="icosphere:0", help="icosphere:N, hemisphere:N or fibonacci:N")
    r.add_argument("--modes", default="shaded")
    r.add_argument("--out", help="output directory (default <program stem>_renders)")
    r.add_argument("--resolution", default="384")

    e = sub.add_parser("eval", parents=[common, backend], help="sparse or dense geometric evaluation")
    kind = e.add_mutually_exclusive_group(required=True)
    kind.add_argument("--sparse", action="store_true")
    kind.add_argument("--dense", action="store_true")
    e.add_argument("--proto", required=True, help="prototype program (.psc)")
    e.add_argument("--targets", help="directory of target centroid (.json) or program (.psc) files")
    e.add_argument("--target", help="target point cloud (text or .bin)")
    e.add_argument("--samples", type=int, default=10_000)
    e.add_argument("--no-backend", action="store_true", help="map part labels by name only")
    e.add_argument("--squared", action="store_true", help="squared Chamfer distances")
    e.add_argument("--output", help="write the JSON report here instead of stdout")

    d = sub.add_parser("dataset", help="corpus rendering, mixup and token reports")
    dsub = d.add_subparsers(dest="dataset_command", parser_class=_Parser)
    dc = dsub.add_parser("corpus", parents=[common])
    dc.add_argument("programs", nargs="+", help=".psc files; the query is the file stem")
    dc.add_argument("--rig", default="icosphere:0")
    dc.add_argument("--modes", default="shaded,depth,mask")
    dc.add_argument("--out", default="corpus")
    dc.add_argument("--resolution", default="384")
    dm = dsub.add_parser("mixup", parents=[common])
    dm.add_argument("--source", action="append", required=True, help="DIR or DIR:PROBABILITY (repeatable)")
    dm.add_argument("--n-out", type=int, default=10_000)
    dm.add_argument("--alpha", type=float, default=1.0)
    dm.add_argument("--out", default="mixup")
    dm.add_argument("--resolution", default="384")
    dt = dsub.add_parser("tokens", parents=[common])
    dt.add_argument("runs", nargs="+")
    dt.add_argument("--output")

    ed = sub.add_parser("edit", parents=[common, backend], help="apply one natural-language edit to a program")
    ed.add_argument("program")
    ed.add_argument("instruction", metavar="COMMAND", help="the edit, in plain words")
    ed.add_argument("--query", default=None, help="object category (default: program file stem)")
    ed.add_argument("--edit-type", default="move")
    ed.add_argument("--aspect", default="object")
    ed.add_argument("--out", help="output path (default <stem>.edited.psc beside the input)")
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise FileNotFoundError(f"config file {cfg_path} not found")
        values = read_config(cfg_path)
        # file values become defaults, so explicit flags still win
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**values)
            for sub_action in action._actions:
                if isinstance(sub_action, argparse._SubParsersAction):
                    for p in sub_action.choices.values():
                        p.set_defaults(**values)
        args = parser.parse_args(argv)
    if args.command is None or (args.command == "dataset" and args.dataset_command is None):
        raise UsageError("a command is required (generate, render, eval, dataset, edit)")
    return args


def _int(args, name):
    try:
        return int(getattr(args, name))
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')} must be an integer") from None


def _float(args, name):
    try:
        return float(getattr(args, name))
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')} must be a number") from None


def make_backend(args):
    from .mllm import LiveBackend, MockBackend

    if args.backend == "live":
        return LiveBackend(model_id=args.model)
    if not args.fixtures:
        raise UsageError("the mock backend needs --fixtures")
    path = Path(args.fixtures)
    if not path.is_file():
        raise FileNotFoundError(f"fixture file {path} not found")
    try:
        return MockBackend.from_file(path)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad fixture file: {exc}") from exc


class DataError(Exception):
    pass


def read_program(path: str | Path):
    from .scene_lang import SceneSyntaxError, parse_program

    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found")
    try:
        return parse_program(path.read_bytes())
    except SceneSyntaxError as exc:
        raise DataError(f"{path}:{exc.line}:{exc.column}: {exc.detail}") from exc


def pipeline_config(args):
    from .agents import PipelineConfig

    try:
        return PipelineConfig(
            budget=_int(args, "budget"),
            views_per_iteration=_int(args, "views"),
            max_parts=_int(args, "max_parts"),
            top_p_predictions=_int(args, "top_p"),
            temperature=_float(args, "temperature"),
            agents=frozenset(_csv(args.agents) if isinstance(args.agents, str) else args.agents),
            seed=_int(args, "seed"),
            model_id=args.model or PipelineConfig.model_id,
            max_retries=_int(args, "retries"),
            retry_pause=_float(args, "retry_pause") if args.backend == "live" else 0.0,
            proposal_mode=args.proposal_mode,
            match_mode=args.match,
            strict=_bool(args.strict),
            resolution=_resolution(args.resolution),
            jobs=_int(args, "jobs"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_generate(args) -> int:
    from .agents import DesignerError, Query, render_iteration, run_naive, run_pipeline, write_run_dir
    from .agents.types import IterationRecord, PipelineResult
    from .mllm import MLLMError, Transcript

    try:
        query = Query(args.query)
    except ValueError:
        raise UsageError("query must be non-empty") from None
    cfg = pipeline_config(args)
    backend = make_backend(args)
    out = Path(args.out or Path("runs") / f"{query.text.replace(' ', '_')}-{cfg.seed}")
    transcript = Transcript()
    try:
        if args.pipeline == "naive":
            program = run_naive(query, backend, cfg, transcript=transcript)
            rec = IterationRecord(0, program, render_iteration(program, cfg, 0))
            result = PipelineResult(query.text, program, [rec], "no_inspector", transcript=transcript)
        else:
            result = run_pipeline(query, cfg, backend, transcript=transcript)
    except (DesignerError, MLLMError) as exc:
        out.mkdir(parents=True, exist_ok=True)
        transcript.write_jsonl(out / "transcript.jsonl")
        print(f"error: no program produced: {exc}", file=sys.stderr)
        return EXIT_DESIGNER
    write_run_dir(result, out, cfg)
    print(json.dumps({"run_dir": str(out), "stop_reason": result.stop_reason, "refinements": result.refinements,
                      "final_program": str(out / "final.psc"), "parts": len(result.program.parts)}))
    for d in result.diagnostics:
        print(f"warning: {d}", file=sys.stderr)
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import MODES, InvalidProgram, random_light_rig, render_views
    from .render.camera import parse_rig
    from .render.io import write_camera_metadata, write_image

    program = read_program(args.program)
    modes = _csv(args.modes)
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise UsageError(f"--modes must be drawn from {','.join(MODES)}")
    try:
        rig = parse_rig(args.rig)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = _resolution(args.resolution)
    out = Path(args.out or Path(args.program).with_name(Path(args.program).stem + "_renders"))
    out.mkdir(parents=True, exist_ok=True)
    try:
        cams = rig(program, args.seed, res)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lights = random_light_rig(args.seed)
    written = []
    try:
        rs = render_views(program, cams, lights, modes, jobs=args.jobs)
    except InvalidProgram as exc:
        raise DataError(f"{args.program}: {exc}") from exc
    for k, view in enumerate(rs.views):
        i = k // len(modes)
        written += write_image(out / f"view_{i}_{view.mode}.png", view.mode, view.pixels, program.labels)
    write_camera_metadata(out / "cameras.json", cams, args.seed, {"rig": args.rig, "lights": lights.to_dict()})
    print(json.dumps({"out": str(out), "images": sum(1 for w in written if w.suffix == ".png")}))
    return EXIT_OK


def _load_targets(directory: Path):
    from .geomeval import read_centroids
    from .render import part_centroids

    if not directory.is_dir():
        raise FileNotFoundError(f"targets directory {directory} not found")
    targets = []
    for path in sorted(directory.iterdir()):
        if path.suffix == ".json" and not path.name.endswith(".labels.json"):
            targets.append(read_centroids(path))
        elif path.suffix == ".psc":
            targets.append((path.stem, part_centroids(read_program(path))))
    if not targets:
        raise DataError(f"{directory} holds no .json or .psc targets")
    return targets


def cmd_eval(args) -> int:
    from .geomeval import AllTargetsSkipped, CloudFormatError, EmptyCloud, dense_eval, read_cloud, sparse_eval
    from .render import part_centroids

    proto = read_program(args.proto)
    if args.sparse:
        if not args.targets:
            raise UsageError("--sparse needs --targets DIR")
        targets = _load_targets(Path(args.targets))
        backend = None if args.no_backend or (args.backend == "mock" and not args.fixtures) else make_backend(args)
        try:
            report = sparse_eval(part_centroids(proto), targets, backend, query=Path(args.proto).stem).to_dict()
        except AllTargetsSkipped as exc:
            raise DataError(str(exc)) from exc
    else:
        if not args.target:
            raise UsageError("--dense needs --target CLOUD")
        path = Path(args.target)
        if not path.is_file():
            raise FileNotFoundError(f"target cloud {path} not found")
        try:
            cloud = read_cloud(path)
            report = dense_eval(proto, cloud, args.samples, args.seed, squared=args.squared).to_dict()
        except (CloudFormatError, EmptyCloud) as exc:
            raise DataError(str(exc)) from exc
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    _emit(report, args.output)
    return EXIT_OK


def _emit(report: dict, output: str | None) -> None:
    text = json.dumps(report, indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_dataset(args) -> int:
    from .dataset import EmptySource, MissingTranscript, MixupConfig, mixup_expand, render_corpus, summarize_tokens

    if args.dataset_command == "corpus":
        programs = [(Path(p).stem, read_program(p), args.seed) for p in args.programs]
        try:
            manifest = render_corpus(programs, args.rig, _csv(args.modes), args.out,
                                     seed=args.seed, resolution=_resolution(args.resolution), jobs=args.jobs)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(json.dumps({"out": args.out, "entries": len(manifest.entries), "failures": len(manifest.failures)}))
        return EXIT_OK
    if args.dataset_command == "mixup":
        sources = []
        for s in args.source:
            d, sep, prob = s.rpartition(":")
            sources.append((d, float(prob)) if sep and _is_float(prob) else (s, None))
        if any(p is None for _, p in sources):
            if any(p is not None for _, p in sources):
                raise UsageError("give a probability for every --source or for none")
            sources = [(d, 1.0 / len(sources)) for d, _ in sources]
        for d, _ in sources:
            if not Path(d).is_dir():
                raise FileNotFoundError(f"source directory {d} not found")
        try:
            cfg = MixupConfig(tuple(sources), args.n_out, _resolution(args.resolution), args.alpha, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        try:
            mixup_expand(cfg, args.out, jobs=args.jobs)
        except EmptySource as exc:
            raise DataError(str(exc)) from exc
        print(json.dumps({"out": args.out, "images": cfg.n_out}))
        return EXIT_OK
    try:
        report = summarize_tokens(args.runs)
    except MissingTranscript as exc:
        raise FileNotFoundError(str(exc)) from exc
    _emit(report, args.output)
    return EXIT_OK


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_edit(args) -> int:
    from .agents import Edit, EditSet, PipelineConfig, Query, refine_code
    from .scene_lang import serialize_program

    program = read_program(args.program)
    query = Query(args.query or Path(args.program).stem)
    try:
        edits = EditSet((Edit(args.aspect, args.edit_type, args.instruction),))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = PipelineConfig(
        temperature=args.temperature,
        seed=args.seed,
        max_retries=args.retries,
        retry_pause=args.retry_pause if args.backend == "live" else 0.0,
        model_id=args.model or PipelineConfig.model_id,
    )
    diags: list = []
    refined = refine_code(program, edits, cfg, make_backend(args), query=query, iteration=0, diagnostics=diags)
    out = Path(args.out or Path(args.program).with_name(Path(args.program).stem + ".edited.psc"))
    out.write_text(serialize_program(refined), encoding="utf-8")
    if diags:
        for d in diags:
            print(f"warning: {d}", file=sys.stderr)
        print(f"warning: edit not applied; {out} holds the unchanged program", file=sys.stderr)
        return EXIT_FAILSAFE
    print(json.dumps({"out": str(out)}))
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "render": cmd_render,
    "eval": cmd_eval,
    "dataset": cmd_dataset,
    "edit": cmd_edit,
}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except Exception as exc:  # last resort: report instead of a traceback
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
